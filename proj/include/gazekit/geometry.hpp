#pragma once

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace gazekit {

/// Face box in image space, origin top-left.
struct FaceBBox {
    int x_min = 0;
    int y_min = 0;
    int x_max = 0;
    int y_max = 0;

    int width() const { return x_max - x_min; }
    int height() const { return y_max - y_min; }
    friend bool operator==(const FaceBBox&, const FaceBBox&) = default;
};

/// Throws DegenerateBBox unless x_max > x_min and y_max > y_min.
void validate(const FaceBBox& box);

/// Inclusive pixel bounds.
struct MaskRect {
    int row_lo = 0;
    int row_hi = 0;
    int col_lo = 0;
    int col_hi = 0;

    bool contains(int row, int col) const {
        return row >= row_lo && row <= row_hi && col >= col_lo && col <= col_hi;
    }
    std::int64_t area() const {
        return static_cast<std::int64_t>(row_hi - row_lo + 1) * (col_hi - col_lo + 1);
    }
    friend bool operator==(const MaskRect&, const MaskRect&) = default;
};

/// 8-bit raster, row-major, channels interleaved.
struct ImageRaster {
    int width = 0;
    int height = 0;
    int channels = 1;
    std::vector<std::uint8_t> samples;

    ImageRaster() = default;
    ImageRaster(int w, int h, int c, std::uint8_t fill = 0);

    std::uint8_t& at(int row, int col, int ch = 0) {
        return samples[(static_cast<std::size_t>(row) * width + col) * channels + ch];
    }
    std::uint8_t at(int row, int col, int ch = 0) const {
        return samples[(static_cast<std::size_t>(row) * width + col) * channels + ch];
    }
};

/// Eye band of a face box: rows y_min + 0.25h .. y_min + 0.55h and columns
/// x_min + 0.05w .. x_max - 0.05w, both inclusive. Bounds are the integer
/// pixels satisfying the real-valued inequalities (lower bounds rounded up,
/// upper bounds rounded down, in exact integer arithmetic), then clamped to
/// the image. Throws DegenerateBBox or EmptyBand.
MaskRect eye_region_band(const FaceBBox& bbox, int image_w, int image_h);

inline constexpr double kDefaultBlurRadius = 3.0;

/// Binary rectangle (255 inside) blurred by a separable Gaussian with
/// sigma = blur_radius and half-width ceil(3 sigma), renormalized over the
/// taps that fall inside the image. blur_radius 0 yields the binary mask.
ImageRaster rasterize_soft_mask(const MaskRect& rect, int image_w, int image_h,
                                double blur_radius = kDefaultBlurRadius);

/// Resize target on the 16-pixel grid used by the inpainting pipeline:
/// ratio = max_size / max(w, h), side = (int(side * ratio) // 16) * 16.
/// Upscales when the image is smaller than max_size. Throws ZeroDimension.
std::pair<int, int> flux_resize_dims(int w, int h, int max_size = 1024);

inline constexpr int kDefaultIntegrityDilation = 9;
inline constexpr int kDefaultIntegrityTolerance = 2;

struct IntegrityReport {
    bool pass = true;
    int max_outside_diff = 0;
    std::int64_t violating_pixel_count = 0;
};

/// Checks that a real/fake pair differs only inside `rect` grown by
/// `dilation` pixels. A pixel violates when any channel differs by more
/// than `tolerance`. Throws DimensionMismatch.
IntegrityReport pair_integrity(const ImageRaster& real, const ImageRaster& fake, const MaskRect& rect,
                               int dilation = kDefaultIntegrityDilation,
                               int tolerance = kDefaultIntegrityTolerance);

/// Inpainting prompt carried as metadata in emitted mask records.
inline constexpr std::string_view kInpaintPrompt =
    "eyes looking to the side, avoiding eye contact, natural eye movement, same person, photorealistic";

} // namespace gazekit
