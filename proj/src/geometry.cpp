#include "gazekit/geometry.hpp"

#include "gazekit/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gazekit {

namespace {

// floor(a / b) and ceil(a / b) for b > 0 and any sign of a.
std::int64_t floor_div(std::int64_t a, std::int64_t b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }
std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return -floor_div(-a, b); }

std::vector<double> gaussian_kernel(double sigma) {
    const int half = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> k(static_cast<std::size_t>(half) + 1);
    for (int i = 0; i <= half; ++i) k[static_cast<std::size_t>(i)] = std::exp(-0.5 * (i * i) / (sigma * sigma));
    return k; // one-sided; k[0] is the centre tap
}

// One separable pass along lines of length `n`. Taps are summed in mirrored
// pairs so a reflected input gives a bit-identical reflected output.
void blur_line(const double* in, double* out, int n, std::ptrdiff_t stride, const std::vector<double>& k) {
    const int half = static_cast<int>(k.size()) - 1;
    for (int i = 0; i < n; ++i) {
        double acc = k[0] * in[i * stride];
        double norm = k[0];
        for (int d = 1; d <= half; ++d) {
            const bool lo = i - d >= 0;
            const bool hi = i + d < n;
            const double a = lo ? in[(i - d) * stride] : 0.0;
            const double b = hi ? in[(i + d) * stride] : 0.0;
            acc += k[static_cast<std::size_t>(d)] * (a + b);
            norm += k[static_cast<std::size_t>(d)] * (static_cast<int>(lo) + static_cast<int>(hi));
        }
        out[i * stride] = acc / norm;
    }
}

} // namespace

ImageRaster::ImageRaster(int w, int h, int c, std::uint8_t fill)
    : width(w), height(h), channels(c),
      samples(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * static_cast<std::size_t>(c), fill) {}

void validate(const FaceBBox& box) {
    if (box.width() <= 0 || box.height() <= 0)
        throw Error(ErrorCode::DegenerateBBox,
                    "bbox (" + std::to_string(box.x_min) + "," + std::to_string(box.y_min) + "," +
                        std::to_string(box.x_max) + "," + std::to_string(box.y_max) + ")");
}

MaskRect eye_region_band(const FaceBBox& bbox, int image_w, int image_h) {
    validate(bbox);
    const std::int64_t h = bbox.height();
    const std::int64_t w = bbox.width();
    // Work in hundredths so 0.25, 0.55 and 0.05 are exact.
    std::int64_t row_lo = ceil_div(100 * std::int64_t{bbox.y_min} + 25 * h, 100);
    std::int64_t row_hi = floor_div(100 * std::int64_t{bbox.y_min} + 55 * h, 100);
    std::int64_t col_lo = ceil_div(100 * std::int64_t{bbox.x_min} + 5 * w, 100);
    std::int64_t col_hi = floor_div(100 * std::int64_t{bbox.x_max} - 5 * w, 100);

    if (row_lo > row_hi || col_lo > col_hi) throw Error(ErrorCode::EmptyBand, "band contains no pixel");
    if (image_w <= 0 || image_h <= 0) throw Error(ErrorCode::EmptyBand, "image has no pixels");

    row_lo = std::max<std::int64_t>(row_lo, 0);
    col_lo = std::max<std::int64_t>(col_lo, 0);
    row_hi = std::min<std::int64_t>(row_hi, image_h - 1);
    col_hi = std::min<std::int64_t>(col_hi, image_w - 1);
    if (row_lo > row_hi || col_lo > col_hi) throw Error(ErrorCode::EmptyBand, "band lies outside the image");

    return MaskRect{static_cast<int>(row_lo), static_cast<int>(row_hi), static_cast<int>(col_lo),
                    static_cast<int>(col_hi)};
}

ImageRaster rasterize_soft_mask(const MaskRect& rect, int image_w, int image_h, double blur_radius) {
    ImageRaster mask(image_w, image_h, 1, 0);
    for (int r = std::max(rect.row_lo, 0); r <= std::min(rect.row_hi, image_h - 1); ++r)
        for (int c = std::max(rect.col_lo, 0); c <= std::min(rect.col_hi, image_w - 1); ++c) mask.at(r, c) = 255;
    if (blur_radius <= 0.0) return mask;

    const auto kernel = gaussian_kernel(blur_radius);
    std::vector<double> a(mask.samples.begin(), mask.samples.end());
    std::vector<double> b(a.size());
    for (int r = 0; r < image_h; ++r)
        blur_line(a.data() + static_cast<std::ptrdiff_t>(r) * image_w, b.data() + static_cast<std::ptrdiff_t>(r) * image_w,
                  image_w, 1, kernel);
    for (int c = 0; c < image_w; ++c) blur_line(b.data() + c, a.data() + c, image_h, image_w, kernel);

    for (std::size_t i = 0; i < a.size(); ++i)
        mask.samples[i] = static_cast<std::uint8_t>(std::clamp(std::lround(a[i]), 0L, 255L));
    return mask;
}

std::pair<int, int> flux_resize_dims(int w, int h, int max_size) {
    if (w < 1 || h < 1) throw Error(ErrorCode::ZeroDimension, "input dimensions must be positive");
    const double ratio = static_cast<double>(max_size) / static_cast<double>(std::max(w, h));
    // int() in the reference pipeline truncates toward zero.
    const int new_w = static_cast<int>(static_cast<double>(w) * ratio) / 16 * 16;
    const int new_h = static_cast<int>(static_cast<double>(h) * ratio) / 16 * 16;
    if (new_w == 0 || new_h == 0)
        throw Error(ErrorCode::ZeroDimension,
                    std::to_string(w) + "x" + std::to_string(h) + " collapses below the 16-pixel grid");
    return {new_w, new_h};
}

IntegrityReport pair_integrity(const ImageRaster& real, const ImageRaster& fake, const MaskRect& rect, int dilation,
                               int tolerance) {
    if (real.width != fake.width || real.height != fake.height || real.channels != fake.channels)
        throw Error(ErrorCode::DimensionMismatch, "real and fake rasters differ in shape");
    const MaskRect grown{rect.row_lo - dilation, rect.row_hi + dilation, rect.col_lo - dilation,
                         rect.col_hi + dilation};

    IntegrityReport report;
    for (int r = 0; r < real.height; ++r) {
        for (int c = 0; c < real.width; ++c) {
            if (grown.contains(r, c)) continue;
            int worst = 0;
            for (int ch = 0; ch < real.channels; ++ch)
                worst = std::max(worst, std::abs(int{real.at(r, c, ch)} - int{fake.at(r, c, ch)}));
            report.max_outside_diff = std::max(report.max_outside_diff, worst);
            if (worst > tolerance) ++report.violating_pixel_count;
        }
    }
    report.pass = report.max_outside_diff <= tolerance;
    return report;
}

} // namespace gazekit
