#pragma once

#include "gazekit/geometry.hpp"

#include <string>

namespace gazekit {

/// Reads PNG or JPEG into an 8-bit raster. Grayscale files load as one
/// channel, colour files as three channels in RGB order. Throws IoError.
ImageRaster read_image(const std::string& path);

/// Writes an 8-bit PNG (1 or 3 channels). Throws IoError.
void write_png(const std::string& path, const ImageRaster& image);

} // namespace gazekit
