#pragma once

#include <filesystem>

#include "salmap/imgcore/raster.hpp"

namespace salmap::io {

/// Decodes PNG/JPEG into a 3-channel sRGB image (gray files are expanded).
RasterImage load_image(const std::filesystem::path& path);
/// Binary masks: any pixel > 127 is true.
BinaryMask load_mask(const std::filesystem::path& path);

/// 8-bit PNG writers. Writes go to a temporary sibling then get renamed.
void save_png(const std::filesystem::path& path, const RasterImage& img);
void save_png(const std::filesystem::path& path, const BinaryMask& mask);   // {0,255}
void save_png(const std::filesystem::path& path, const Plane& unit_plane);  // round(255 v)
/// Label map as an indexed-colour PNG (fixed pseudo-random palette).
void save_label_png(const std::filesystem::path& path, const LabelGrid& labels);

}  // namespace salmap::io
