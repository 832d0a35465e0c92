#pragma once

#include <array>

#include "salmap/imgcore/raster.hpp"

namespace salmap {

enum class ColorSpace { Lab, HSV };

/// ITU-R 601 luma. Throws "already gray" on single-channel input.
RasterImage to_gray(const RasterImage& img);

/// sRGB -> normalized CIE L*a*b* (D65) or HSV. Every output channel is in
/// [0,1]: L/100, (a*+128)/255, (b*+128)/255; H, S, V directly.
RasterImage convert_color(const RasterImage& img, ColorSpace target);

/// Inverse of the normalized Lab encoding above, back to sRGB in [0,1].
RasterImage lab_to_srgb(const RasterImage& lab);

// Per-pixel conversions; the image versions loop over these.
std::array<double, 3> srgb_to_lab_pixel(double r, double g, double b);  // raw L, a*, b*
std::array<double, 3> lab_to_srgb_pixel(double L, double a, double b);
std::array<double, 3> srgb_to_hsv_pixel(double r, double g, double b);
std::array<double, 3> normalize_lab(const std::array<double, 3>& lab);
std::array<double, 3> denormalize_lab(const std::array<double, 3>& lab01);

}  // namespace salmap
