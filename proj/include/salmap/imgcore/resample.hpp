#pragma once

#include "salmap/imgcore/raster.hpp"

namespace salmap {

// Pixel-centre aligned sampling: src = (dst + 0.5) * scale - 0.5.
Plane resize_bilinear(const Plane& src, int width, int height);
RasterImage resize_bilinear(const RasterImage& src, int width, int height);
BinaryMask resize_nearest(const BinaryMask& src, int width, int height);
LabelGrid resize_nearest(const LabelGrid& src, int width, int height);

/// Separable Gaussian with replicate borders; kernel radius ceil(3 sigma).
Plane gaussian_blur(const Plane& src, double sigma);

}  // namespace salmap
