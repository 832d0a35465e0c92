#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "salmap/imgcore/raster.hpp"

namespace salmap {

/// 256-bin intensity histogram; bin = round(255 * v).
struct GrayHistogram {
  std::array<std::uint64_t, 256> bins{};
  std::uint64_t total = 0;

  static int bin_of(double v) {
    const int b = static_cast<int>(clamp01(v) * 255.0 + 0.5);
    return b > 255 ? 255 : b;
  }
  static double intensity_of(int bin) { return bin / 255.0; }
};

GrayHistogram make_histogram(std::span<const double> values);

/// Shannon entropy in bits; empty bins contribute nothing.
double entropy_bits(const GrayHistogram& h);

/// Entropy of R, G, B then gray for 3-channel input; only gray for 1-channel.
std::vector<double> channel_entropy(const RasterImage& img);

/// Otsu threshold on the value range of `values` (256 bins between min and
/// max). Returns the threshold value; pixels strictly above it are foreground.
double otsu_threshold(std::span<const double> values);

}  // namespace salmap
