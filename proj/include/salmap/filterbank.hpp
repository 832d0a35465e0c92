#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "salmap/imgcore/raster.hpp"

namespace salmap {

/// Square odd-sized correlation kernel.
struct Kernel {
  std::string name;
  int size = 0;  // side length
  std::vector<double> taps;  // row-major, size*size

  int radius() const { return size / 2; }
  double at(int dx, int dy) const {  // dx, dy in [-radius, radius]
    return taps[static_cast<std::size_t>((dy + radius()) * size + (dx + radius()))];
  }
  double sum() const;
};

enum class BankKind { LM15, Laws14 };

struct FilterBank {
  BankKind kind = BankKind::LM15;
  std::vector<Kernel> kernels;

  std::size_t size() const { return kernels.size(); }
};

/// 15 Leung-Malik kernels on 49x49 support: 6 oriented first derivatives,
/// 6 oriented second derivatives (elongated Gaussian, sigma 3 along the
/// bar and 1 across, orientation = derivative direction, k*30 degrees),
/// one Gaussian (sigma 10) and two LoG (sigma 10, 20). Derivatives and LoG
/// are zero-mean with unit L1 norm; the Gaussian sums to one.
FilterBank make_lm15();

/// The 14 Laws 5x5 kernels: all outer products of L5 E5 S5 W5 R5 with each
/// symmetric pair averaged, minus L5L5.
FilterBank make_laws14();

/// 2-D correlation of a single plane with every kernel, replicate padding.
/// Large kernels go through an FFT; the result matches direct correlation
/// to rounding.
std::vector<Plane> filter_response(const Plane& img, const FilterBank& bank);
/// Single-channel image version; throws on multi-channel input.
std::vector<Plane> filter_response(const RasterImage& img, const FilterBank& bank);
Plane correlate(const Plane& img, const Kernel& k);

using LBPMap = Grid<std::uint8_t>;

/// 8-neighbour radius-1 LBP: bit i is set iff neighbour i >= centre, with
/// neighbours enumerated clockwise starting east (E, SE, S, SW, W, NW, N, NE).
LBPMap lbp_codes(const Plane& img);

struct Gradient {
  Plane gx, gy;
};

/// 3x3 Prewitt derivatives, replicate padding; gx grows to the right.
Gradient prewitt(const Plane& img);
Plane prewitt_magnitude(const Plane& img);

}  // namespace salmap
