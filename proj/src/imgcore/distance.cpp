#include "salmap/imgcore/distance.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace salmap {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Lower envelope of parabolas (Felzenszwalb & Huttenlocher 1-D squared
// distance transform). f and d have length n; v and z are scratch.
void edt_1d(const double* f, double* d, int n, std::vector<int>& v, std::vector<double>& z) {
  v.resize(static_cast<std::size_t>(n));
  z.resize(static_cast<std::size_t>(n) + 1);
  auto meet = [f](int q, int p) {
    return ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * (q - p));
  };
  std::size_t k = 0;
  bool started = false;
  for (int q = 0; q < n; ++q) {
    if (f[q] == kInf) continue;
    if (!started) {
      started = true;
      v[0] = q;
      z[0] = -kInf;
      z[1] = kInf;
      continue;
    }
    double s = meet(q, v[k]);
    while (s <= z[k]) {
      --k;
      s = meet(q, v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  if (!started) {
    for (int q = 0; q < n; ++q) d[q] = kInf;
    return;
  }
  std::size_t j = 0;
  for (int q = 0; q < n; ++q) {
    while (z[j + 1] < q) ++j;
    const int p = v[j];
    d[q] = double(q - p) * (q - p) + f[p];
  }
}

}  // namespace

Plane squared_distance_to(const BinaryMask& targets, bool outside_is_target) {
  const int pad = outside_is_target ? 1 : 0;
  const int w = targets.width() + 2 * pad;
  const int h = targets.height() + 2 * pad;
  std::vector<double> g(static_cast<std::size_t>(w) * h, kInf);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const int ix = x - pad;
      const int iy = y - pad;
      const bool inside = targets.contains(ix, iy);
      const bool t = inside ? targets.test(ix, iy) : true;
      if (t) g[static_cast<std::size_t>(y) * w + x] = 0.0;
    }

  std::vector<int> v;
  std::vector<double> z;
  std::vector<double> col_in(static_cast<std::size_t>(h)), col_out(static_cast<std::size_t>(h));
  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < h; ++y) col_in[static_cast<std::size_t>(y)] = g[static_cast<std::size_t>(y) * w + x];
    edt_1d(col_in.data(), col_out.data(), h, v, z);
    for (int y = 0; y < h; ++y) g[static_cast<std::size_t>(y) * w + x] = col_out[static_cast<std::size_t>(y)];
  }
  std::vector<double> row_out(static_cast<std::size_t>(w));
  for (int y = 0; y < h; ++y) {
    double* row = g.data() + static_cast<std::size_t>(y) * w;
    edt_1d(row, row_out.data(), w, v, z);
    std::copy(row_out.begin(), row_out.end(), row);
  }

  Plane out(targets.width(), targets.height());
  for (int y = 0; y < targets.height(); ++y)
    for (int x = 0; x < targets.width(); ++x)
      out(x, y) = g[static_cast<std::size_t>(y + pad) * w + (x + pad)];
  return out;
}

LevelSetField signed_distance(const BinaryMask& mask) {
  const std::size_t n = mask.count();
  if (n == 0 || n == mask.size()) throw Error("degenerate mask");
  const Plane to_inside = squared_distance_to(mask);
  const Plane to_outside = squared_distance_to(mask.complement());
  LevelSetField phi(mask.width(), mask.height());
  for (std::size_t i = 0; i < mask.size(); ++i)
    phi[i] = mask[i] ? -(std::sqrt(to_outside[i]) - 0.5) : std::sqrt(to_inside[i]) - 0.5;
  return phi;
}

}  // namespace salmap
