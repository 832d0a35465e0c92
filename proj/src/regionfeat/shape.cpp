#include <algorithm>
#include <cmath>
#include <limits>

#include "salmap/regionfeat.hpp"

namespace salmap {

std::vector<double> feature_diff(std::span<const double> a, std::span<const double> b, bool is_histogram) {
  if (a.size() != b.size()) throw Error("feature_diff: length mismatch");
  if (is_histogram) {
    double chi = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double s = a[i] + b[i];
      if (s > 0.0) chi += 2.0 * (a[i] - b[i]) * (a[i] - b[i]) / s;
    }
    return {chi};
  }
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = std::abs(a[i] - b[i]);
  return out;
}

RegionStats region_stats(const BinaryMask& region) {
  RegionStats s;
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  std::vector<Point2d> corners;
  const int w = region.width(), h = region.height();
  for (int y = 0; y < h; ++y) {
    int lo = std::numeric_limits<int>::max(), hi = -1;
    for (int x = 0; x < w; ++x) {
      if (!region(x, y)) continue;
      ++s.area;
      sx += x;
      sy += y;
      sxx += double(x) * x;
      syy += double(y) * y;
      sxy += double(x) * y;
      lo = std::min(lo, x);
      hi = std::max(hi, x);
      const bool edge = x == 0 || y == 0 || x == w - 1 || y == h - 1 || !region(x - 1, y) ||
                        !region(x + 1, y) || !region(x, y - 1) || !region(x, y + 1);
      if (edge) ++s.perimeter;
    }
    if (hi >= 0) {
      corners.push_back({double(lo), double(y)});
      corners.push_back({double(lo), double(y + 1)});
      corners.push_back({double(hi + 1), double(y)});
      corners.push_back({double(hi + 1), double(y + 1)});
    }
  }
  if (s.area == 0) throw Error("region_stats: empty region");
  const double n = static_cast<double>(s.area);
  s.centroid = {sx / n, sy / n};
  s.mu20 = sxx / n - s.centroid.x * s.centroid.x + 1.0 / 12.0;
  s.mu02 = syy / n - s.centroid.y * s.centroid.y + 1.0 / 12.0;
  s.mu11 = sxy / n - s.centroid.x * s.centroid.y;
  s.hull = convex_hull(std::move(corners));
  return s;
}

double elongation(const RegionStats& s) {
  const double tr = s.mu20 + s.mu02;
  const double det_term = std::sqrt(std::max(0.0, (s.mu20 - s.mu02) * (s.mu20 - s.mu02) + 4.0 * s.mu11 * s.mu11));
  const double major = 0.5 * (tr + det_term);
  const double minor = std::max(0.0, 0.5 * (tr - det_term));
  if (major <= 0.0) return 0.0;
  return 1.0 - std::sqrt(minor / major);
}

double extent(const RegionStats& s) {
  const double box = min_area_rect(s.hull);
  if (box <= 0.0) return 1.0;
  return std::min(1.0, static_cast<double>(s.area) / box);
}

}  // namespace salmap
