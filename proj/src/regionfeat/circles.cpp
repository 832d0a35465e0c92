#include <algorithm>
#include <cmath>
#include <numbers>

#include "salmap/imgcore/color.hpp"
#include "salmap/imgcore/histogram.hpp"
#include "salmap/imgcore/morphology.hpp"
#include "salmap/imgcore/resample.hpp"
#include "salmap/regionfeat.hpp"

namespace salmap {
namespace {

Plane gray_plane(const RasterImage& img) {
  return img.channels() == 3 ? to_gray(img).channel(0) : img.channel(0);
}

}  // namespace

CircleMaps detect_circles(const RasterImage& img, const RegionFeatConfig& cfg) {
  const int w = img.width(), h = img.height();
  CircleMaps out{Plane(w, h), Plane(w, h), Plane(w, h), {}, BinaryMask(w, h)};

  const Plane mag = prewitt_magnitude(gray_plane(img));
  const auto [mn, mx] = std::minmax_element(mag.raw().begin(), mag.raw().end());
  if (*mx <= *mn) return out;
  const double thr = otsu_threshold(mag.values());
  std::size_t edge_count = 0;
  for (std::size_t i = 0; i < mag.size(); ++i)
    if (mag[i] > thr) {
      out.edges[i] = 1;
      ++edge_count;
    }
  if (edge_count == 0) return out;

  const double pairs = static_cast<double>(mag.size()) * static_cast<double>(edge_count);
  const int s = (!cfg.circle_exact && pairs > cfg.exact_budget) ? std::max(1, cfg.circle_stride) : 1;
  const int cw = (w + s - 1) / s, ch = (h + s - 1) / s;

  // Edge cells on the (possibly strided) grid; a cell is an edge if any of its pixels is.
  BinaryMask coarse(cw, ch);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (out.edges(x, y)) coarse(x / s, y / s) = 1;
  std::vector<std::pair<int, int>> pts;
  for (int y = 0; y < ch; ++y)
    for (int x = 0; x < cw; ++x)
      if (coarse(x, y)) pts.emplace_back(x, y);

  const int rmin = std::max(1, (cfg.circle_min_radius + s - 1) / s);
  const int max_sq = (cw - 1) * (cw - 1) + (ch - 1) * (ch - 1);
  std::vector<int> bin_of(static_cast<std::size_t>(max_sq) + 1);
  for (int k = 0; k <= max_sq; ++k) bin_of[static_cast<std::size_t>(k)] = static_cast<int>(std::lround(std::sqrt(double(k))));
  const int nbins = bin_of.back() + 2;

  Plane cmap(cw, ch), rmap(cw, ch);
  std::vector<int> hist(static_cast<std::size_t>(nbins));
  for (int y = 0; y < ch; ++y)
    for (int x = 0; x < cw; ++x) {
      std::fill(hist.begin(), hist.end(), 0);
      for (auto [ex, ey] : pts) {
        const int dx = ex - x, dy = ey - y;
        ++hist[static_cast<std::size_t>(bin_of[static_cast<std::size_t>(dx * dx + dy * dy)])];
      }
      int best = 0, arg = 0;
      for (int d = rmin; d < nbins; ++d)
        if (hist[static_cast<std::size_t>(d)] > best) {
          best = hist[static_cast<std::size_t>(d)];
          arg = d;
        }
      cmap(x, y) = best;
      rmap(x, y) = arg;
    }

  // 3x3 non-maximum suppression; equal neighbours earlier in raster order win.
  for (int y = 0; y < ch; ++y)
    for (int x = 0; x < cw; ++x) {
      const double v = cmap(x, y);
      const double r = rmap(x, y);
      if (r < rmin || v < cfg.circle_rho * 2.0 * std::numbers::pi * r) continue;
      bool peak = true;
      for (int dy = -1; dy <= 1 && peak; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          if ((dx == 0 && dy == 0) || !cmap.contains(x + dx, y + dy)) continue;
          const double u = cmap(x + dx, y + dy);
          const bool earlier = dy < 0 || (dy == 0 && dx < 0);
          if (u > v || (earlier && u == v)) {
            peak = false;
            break;
          }
        }
      if (!peak) continue;
      const double off = (s - 1) / 2.0;
      out.circles.push_back({x * s + off, y * s + off, r * s, v});
    }

  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      out.center_map(x, y) = cmap(x / s, y / s);
      out.radius_map(x, y) = rmap(x / s, y / s) * s;
    }

  if (out.circles.empty()) return out;
  BinaryMask ring(w, h), arcs(w, h);
  const double half = cfg.annulus_width / 2.0;
  const double arc_tol = std::max(1.0, s / 2.0);
  for (const auto& c : out.circles) {
    const int x0 = std::max(0, static_cast<int>(std::floor(c.cx - c.radius - half - 1)));
    const int x1 = std::min(w - 1, static_cast<int>(std::ceil(c.cx + c.radius + half + 1)));
    const int y0 = std::max(0, static_cast<int>(std::floor(c.cy - c.radius - half - 1)));
    const int y1 = std::min(h - 1, static_cast<int>(std::ceil(c.cy + c.radius + half + 1)));
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) {
        const double d = std::hypot(x - c.cx, y - c.cy);
        if (std::abs(d - c.radius) <= half) ring(x, y) = 1;
        if (out.edges(x, y) && std::abs(d - c.radius) <= arc_tol) arcs(x, y) = 1;
      }
  }
  if (arcs.any()) ring = ring | dilate(arcs, StructuringElement::disk(cfg.arc_disk_radius));
  Plane p(w, h);
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = ring[i];
  p = gaussian_blur(p, cfg.circle_sigma);
  for (double& v : p.raw()) v = clamp01(v);
  out.probability_map = std::move(p);
  return out;
}

double circle_probability(const BinaryMask& region, const CircleMaps& maps) {
  if (!region.same_shape(maps.probability_map)) throw Error("circle_probability: shape mismatch");
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < region.size(); ++i)
    if (region[i]) {
      sum += maps.probability_map[i];
      ++n;
    }
  return n ? sum / static_cast<double>(n) : 0.0;
}

}  // namespace salmap
