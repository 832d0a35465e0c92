#include "salmap/imgcore/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>

namespace salmap {
namespace {

double cross(const Point2d& o, const Point2d& a, const Point2d& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

struct IPoint {
  std::int64_t x, y;
};

std::int64_t icross(const IPoint& o, const IPoint& a, const IPoint& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

void draw_segment(BinaryMask& out, IPoint a, IPoint b) {
  // Bresenham
  std::int64_t dx = std::llabs(b.x - a.x), dy = -std::llabs(b.y - a.y);
  const std::int64_t sx = a.x < b.x ? 1 : -1, sy = a.y < b.y ? 1 : -1;
  std::int64_t err = dx + dy;
  while (true) {
    out.set(static_cast<int>(a.x), static_cast<int>(a.y));
    if (a.x == b.x && a.y == b.y) break;
    const std::int64_t e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      a.x += sx;
    }
    if (e2 <= dx) {
      err += dx;
      a.y += sy;
    }
  }
}

}  // namespace

std::vector<Point2d> convex_hull(std::vector<Point2d> pts) {
  std::sort(pts.begin(), pts.end(),
            [](const Point2d& a, const Point2d& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  std::vector<Point2d> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

double polygon_area(const std::vector<Point2d>& poly) {
  if (poly.size() < 3) return 0.0;
  double a = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto& p = poly[i];
    const auto& q = poly[(i + 1) % poly.size()];
    a += p.x * q.y - q.x * p.y;
  }
  return std::abs(a) / 2.0;
}

double min_area_rect(const std::vector<Point2d>& hull) {
  if (hull.size() < 3) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  const std::size_t n = hull.size();
  // The optimal rectangle has a side collinear with a hull edge, so trying
  // every edge direction is exact; O(n^2) is fine at region scale.
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = hull[i];
    const auto& q = hull[(i + 1) % n];
    double ux = q.x - p.x, uy = q.y - p.y;
    const double len = std::hypot(ux, uy);
    if (len == 0.0) continue;
    ux /= len;
    uy /= len;
    double lo_u = std::numeric_limits<double>::infinity(), hi_u = -lo_u;
    double lo_v = lo_u, hi_v = -lo_u;
    for (const auto& r : hull) {
      const double u = (r.x - p.x) * ux + (r.y - p.y) * uy;
      const double v = -(r.x - p.x) * uy + (r.y - p.y) * ux;
      lo_u = std::min(lo_u, u);
      hi_u = std::max(hi_u, u);
      lo_v = std::min(lo_v, v);
      hi_v = std::max(hi_v, v);
    }
    best = std::min(best, (hi_u - lo_u) * (hi_v - lo_v));
  }
  return best;
}

BinaryMask convex_hull_mask(const BinaryMask& mask) {
  if (!mask.any()) throw Error("empty input");
  // Only the extreme pixel of each row can be a hull vertex.
  std::vector<IPoint> pts;
  for (int y = 0; y < mask.height(); ++y) {
    int lo = -1, hi = -1;
    for (int x = 0; x < mask.width(); ++x)
      if (mask.test(x, y)) {
        if (lo < 0) lo = x;
        hi = x;
      }
    if (lo < 0) continue;
    pts.push_back({lo, y});
    if (hi != lo) pts.push_back({hi, y});
  }
  std::sort(pts.begin(), pts.end(),
            [](const IPoint& a, const IPoint& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });

  std::vector<IPoint> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && icross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && icross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k > 1 ? k - 1 : k);

  BinaryMask out(mask.width(), mask.height());
  if (hull.size() < 3) {
    if (hull.size() == 1)
      out.set(static_cast<int>(hull[0].x), static_cast<int>(hull[0].y));
    else
      draw_segment(out, hull[0], hull[1]);
    return out;
  }

  // Counter-clockwise in (x, y) math orientation: a pixel centre is inside
  // iff it lies on the left of (or on) every edge. Integer arithmetic keeps
  // the fill exact, which makes hull(hull(m)) == hull(m).
  std::int64_t min_y = hull[0].y, max_y = hull[0].y;
  for (const auto& p : hull) {
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  for (std::int64_t y = min_y; y <= max_y; ++y)
    for (int x = 0; x < mask.width(); ++x) {
      const IPoint c{x, y};
      bool inside = true;
      for (std::size_t i = 0; i < hull.size() && inside; ++i)
        inside = icross(hull[i], hull[(i + 1) % hull.size()], c) >= 0;
      if (inside) out.set(x, static_cast<int>(y));
    }
  return out;
}

}  // namespace salmap
