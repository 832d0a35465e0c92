#pragma once

#include <vector>

#include "salmap/imgcore/raster.hpp"

namespace salmap {

struct Point2d {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2d&, const Point2d&) = default;
};

/// Andrew's monotone chain. Counter-clockwise (in x-right/y-down pixel
/// coordinates this is clockwise on screen), no repeated or collinear
/// vertices. Fewer than three distinct points come back as-is (deduplicated).
std::vector<Point2d> convex_hull(std::vector<Point2d> points);

double polygon_area(const std::vector<Point2d>& poly);

/// Area of the minimum-area enclosing rectangle of a convex polygon
/// (rotating calipers over hull edges). Zero for degenerate hulls.
double min_area_rect(const std::vector<Point2d>& hull);

/// Filled convex hull of all true pixels (pixel centres). Collinear inputs
/// give the rasterized segment. Throws "empty input" on an empty mask.
BinaryMask convex_hull_mask(const BinaryMask& mask);

}  // namespace salmap
