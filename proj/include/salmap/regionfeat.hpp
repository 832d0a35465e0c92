#pragma once

#include <array>
#include <span>
#include <vector>

#include "salmap/filterbank.hpp"
#include "salmap/imgcore/geometry.hpp"
#include "salmap/imgcore/raster.hpp"
#include "salmap/multiseg.hpp"

namespace salmap {

inline constexpr std::size_t kContrastDims = 29;
inline constexpr std::size_t kPropertyDims = 58;
inline constexpr std::size_t kDescriptorDims = 2 * kContrastDims + kPropertyDims;  // 116

struct RegionFeatConfig {
  // pseudo-background
  int histogram_smoothing = 11;      // moving-average window, bins
  double peak_prominence = 0.005;    // fraction of the pixel count
  double threshold_factor = 0.9;
  std::size_t min_object_area = 500;
  int close_radius = 5;
  int strip_width = 15;
  // circle detection
  double circle_rho = 0.5;
  int circle_min_radius = 10;        // pixels; smaller distances never vote as radius
  double annulus_width = 5.0;
  int arc_disk_radius = 10;
  double circle_sigma = 3.0;
  double exact_budget = 1e8;         // edge x candidate pairs before striding
  int circle_stride = 4;
  bool circle_exact = false;         // never stride
  // chi-square histograms
  int lab_bins = 8;                  // per axis
  int hue_bins = 32;
  int sat_bins = 32;
};

/// Eq.-style chi-square (histograms) or absolute difference (otherwise).
/// Histogram mode returns a single element. Throws on length mismatch.
std::vector<double> feature_diff(std::span<const double> a, std::span<const double> b, bool is_histogram);

struct RegionStats {
  std::size_t area = 0;
  std::size_t perimeter = 0;   // pixels with a 4-neighbour outside the region
  Point2d centroid;
  double mu20 = 0, mu02 = 0, mu11 = 0;  // normalized, with the 1/12 pixel term
  std::vector<Point2d> hull;   // convex hull of pixel corners
};

RegionStats region_stats(const BinaryMask& region);
/// 1 - minor/major axis of the moment-matched ellipse.
double elongation(const RegionStats& s);
/// area / minimum-area rotated bounding rectangle of the pixel-corner hull.
double extent(const RegionStats& s);

struct Circle {
  double cx = 0, cy = 0;
  double radius = 0;
  double votes = 0;
};

struct CircleMaps {
  Plane center_map;       // histogram maximum per pixel
  Plane radius_map;       // its argmax (pixels)
  Plane probability_map;  // [0,1]
  std::vector<Circle> circles;
  BinaryMask edges;
};

CircleMaps detect_circles(const RasterImage& img, const RegionFeatConfig& cfg = {});
/// Mean of the probability map over the region.
double circle_probability(const BinaryMask& region, const CircleMaps& maps);

struct PseudoBackground {
  BinaryMask strip_mask;
  BinaryMask object;             // thresholded and cleaned background object
  double background_threshold = 0.0;
  bool fallback = false;         // border ring used instead
};

PseudoBackground extract_pseudo_background(const RasterImage& img, const RegionFeatConfig& cfg = {});

struct RegionDescriptor {
  std::array<double, kContrastDims> contrast{};
  std::array<double, kPropertyDims> property{};
  std::array<double, kContrastDims> background{};
  int region_id = 0;
  int level_index = 0;
  bool isolated = false;  // no adjacent region; contrast block is zero

  std::array<double, kDescriptorDims> flat() const;
};

/// Per-pixel inputs shared by every level.
struct FeaturePlanes {
  std::array<Plane, 3> rgb, lab, hsv;
  Plane gray;
  std::vector<Plane> lm;       // 15 raw responses
  Plane lm_max;                // max over the bank of |response|
  Plane lbp;                   // codes as values 0..255
  std::vector<Plane> laws;     // 14 raw responses
  Plane circle_prob;
  std::vector<std::uint16_t> lab_bin, hue_bin, sat_bin, lbp_bin;
};

FeaturePlanes compute_planes(const RasterImage& img, const RegionFeatConfig& cfg = {});
FeaturePlanes compute_planes(const RasterImage& img, const CircleMaps& circles, const RegionFeatConfig& cfg = {});

/// Descriptors for every region of every level: result[level][region].
std::vector<std::vector<RegionDescriptor>> describe_regions(const MultiLevelPartition& partition,
                                                            const FeaturePlanes& planes,
                                                            const PseudoBackground& background,
                                                            const RegionFeatConfig& cfg = {});

/// Convenience: planes, pseudo-background and descriptors from one image.
std::vector<std::vector<RegionDescriptor>> describe_image(const MultiLevelPartition& partition,
                                                          const RasterImage& img,
                                                          const RegionFeatConfig& cfg = {});

}  // namespace salmap
