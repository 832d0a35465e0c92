#pragma once

#include <vector>

#include "salmap/imgcore/raster.hpp"

namespace salmap {

/// A partition of the image into 4-connected regions with ids 0..count-1.
struct LabelMap {
  LabelGrid labels;
  int region_count = 0;

  int width() const { return labels.width(); }
  int height() const { return labels.height(); }
};

struct MultisegConfig {
  int level_count = 15;
  double felz_k = 150.0;      // on 0..255 intensities
  int felz_min_size = 50;     // pixels
  double felz_sigma = 0.8;
  int coarsest_regions = 8;   // end point of the automatic schedule
  /// Explicit targets for levels 1..level_count-1; empty means a geometric
  /// schedule from the finest count down to coarsest_regions.
  std::vector<int> merge_schedule;
};

struct MultiLevelPartition {
  std::vector<LabelMap> levels;  // 0 = finest
  /// parents[l][child] = id at level l of region `child` at level l-1.
  /// parents[0] is empty.
  std::vector<std::vector<int>> parents;
  /// Set for levels whose target could not be reached (copy of level l-1).
  std::vector<bool> duplicated;

  std::size_t level_count() const { return levels.size(); }
};

/// Graph-based segmentation on the 8-neighbour grid with Gaussian
/// pre-smoothing, followed by the min-size merge. Regions that come out
/// only diagonally connected are split into 4-connected pieces; pieces below
/// min_size are merged into their closest-coloured 4-adjacent neighbour.
LabelMap felzenszwalb_segment(const RasterImage& img, double k, int min_size, double sigma = 0.8);

/// The per-level region-count targets actually used for a finest map with
/// `finest_count` regions.
std::vector<int> merge_targets(int finest_count, const MultisegConfig& cfg);

/// Greedy agglomeration on the region adjacency graph by mean Lab distance,
/// snapshotting whenever the live region count first reaches a target.
MultiLevelPartition build_hierarchy(const LabelMap& finest, const RasterImage& img,
                                    const MultisegConfig& cfg);

/// felzenszwalb_segment + build_hierarchy.
MultiLevelPartition segment_levels(const RasterImage& img, const MultisegConfig& cfg);

/// Relabels an arbitrary id grid into contiguous ids in raster order of first
/// appearance.
LabelMap compact_labels(const LabelGrid& raw);

/// Region adjacency (4-neighbour) as sorted neighbour lists.
std::vector<std::vector<int>> region_adjacency(const LabelMap& map);

}  // namespace salmap
