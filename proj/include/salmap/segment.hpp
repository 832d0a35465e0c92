#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "salmap/imgcore/raster.hpp"
#include "salmap/multiseg.hpp"

namespace salmap {

/// Objects below mean - k * stddev (sample) of the 8-connected object areas
/// are dropped. A single object is always kept.
BinaryMask filter_small_objects(const BinaryMask& mask, double k = 2.0);

/// Threshold (>= level), area filter, then the filled convex hull of what
/// survives. Throws "no salient object" when nothing reaches the threshold.
BinaryMask initial_mask(const Plane& saliency, double level = 0.5);

/// Pixels of the finest region with the highest mean saliency (lowest id on ties).
BinaryMask most_salient_region(const Plane& saliency, const LabelMap& regions);

struct ChannelChoice {
  Plane channel;
  int index = 0;  // 0..2 = R, G, B; 3 = gray
};

/// Highest 256-bin entropy among R, G, B and gray, first wins on ties.
/// Single-channel input returns that channel as gray.
ChannelChoice select_evolution_channel(const RasterImage& img);

struct DrlseParams {
  double mu = 0.04;
  double lambda = 5.0;
  double alpha = 1.5;   // > 0 shrinks the contour
  double epsilon = 1.5;
  double dt = 5.0;
  int iters = 200;
  double sigma = 1.5;   // edge map smoothing
  double c0 = 2.0;      // initial phi clipped to [-c0, c0]; <= 0 keeps the full distance
};

/// Edge indicator 1 / (1 + |grad(G_sigma * I)|^2) with I on a 0..255 scale.
Plane edge_indicator(const Plane& channel, double sigma);

/// Called with (iterations done, phi) after every `every` iterations.
struct DrlseObserver {
  int every = 0;
  std::function<void(int, const LevelSetField&)> fn;
};

/// Distance-regularized level set evolution started from signed_distance(init)
/// (double-well potential).
/// Throws on a degenerate init or mu * dt >= 0.25. `phi_out` receives the
/// final level set when given.
BinaryMask drlse_evolve(const BinaryMask& init, const Plane& channel, const DrlseParams& params,
                        LevelSetField* phi_out = nullptr, const DrlseObserver& observer = {});

/// Open then close (disk), fill holes, keep the largest component. An empty
/// result returns the input unchanged and sets *warned.
BinaryMask final_cleanup(const BinaryMask& mask, int radius = 5, bool* warned = nullptr);

struct SegmentConfig {
  double threshold = 0.5;
  DrlseParams drlse;
  int cleanup_radius = 5;
  int snapshot_every = 0;  // keep phi every n iterations (0 = none)
};

struct SegmentationResult {
  BinaryMask initial;
  BinaryMask evolved;
  BinaryMask final_mask;
  int channel = 0;
  bool fallback = false;          // nothing reached the threshold
  bool evolution_skipped = false; // initial mask was degenerate (e.g. full frame)
  bool cleanup_warning = false;
  std::vector<std::pair<int, LevelSetField>> snapshots;
};

SegmentationResult segment_from_saliency(const Plane& saliency, const RasterImage& processed,
                                         const LabelMap& finest, const SegmentConfig& cfg = {});

}  // namespace salmap
