#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "salmap/forest.hpp"
#include "salmap/multiseg.hpp"
#include "salmap/preprocess.hpp"
#include "salmap/regionfeat.hpp"

namespace salmap {

struct SaliencyConfig {
  PreprocessConfig preprocess;
  MultisegConfig multiseg;
  RegionFeatConfig regionfeat;
  ForestConfig forest;
  double positive_overlap = 0.8;  // label 1 at or above
  double negative_overlap = 0.2;  // label 0 at or below
  int jobs = 1;
};

/// Per-region training labels: 1, 0, or -1 (excluded).
using RegionLabels = std::vector<std::vector<std::int8_t>>;

RegionLabels label_regions(const MultiLevelPartition& partition, const BinaryMask& gt,
                           double positive_overlap = 0.8, double negative_overlap = 0.2);

/// One value per region painted over the level's label map.
Plane paint_regions(const LabelMap& map, std::span<const double> scores);

struct FusionFit {
  std::vector<double> weights;
  double mse = 0.0;       // mean squared residual per pixel
  std::size_t rank = 0;   // numerical rank of the normal matrix
};

/// Minimal-norm least squares over every pixel of every image:
/// argmin_w sum_p (sum_l w_l S_l(p) - gt(p))^2.
FusionFit fit_fusion(const std::vector<std::vector<Plane>>& level_maps, const std::vector<BinaryMask>& gts);

/// clamp(sum_l w_l S_l, 0, 1).
Plane fuse_levels(const std::vector<Plane>& level_maps, std::span<const double> weights);

struct TrainingInfo {
  std::size_t images = 0;
  std::size_t samples = 0;
  std::size_t excluded = 0;
  double fusion_mse = 0.0;
  double oob_mse = 0.0;
  std::string created;  // ISO-8601 UTC
};

struct SaliencyModel {
  ForestModel forest;
  std::vector<double> fusion_weights;
  SaliencyConfig config;
  TrainingInfo info;
};

struct TrainingSample {
  std::string id;
  RasterImage image;  // as loaded, any size
  BinaryMask gt;      // same size as image
  std::optional<std::filesystem::path> source;
};

/// Optional progress callback: (stage, done, total).
using Progress = std::function<void(const std::string&, std::size_t, std::size_t)>;

SaliencyModel train_saliency(const std::vector<TrainingSample>& set, const SaliencyConfig& cfg,
                             const Progress& progress = {});

struct SaliencyResult {
  RasterImage processed;           // preprocessed input at the standard size
  GainTriple gains;
  MultiLevelPartition partition;
  PseudoBackground background;
  CircleMaps circles;
  std::vector<Plane> level_maps;
  Plane saliency;                  // fused, [0,1]
};

SaliencyResult predict_saliency(const SaliencyModel& model, const RasterImage& img,
                                const HookContext& ctx = {});

/// Forest scores for every region of every level.
std::vector<std::vector<double>> score_regions(const ForestModel& forest,
                                               const std::vector<std::vector<RegionDescriptor>>& desc);

}  // namespace salmap
