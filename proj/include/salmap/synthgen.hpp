#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "salmap/imgcore/raster.hpp"

namespace salmap {

struct SynthSpec {
  std::uint64_t seed = 1;
  int count = 1;
  int width = 400;
  int height = 300;
  double min_area_fraction = 0.05;
  double max_area_fraction = 0.4;
  double min_contrast = 0.45;  // relative darkening of the lesion in green
  double max_contrast = 0.75;
  double extreme_fraction = 0.5;  // share of low-contrast, fuzzy-edged lesions
  double extreme_min_contrast = 0.3;
  double extreme_max_contrast = 0.42;
  double min_red_absorption = 0.3;  // red darkening relative to green
  double max_red_absorption = 0.55;
  bool hair = false;
  bool color_chart = false;
  bool dark_corners = false;
  bool color_cast = false;
  double cast_strength = 0.5;   // per-channel gains from [1 - s, 1 + s], divided by the largest

  static SynthSpec all_artifacts(std::uint64_t seed, int count);
};

struct SynthSample {
  std::string id;  // synth_0000, ...
  RasterImage image;
  BinaryMask gt;
};

/// Seed for image `index`; images are independent of each other.
std::uint64_t derive_seed(std::uint64_t seed, int index);

SynthSample generate_one(const SynthSpec& spec, int index);
std::vector<SynthSample> generate(const SynthSpec& spec, int jobs = 1);

/// Writes images/<id>.png and masks/<id>_segmentation.png under `root`.
void write_dataset(const std::vector<SynthSample>& samples, const std::filesystem::path& root);

}  // namespace salmap
