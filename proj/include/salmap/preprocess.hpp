#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "salmap/imgcore/raster.hpp"

namespace salmap {

/// Per-channel multiplicative gains of the Shades-of-Gray correction.
struct GainTriple {
  double r = 1.0;
  double g = 1.0;
  double b = 1.0;
};

struct PreprocessConfig {
  int target_height = 300;  // rows
  int target_width = 400;   // columns
  double minkowski_p = 6.0;
  bool color_constancy = true;
  std::string hair_hook = "identity";
};

/// Illuminant estimate via per-channel Minkowski p-means, normalized to unit
/// length; gains d_c = 1 / (sqrt(3) e_c). Throws "degenerate channel" when a
/// channel is identically zero.
GainTriple shades_of_gray_gains(const RasterImage& img, double p);

/// Multiplies each channel by its gain and clamps to [0,1].
RasterImage apply_color_constancy(const RasterImage& img, const GainTriple& gains);

/// Bilinear resize to target_height x target_width.
RasterImage resize_to_standard(const RasterImage& img, const PreprocessConfig& cfg);
/// Nearest-neighbour resize for ground-truth masks.
BinaryMask resize_to_standard(const BinaryMask& mask, const PreprocessConfig& cfg);

/// What a hair-removal hook may know about the image it is given.
struct HookContext {
  std::optional<std::filesystem::path> source;  // original file, if any
  std::optional<GainTriple> gains;              // colour correction already applied
};

using HairHook = std::function<RasterImage(const RasterImage&, const HookContext&)>;

/// Registers (or replaces) a named hook. "identity" and "passthrough-file"
/// are registered by default.
void register_hair_hook(const std::string& name, HairHook hook);
bool has_hair_hook(const std::string& name);
std::vector<std::string> hair_hook_names();

/// Runs a registered hook; unknown names throw. "passthrough-file" reads
/// `<dir>/<stem>_inpainted.png` next to ctx.source, resized to the input
/// shape and with ctx.gains re-applied when present.
RasterImage hair_removal_hook(const RasterImage& img, const std::string& hook,
                              const HookContext& ctx = {});

struct PreprocessResult {
  RasterImage image;
  GainTriple gains;  // (1,1,1) when colour constancy is off
};

/// resize -> colour constancy -> hair hook.
PreprocessResult preprocess_image(const RasterImage& img, const PreprocessConfig& cfg,
                                  const HookContext& ctx = {});

}  // namespace salmap
