#include "salmap/preprocess.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include "salmap/imgcore/resample.hpp"
#include "salmap/io.hpp"

namespace salmap {
namespace {

struct HookRegistry {
  std::mutex mu;
  std::map<std::string, HairHook> hooks;
};

RasterImage passthrough_file(const RasterImage& img, const HookContext& ctx) {
  if (!ctx.source) throw Error("passthrough-file hook needs the source image path");
  const auto& src = *ctx.source;
  const auto sibling = src.parent_path() / (src.stem().string() + "_inpainted.png");
  RasterImage replaced = resize_bilinear(io::load_image(sibling), img.width(), img.height());
  if (ctx.gains) replaced = apply_color_constancy(replaced, *ctx.gains);
  return replaced;
}

HookRegistry& registry() {
  static HookRegistry* r = [] {
    auto* reg = new HookRegistry;
    reg->hooks["identity"] = [](const RasterImage& img, const HookContext&) { return img; };
    reg->hooks["passthrough-file"] = passthrough_file;
    return reg;
  }();
  return *r;
}

}  // namespace

GainTriple shades_of_gray_gains(const RasterImage& img, double p) {
  if (img.channels() != 3) throw Error("colour constancy needs a 3-channel image");
  if (!(p >= 1.0) || !std::isfinite(p)) throw Error("Minkowski norm degree must be >= 1");
  std::array<double, 3> e{};
  for (int c = 0; c < 3; ++c) {
    auto ch = img.channel_span(c);
    // Factor out the channel maximum so large p cannot underflow.
    double mx = 0.0;
    for (double v : ch) mx = std::max(mx, v);
    if (mx == 0.0) throw Error("degenerate channel");
    double acc = 0.0;
    for (double v : ch) acc += std::pow(v / mx, p);
    e[static_cast<std::size_t>(c)] = mx * std::pow(acc / static_cast<double>(ch.size()), 1.0 / p);
  }
  const double norm = std::sqrt(e[0] * e[0] + e[1] * e[1] + e[2] * e[2]);
  const double s3 = std::sqrt(3.0);
  return {norm / (s3 * e[0]), norm / (s3 * e[1]), norm / (s3 * e[2])};
}

RasterImage apply_color_constancy(const RasterImage& img, const GainTriple& gains) {
  if (img.channels() != 3) throw Error("colour constancy needs a 3-channel image");
  const std::array<double, 3> d{gains.r, gains.g, gains.b};
  std::vector<double> out(img.raw().size());
  const std::size_t n = img.pixel_count();
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < n; ++i) out[c * n + i] = clamp01(img.raw()[c * n + i] * d[c]);
  return RasterImage(img.width(), img.height(), 3, std::move(out));
}

RasterImage resize_to_standard(const RasterImage& img, const PreprocessConfig& cfg) {
  return resize_bilinear(img, cfg.target_width, cfg.target_height);
}

BinaryMask resize_to_standard(const BinaryMask& mask, const PreprocessConfig& cfg) {
  return resize_nearest(mask, cfg.target_width, cfg.target_height);
}

void register_hair_hook(const std::string& name, HairHook hook) {
  auto& reg = registry();
  std::lock_guard lock(reg.mu);
  reg.hooks[name] = std::move(hook);
}

bool has_hair_hook(const std::string& name) {
  auto& reg = registry();
  std::lock_guard lock(reg.mu);
  return reg.hooks.count(name) > 0;
}

std::vector<std::string> hair_hook_names() {
  auto& reg = registry();
  std::lock_guard lock(reg.mu);
  std::vector<std::string> names;
  for (const auto& [k, _] : reg.hooks) names.push_back(k);
  return names;
}

RasterImage hair_removal_hook(const RasterImage& img, const std::string& hook,
                              const HookContext& ctx) {
  HairHook fn;
  {
    auto& reg = registry();
    std::lock_guard lock(reg.mu);
    auto it = reg.hooks.find(hook);
    if (it == reg.hooks.end()) throw Error("unknown hair-removal hook: " + hook);
    fn = it->second;
  }
  RasterImage out = fn(img, ctx);
  if (out.width() != img.width() || out.height() != img.height() || out.channels() != img.channels())
    throw Error("hair-removal hook '" + hook + "' changed the image shape");
  return out;
}

PreprocessResult preprocess_image(const RasterImage& img, const PreprocessConfig& cfg,
                                  const HookContext& ctx) {
  PreprocessResult res{resize_to_standard(img, cfg), GainTriple{}};
  if (cfg.color_constancy) {
    res.gains = shades_of_gray_gains(res.image, cfg.minkowski_p);
    res.image = apply_color_constancy(res.image, res.gains);
  }
  HookContext hook_ctx = ctx;
  if (cfg.color_constancy) hook_ctx.gains = res.gains;
  res.image = hair_removal_hook(res.image, cfg.hair_hook, hook_ctx);
  return res;
}

}  // namespace salmap
