#include "salmap/synthgen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "salmap/imgcore/morphology.hpp"
#include "salmap/imgcore/parallel.hpp"
#include "salmap/imgcore/resample.hpp"
#include "salmap/io.hpp"

namespace salmap {

namespace {

using Rng = std::mt19937_64;
using Rgb = std::array<double, 3>;
constexpr double kPi = std::numbers::pi;

double uniform(Rng& rng, double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }
int uniform_int(Rng& rng, int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng); }

struct Lesion {
  double cx, cy, r0, stretch, angle;
  std::array<double, 5> amp, phase;  // harmonics 2..6

  double radius(double theta) const {
    double r = 1.0;
    for (std::size_t k = 0; k < amp.size(); ++k) r += amp[k] * std::cos(static_cast<double>(k + 2) * theta + phase[k]);
    return r0 * r;
  }

  // > 0 inside, in units of pixels along the radial direction
  double inside(double x, double y) const {
    const double dx = x - cx, dy = y - cy;
    const double c = std::cos(angle), s = std::sin(angle);
    const double u = dx * c + dy * s, v = (-dx * s + dy * c) / stretch;
    const double rho = std::hypot(u, v);
    return radius(std::atan2(v, u)) - rho;
  }
};

Lesion random_lesion(Rng& rng, const SynthSpec& spec) {
  Lesion l;
  const double w = spec.width, h = spec.height;
  const double frac = uniform(rng, spec.min_area_fraction, spec.max_area_fraction);
  l.stretch = uniform(rng, 0.65, 1.0);
  l.r0 = std::sqrt(frac * w * h / (kPi * l.stretch));
  l.angle = uniform(rng, 0.0, kPi);
  l.cx = uniform(rng, 0.3 * w, 0.7 * w);
  l.cy = uniform(rng, 0.3 * h, 0.7 * h);
  for (std::size_t k = 0; k < l.amp.size(); ++k) {
    l.amp[k] = uniform(rng, 0.0, 0.14 / static_cast<double>(k + 1));
    l.phase[k] = uniform(rng, 0.0, 2.0 * kPi);
  }
  return l;
}

int borders_touched(const BinaryMask& m) {
  const int w = m.width(), h = m.height();
  bool top = false, bottom = false, left = false, right = false;
  for (int x = 0; x < w; ++x) {
    top = top || m.test(x, 0);
    bottom = bottom || m.test(x, h - 1);
  }
  for (int y = 0; y < h; ++y) {
    left = left || m.test(0, y);
    right = right || m.test(w - 1, y);
  }
  return int(top) + int(bottom) + int(left) + int(right);
}

bool acceptable(const BinaryMask& gt, const SynthSpec& spec) {
  const double frac = static_cast<double>(gt.count()) / static_cast<double>(gt.size());
  if (frac < spec.min_area_fraction || frac > spec.max_area_fraction) return false;
  if (connected_components(gt).size() != 1) return false;
  if (fill_holes(gt).count() != gt.count()) return false;
  return borders_touched(gt) <= 2;
}

// Smooth multiplicative shading from a few low-frequency waves.
Plane shading(Rng& rng, int w, int h, double amplitude) {
  Plane p(w, h, 1.0);
  for (int k = 0; k < 3; ++k) {
    const double fx = uniform(rng, 0.5, 2.0) / w, fy = uniform(rng, 0.5, 2.0) / h;
    const double ph = uniform(rng, 0.0, 2.0 * kPi), a = amplitude * uniform(rng, 0.3, 1.0);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) p(x, y) += a * std::sin(2.0 * kPi * (fx * x + fy * y) + ph);
  }
  return p;
}

void blend_pixel(std::array<Plane, 3>& img, int x, int y, const Rgb& c, double a) {
  for (int ch = 0; ch < 3; ++ch) img[ch](x, y) = (1.0 - a) * img[ch](x, y) + a * c[ch];
}

void draw_hair(Rng& rng, std::array<Plane, 3>& img) {
  const int w = img[0].width(), h = img[0].height();
  const int strands = uniform_int(rng, 6, 14);
  for (int s = 0; s < strands; ++s) {
    const double x0 = uniform(rng, -40, w + 40), y0 = uniform(rng, -40, h + 40);
    const double len = uniform(rng, 80, 260), dir = uniform(rng, 0, 2 * kPi);
    const double x2 = x0 + len * std::cos(dir), y2 = y0 + len * std::sin(dir);
    const double bend = uniform(rng, -0.3, 0.3) * len;
    const double x1 = 0.5 * (x0 + x2) - bend * std::sin(dir), y1 = 0.5 * (y0 + y2) + bend * std::cos(dir);
    const double half = uniform(rng, 0.6, 1.3);
    const double shade = uniform(rng, 0.05, 0.2);
    const Rgb color{shade, shade * 0.8, shade * 0.7};
    const int steps = static_cast<int>(len * 2);
    for (int i = 0; i <= steps; ++i) {
      const double t = static_cast<double>(i) / steps, u = 1.0 - t;
      const double px = u * u * x0 + 2 * u * t * x1 + t * t * x2;
      const double py = u * u * y0 + 2 * u * t * y1 + t * t * y2;
      for (int y = static_cast<int>(std::floor(py - half)); y <= static_cast<int>(std::ceil(py + half)); ++y)
        for (int x = static_cast<int>(std::floor(px - half)); x <= static_cast<int>(std::ceil(px + half)); ++x) {
          if (x < 0 || y < 0 || x >= w || y >= h) continue;
          if (std::hypot(x - px, y - py) <= half) blend_pixel(img, x, y, color, 0.85);
        }
    }
  }
}

// A ring of coloured patches centred beyond one corner, like a calibration chart.
void draw_chart(Rng& rng, std::array<Plane, 3>& img) {
  static const std::array<Rgb, 6> patches{{{0.85, 0.1, 0.1}, {0.1, 0.7, 0.2}, {0.15, 0.25, 0.85},
                                           {0.95, 0.9, 0.15}, {0.97, 0.97, 0.97}, {0.05, 0.05, 0.05}}};
  const int w = img[0].width(), h = img[0].height();
  const int corner = uniform_int(rng, 0, 3);
  const double cx = (corner & 1) ? w + uniform(rng, 10, 40) : -uniform(rng, 10, 40);
  const double cy = (corner & 2) ? h + uniform(rng, 10, 40) : -uniform(rng, 10, 40);
  const double r = uniform(rng, 0.3, 0.42) * std::min(w, h) + 40.0;
  const double thick = uniform(rng, 8, 14);
  const int offset = uniform_int(rng, 0, 5);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double d = std::hypot(x - cx, y - cy);
      if (std::abs(d - r) > thick * 0.5) continue;
      const double theta = std::atan2(y - cy, x - cx) + kPi;
      const auto patch = static_cast<std::size_t>(static_cast<int>(theta / (kPi / 12.0)) + offset) % patches.size();
      blend_pixel(img, x, y, patches[patch], 1.0);
    }
}

void darken_corners(Rng& rng, std::array<Plane, 3>& img) {
  const int w = img[0].width(), h = img[0].height();
  const double half_diag = 0.5 * std::hypot(w, h);
  const double radius = uniform(rng, 0.82, 0.95) * half_diag;
  const double soft = 12.0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double d = std::hypot(x - 0.5 * (w - 1), y - 0.5 * (h - 1));
      const double t = std::clamp((d - radius) / soft, 0.0, 1.0);
      const double f = 1.0 - 0.95 * t * t * (3.0 - 2.0 * t);
      for (auto& ch : img) ch(x, y) *= f;
    }
}

}  // namespace

SynthSpec SynthSpec::all_artifacts(std::uint64_t seed, int count) {
  SynthSpec s;
  s.seed = seed;
  s.count = count;
  s.hair = s.color_chart = s.dark_corners = s.color_cast = true;
  return s;
}

std::uint64_t derive_seed(std::uint64_t seed, int index) {
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(index) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

SynthSample generate_one(const SynthSpec& spec, int index) {
  if (spec.width < 32 || spec.height < 32) throw Error("synthetic images must be at least 32x32");
  if (!(spec.min_area_fraction > 0.0 && spec.min_area_fraction <= spec.max_area_fraction && spec.max_area_fraction < 0.8))
    throw Error("invalid lesion area range");
  if (!(spec.min_red_absorption >= 0.0 && spec.min_red_absorption <= spec.max_red_absorption &&
        spec.max_red_absorption <= 1.0))
    throw Error("invalid red absorption range");
  Rng rng(derive_seed(spec.seed, index));
  const int w = spec.width, h = spec.height;

  SynthSample out;
  char id[32];
  std::snprintf(id, sizeof id, "synth_%04d", index);
  out.id = id;

  Lesion lesion{};
  for (int attempt = 0;; ++attempt) {
    if (attempt == 1000) throw Error("could not place a lesion within the area range");
    lesion = random_lesion(rng, spec);
    out.gt = BinaryMask(w, h);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) out.gt(x, y) = lesion.inside(x, y) >= 0.0;
    if (acceptable(out.gt, spec)) break;
  }

  const double skin_r = uniform(rng, 0.78, 0.93);
  const Rgb skin{skin_r, skin_r * uniform(rng, 0.7, 0.82), skin_r * uniform(rng, 0.58, 0.74)};
  const bool extreme = uniform(rng, 0.0, 1.0) < spec.extreme_fraction;
  const double contrast = extreme ? uniform(rng, spec.extreme_min_contrast, spec.extreme_max_contrast)
                                  : uniform(rng, spec.min_contrast, spec.max_contrast);
  // melanin absorbs far less red than green or blue
  const Rgb absorb{uniform(rng, spec.min_red_absorption, spec.max_red_absorption), 1.0, uniform(rng, 0.85, 1.0)};
  Rgb lesion_rgb;
  for (int c = 0; c < 3; ++c) lesion_rgb[c] = skin[c] * (1.0 - contrast * absorb[c]);

  const Plane skin_shade = shading(rng, w, h, 0.04);
  const Plane lesion_shade = shading(rng, w, h, 0.08);
  Plane alpha(w, h);
  for (std::size_t i = 0; i < alpha.size(); ++i) alpha[i] = out.gt[i];
  alpha = gaussian_blur(alpha, extreme ? uniform(rng, 3.0, 5.0) : uniform(rng, 1.0, 2.5));
  const double core = uniform(rng, 0.1, 0.25);

  std::array<Plane, 3> img{Plane(w, h), Plane(w, h), Plane(w, h)};
  std::normal_distribution<double> noise(0.0, 0.012);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double depth = std::clamp(lesion.inside(x, y) / lesion.r0, 0.0, 1.0);
      const double a = alpha(x, y);
      for (int c = 0; c < 3; ++c) {
        const double s = skin[c] * skin_shade(x, y);
        const double l = lesion_rgb[c] * lesion_shade(x, y) * (1.0 - core * depth * absorb[c]);
        img[static_cast<std::size_t>(c)](x, y) = (1.0 - a) * s + a * l + noise(rng);
      }
    }

  if (spec.hair) draw_hair(rng, img);
  if (spec.color_chart) draw_chart(rng, img);
  if (spec.dark_corners) darken_corners(rng, img);
  if (spec.color_cast) {
    // exposure follows the strongest channel, so the cast never saturates
    std::array<double, 3> gain{};
    for (double& g : gain) g = uniform(rng, 1.0 - spec.cast_strength, 1.0 + spec.cast_strength);
    const double top = *std::max_element(gain.begin(), gain.end());
    for (int c = 0; c < 3; ++c)
      for (double& v : img[static_cast<std::size_t>(c)].raw()) v *= gain[static_cast<std::size_t>(c)] / top;
  }
  for (auto& ch : img)
    for (double& v : ch.raw()) v = clamp01(v);
  out.image = RasterImage::from_planes(img);
  return out;
}

std::vector<SynthSample> generate(const SynthSpec& spec, int jobs) {
  if (spec.count < 1) throw Error("synthetic dataset needs at least one image");
  std::vector<SynthSample> out(static_cast<std::size_t>(spec.count));
  parallel_for(out.size(), jobs, [&](std::size_t i) { out[i] = generate_one(spec, static_cast<int>(i)); });
  return out;
}

void write_dataset(const std::vector<SynthSample>& samples, const std::filesystem::path& root) {
  std::filesystem::create_directories(root / "images");
  std::filesystem::create_directories(root / "masks");
  for (const auto& s : samples) {
    io::save_png(root / "images" / (s.id + ".png"), s.image);
    io::save_png(root / "masks" / (s.id + "_segmentation.png"), s.gt);
  }
}

}  // namespace salmap
