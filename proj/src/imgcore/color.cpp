#include "salmap/imgcore/color.hpp"

#include <algorithm>
#include <cmath>

namespace salmap {
namespace {

// D65 reference white, Y normalized to 1.
constexpr double kXn = 0.95047;
constexpr double kYn = 1.0;
constexpr double kZn = 1.08883;

double srgb_to_linear(double c) {
  return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

double linear_to_srgb(double c) {
  return c <= 0.0031308 ? 12.92 * c : 1.055 * std::pow(c, 1.0 / 2.4) - 0.055;
}

double lab_f(double t) {
  constexpr double delta = 6.0 / 29.0;
  return t > delta * delta * delta ? std::cbrt(t) : t / (3.0 * delta * delta) + 4.0 / 29.0;
}

double lab_f_inv(double t) {
  constexpr double delta = 6.0 / 29.0;
  return t > delta ? t * t * t : 3.0 * delta * delta * (t - 4.0 / 29.0);
}

void require_rgb(const RasterImage& img) {
  if (img.channels() != 3) throw Error("color conversion needs a 3-channel image");
}

}  // namespace

RasterImage to_gray(const RasterImage& img) {
  if (img.channels() == 1) throw Error("already gray");
  auto r = img.channel_span(0);
  auto g = img.channel_span(1);
  auto b = img.channel_span(2);
  std::vector<double> out(img.pixel_count());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = clamp01(0.299 * r[i] + 0.587 * g[i] + 0.114 * b[i]);
  return RasterImage(img.width(), img.height(), 1, std::move(out));
}

std::array<double, 3> srgb_to_lab_pixel(double r, double g, double b) {
  const double rl = srgb_to_linear(r);
  const double gl = srgb_to_linear(g);
  const double bl = srgb_to_linear(b);
  const double x = 0.4124564 * rl + 0.3575761 * gl + 0.1804375 * bl;
  const double y = 0.2126729 * rl + 0.7151522 * gl + 0.0721750 * bl;
  const double z = 0.0193339 * rl + 0.1191920 * gl + 0.9503041 * bl;
  const double fx = lab_f(x / kXn);
  const double fy = lab_f(y / kYn);
  const double fz = lab_f(z / kZn);
  return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

std::array<double, 3> lab_to_srgb_pixel(double L, double a, double b) {
  const double fy = (L + 16.0) / 116.0;
  const double fx = fy + a / 500.0;
  const double fz = fy - b / 200.0;
  const double x = kXn * lab_f_inv(fx);
  const double y = kYn * lab_f_inv(fy);
  const double z = kZn * lab_f_inv(fz);
  const double rl = 3.2404542 * x - 1.5371385 * y - 0.4985314 * z;
  const double gl = -0.9692660 * x + 1.8760108 * y + 0.0415560 * z;
  const double bl = 0.0556434 * x - 0.2040259 * y + 1.0572252 * z;
  return {clamp01(linear_to_srgb(rl)), clamp01(linear_to_srgb(gl)), clamp01(linear_to_srgb(bl))};
}

std::array<double, 3> srgb_to_hsv_pixel(double r, double g, double b) {
  const double mx = std::max({r, g, b});
  const double mn = std::min({r, g, b});
  const double d = mx - mn;
  double h = 0.0;
  if (d > 0.0) {
    if (mx == r)
      h = std::fmod((g - b) / d, 6.0);
    else if (mx == g)
      h = (b - r) / d + 2.0;
    else
      h = (r - g) / d + 4.0;
    h /= 6.0;
    if (h < 0.0) h += 1.0;
  }
  const double s = mx > 0.0 ? d / mx : 0.0;
  return {clamp01(h), clamp01(s), clamp01(mx)};
}

std::array<double, 3> normalize_lab(const std::array<double, 3>& lab) {
  return {clamp01(lab[0] / 100.0), clamp01((lab[1] + 128.0) / 255.0),
          clamp01((lab[2] + 128.0) / 255.0)};
}

std::array<double, 3> denormalize_lab(const std::array<double, 3>& lab01) {
  return {lab01[0] * 100.0, lab01[1] * 255.0 - 128.0, lab01[2] * 255.0 - 128.0};
}

RasterImage convert_color(const RasterImage& img, ColorSpace target) {
  require_rgb(img);
  const std::size_t n = img.pixel_count();
  auto r = img.channel_span(0);
  auto g = img.channel_span(1);
  auto b = img.channel_span(2);
  std::vector<double> out(3 * n);
  for (std::size_t i = 0; i < n; ++i) {
    std::array<double, 3> v = target == ColorSpace::Lab
                                  ? normalize_lab(srgb_to_lab_pixel(r[i], g[i], b[i]))
                                  : srgb_to_hsv_pixel(r[i], g[i], b[i]);
    out[i] = v[0];
    out[n + i] = v[1];
    out[2 * n + i] = v[2];
  }
  return RasterImage(img.width(), img.height(), 3, std::move(out));
}

RasterImage lab_to_srgb(const RasterImage& lab) {
  require_rgb(lab);
  const std::size_t n = lab.pixel_count();
  auto c0 = lab.channel_span(0);
  auto c1 = lab.channel_span(1);
  auto c2 = lab.channel_span(2);
  std::vector<double> out(3 * n);
  for (std::size_t i = 0; i < n; ++i) {
    auto raw = denormalize_lab({c0[i], c1[i], c2[i]});
    auto rgb = lab_to_srgb_pixel(raw[0], raw[1], raw[2]);
    out[i] = rgb[0];
    out[n + i] = rgb[1];
    out[2 * n + i] = rgb[2];
  }
  return RasterImage(lab.width(), lab.height(), 3, std::move(out));
}

}  // namespace salmap
