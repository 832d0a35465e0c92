#include "salmap/imgcore/resample.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace salmap {
namespace {

struct Tap {
  int i0, i1;
  double w1;
};

std::vector<Tap> bilinear_taps(int src_len, int dst_len) {
  std::vector<Tap> taps(static_cast<std::size_t>(dst_len));
  const double scale = double(src_len) / dst_len;
  for (int d = 0; d < dst_len; ++d) {
    double s = (d + 0.5) * scale - 0.5;
    s = std::clamp(s, 0.0, double(src_len - 1));
    const int i0 = static_cast<int>(std::floor(s));
    const int i1 = std::min(i0 + 1, src_len - 1);
    taps[static_cast<std::size_t>(d)] = {i0, i1, s - i0};
  }
  return taps;
}

template <typename G>
G nearest(const G& src, int width, int height) {
  G out(width, height);
  for (int y = 0; y < height; ++y) {
    const int sy = std::min(src.height() - 1,
                            static_cast<int>(std::floor((y + 0.5) * src.height() / double(height))));
    for (int x = 0; x < width; ++x) {
      const int sx = std::min(src.width() - 1,
                              static_cast<int>(std::floor((x + 0.5) * src.width() / double(width))));
      out(x, y) = src(sx, sy);
    }
  }
  return out;
}

}  // namespace

Plane resize_bilinear(const Plane& src, int width, int height) {
  if (width <= 0 || height <= 0) throw Error("resize target must be positive");
  if (src.same_shape(width, height)) return src;
  const auto tx = bilinear_taps(src.width(), width);
  const auto ty = bilinear_taps(src.height(), height);
  Plane out(width, height);
  for (int y = 0; y < height; ++y) {
    const Tap& v = ty[static_cast<std::size_t>(y)];
    for (int x = 0; x < width; ++x) {
      const Tap& u = tx[static_cast<std::size_t>(x)];
      const double top = src(u.i0, v.i0) * (1 - u.w1) + src(u.i1, v.i0) * u.w1;
      const double bot = src(u.i0, v.i1) * (1 - u.w1) + src(u.i1, v.i1) * u.w1;
      out(x, y) = top * (1 - v.w1) + bot * v.w1;
    }
  }
  return out;
}

RasterImage resize_bilinear(const RasterImage& src, int width, int height) {
  if (src.width() == width && src.height() == height) return src;
  std::vector<Plane> planes;
  for (int c = 0; c < src.channels(); ++c)
    planes.push_back(resize_bilinear(src.channel(c), width, height));
  return RasterImage::from_planes(planes);
}

BinaryMask resize_nearest(const BinaryMask& src, int width, int height) {
  if (src.same_shape(width, height)) return src;
  return nearest(src, width, height);
}

LabelGrid resize_nearest(const LabelGrid& src, int width, int height) {
  if (src.same_shape(width, height)) return src;
  return nearest(src, width, height);
}

Plane gaussian_blur(const Plane& src, double sigma) {
  if (sigma <= 0.0) return src;
  const int r = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * r + 1));
  double sum = 0.0;
  for (int i = -r; i <= r; ++i) {
    k[static_cast<std::size_t>(i + r)] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += k[static_cast<std::size_t>(i + r)];
  }
  for (double& v : k) v /= sum;

  const int w = src.width(), h = src.height();
  Plane tmp(w, h), out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += k[static_cast<std::size_t>(i + r)] * src.clamped(x + i, y);
      tmp(x, y) = acc;
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += k[static_cast<std::size_t>(i + r)] * tmp.clamped(x, y + i);
      out(x, y) = acc;
    }
  return out;
}

}  // namespace salmap
