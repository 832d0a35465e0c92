#include "salmap/imgcore/raster.hpp"

#include <algorithm>
#include <cmath>

namespace salmap {

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(std::count_if(raw().begin(), raw().end(),
                                                [](std::uint8_t v) { return v != 0; }));
}

BinaryMask BinaryMask::complement() const {
  BinaryMask out(width(), height());
  for (std::size_t i = 0; i < size(); ++i) out[i] = (*this)[i] ? 0 : 1;
  return out;
}

namespace {
void require_same(const BinaryMask& a, const BinaryMask& b) {
  if (!a.same_shape(b)) throw Error("mask dimensions differ");
}
}  // namespace

BinaryMask operator&(const BinaryMask& a, const BinaryMask& b) {
  require_same(a, b);
  BinaryMask out(a.width(), a.height());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = (a[i] && b[i]) ? 1 : 0;
  return out;
}

BinaryMask operator|(const BinaryMask& a, const BinaryMask& b) {
  require_same(a, b);
  BinaryMask out(a.width(), a.height());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = (a[i] || b[i]) ? 1 : 0;
  return out;
}

BinaryMask mask_minus(const BinaryMask& a, const BinaryMask& b) {
  require_same(a, b);
  BinaryMask out(a.width(), a.height());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = (a[i] && !b[i]) ? 1 : 0;
  return out;
}

BinaryMask threshold(const Plane& p, double level) {
  BinaryMask out(p.width(), p.height());
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = p[i] >= level ? 1 : 0;
  return out;
}

RasterImage::RasterImage(int width, int height, int channels, double fill)
    : width_(width), height_(height), channels_(channels) {
  if (width < 0 || height < 0) throw Error("negative image dimensions");
  if (channels != 1 && channels != 3) throw Error("images must have 1 or 3 channels");
  data_.assign(pixel_count() * static_cast<std::size_t>(channels), clamp01(fill));
}

RasterImage::RasterImage(int width, int height, int channels, std::vector<double> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
  if (width < 0 || height < 0) throw Error("negative image dimensions");
  if (channels != 1 && channels != 3) throw Error("images must have 1 or 3 channels");
  if (data_.size() != pixel_count() * static_cast<std::size_t>(channels))
    throw Error("image data length does not match width x height x channels");
  for (double v : data_)
    if (!(v >= 0.0 && v <= 1.0)) throw Error("image intensity outside [0,1]");
}

RasterImage RasterImage::from_planes(std::span<const Plane> planes) {
  if (planes.empty()) throw Error("no planes given");
  const int w = planes[0].width();
  const int h = planes[0].height();
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(w) * h * planes.size());
  for (const auto& p : planes) {
    if (!p.same_shape(w, h)) throw Error("plane dimensions differ");
    for (double v : p.values()) data.push_back(clamp01(v));
  }
  return RasterImage(w, h, static_cast<int>(planes.size()), std::move(data));
}

void RasterImage::set(int x, int y, int c, double v) { data_[offset(x, y, c)] = clamp01(v); }

std::span<const double> RasterImage::channel_span(int c) const {
  if (c < 0 || c >= channels_) throw Error("channel index out of range");
  return std::span<const double>(data_).subspan(static_cast<std::size_t>(c) * pixel_count(),
                                                pixel_count());
}

Plane RasterImage::channel(int c) const {
  auto s = channel_span(c);
  return Plane(width_, height_, std::vector<double>(s.begin(), s.end()));
}

void RasterImage::set_channel(int c, const Plane& p) {
  if (c < 0 || c >= channels_) throw Error("channel index out of range");
  if (!p.same_shape(width_, height_)) throw Error("plane dimensions differ from image");
  std::copy(p.values().begin(), p.values().end(),
            data_.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(c) * pixel_count()));
  auto first = data_.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(c) * pixel_count());
  std::transform(first, first + static_cast<std::ptrdiff_t>(pixel_count()), first, clamp01);
}

}  // namespace salmap
