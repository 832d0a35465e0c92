#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace salmap {

/// Library-wide error type. Messages are meant to be shown to a user as-is.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense row-major 2-D array. The workhorse behind masks, label maps and
/// real-valued planes.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, T fill = T{})
      : width_(width), height_(height),
        data_(static_cast<std::size_t>(checked_area(width, height)), fill) {}
  Grid(int width, int height, std::vector<T> data)
      : width_(width), height_(height), data_(std::move(data)) {
    if (data_.size() != static_cast<std::size_t>(checked_area(width, height)))
      throw Error("grid data length does not match dimensions");
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator()(int x, int y) { return data_[index(x, y)]; }
  const T& operator()(int x, int y) const { return data_[index(x, y)]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }
  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

  /// Replicate-padded read.
  const T& clamped(int x, int y) const {
    x = x < 0 ? 0 : (x >= width_ ? width_ - 1 : x);
    y = y < 0 ? 0 : (y >= height_ ? height_ - 1 : y);
    return data_[index(x, y)];
  }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }
  std::vector<T>& raw() { return data_; }
  const std::vector<T>& raw() const { return data_; }

  bool same_shape(int w, int h) const { return w == width_ && h == height_; }
  template <typename U>
  bool same_shape(const Grid<U>& other) const {
    return other.width() == width_ && other.height() == height_;
  }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.width_ == b.width_ && a.height_ == b.height_ && a.data_ == b.data_;
  }

 private:
  static long long checked_area(int width, int height) {
    if (width < 0 || height < 0) throw Error("negative grid dimensions");
    return static_cast<long long>(width) * height;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

/// Single real-valued plane (filter responses, saliency maps, level-set fields).
using Plane = Grid<double>;
/// Signed-distance field; negative inside the mask.
using LevelSetField = Grid<double>;
/// Per-pixel integer labels.
using LabelGrid = Grid<std::int32_t>;

/// Boolean mask stored as bytes holding 0 or 1.
class BinaryMask : public Grid<std::uint8_t> {
 public:
  using Grid<std::uint8_t>::Grid;
  BinaryMask() = default;
  explicit BinaryMask(Grid<std::uint8_t> g) : Grid<std::uint8_t>(std::move(g)) {}

  bool test(int x, int y) const { return (*this)(x, y) != 0; }
  void set(int x, int y, bool v = true) { (*this)(x, y) = v ? 1 : 0; }
  std::size_t count() const;
  bool any() const { return count() > 0; }
  bool all() const { return count() == size(); }
  BinaryMask complement() const;
};

BinaryMask operator&(const BinaryMask& a, const BinaryMask& b);
BinaryMask operator|(const BinaryMask& a, const BinaryMask& b);
/// a AND NOT b
BinaryMask mask_minus(const BinaryMask& a, const BinaryMask& b);
BinaryMask threshold(const Plane& p, double level);  // p >= level

/// Multi-channel image with every intensity in [0,1]. Storage is planar:
/// channel c occupies data[c*w*h .. (c+1)*w*h).
class RasterImage {
 public:
  RasterImage() = default;
  RasterImage(int width, int height, int channels, double fill = 0.0);
  /// Validates the [0,1] invariant and the length.
  RasterImage(int width, int height, int channels, std::vector<double> data);

  static RasterImage from_planes(std::span<const Plane> planes);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }

  double at(int x, int y, int c) const { return data_[offset(x, y, c)]; }
  /// Writes are clamped to [0,1] so the invariant cannot be broken.
  void set(int x, int y, int c, double v);

  std::span<const double> channel_span(int c) const;
  Plane channel(int c) const;
  void set_channel(int c, const Plane& p);  // clamps

  const std::vector<double>& raw() const { return data_; }

  friend bool operator==(const RasterImage& a, const RasterImage& b) = default;

 private:
  std::size_t offset(int x, int y, int c) const {
    return static_cast<std::size_t>(c) * pixel_count() +
           static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

inline double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

}  // namespace salmap
