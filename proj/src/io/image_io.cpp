#include "salmap/io.hpp"

#include <cstdint>
#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <system_error>

namespace salmap::io {
namespace {

void write_atomically(const std::filesystem::path& path, const cv::Mat& mat) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.parent_path() / ("." + path.filename().string() + ".tmp.png");
  if (!cv::imwrite(tmp.string(), mat)) throw Error("cannot write " + path.string());
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error("cannot write " + path.string() + ": " + ec.message());
}

std::uint8_t to_byte(double v) { return static_cast<std::uint8_t>(clamp01(v) * 255.0 + 0.5); }

}  // namespace

RasterImage load_image(const std::filesystem::path& path) {
  cv::Mat m = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (m.empty()) throw Error("unreadable image: " + path.string());
  const int w = m.cols, h = m.rows;
  const std::size_t n = static_cast<std::size_t>(w) * h;
  std::vector<double> data(3 * n);
  for (int y = 0; y < h; ++y) {
    const auto* row = m.ptr<cv::Vec3b>(y);
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      // OpenCV stores BGR.
      data[i] = row[x][2] / 255.0;
      data[n + i] = row[x][1] / 255.0;
      data[2 * n + i] = row[x][0] / 255.0;
    }
  }
  return RasterImage(w, h, 3, std::move(data));
}

BinaryMask load_mask(const std::filesystem::path& path) {
  cv::Mat m = cv::imread(path.string(), cv::IMREAD_GRAYSCALE);
  if (m.empty()) throw Error("unreadable mask: " + path.string());
  BinaryMask out(m.cols, m.rows);
  for (int y = 0; y < m.rows; ++y) {
    const auto* row = m.ptr<std::uint8_t>(y);
    for (int x = 0; x < m.cols; ++x) out.set(x, y, row[x] > 127);
  }
  return out;
}

void save_png(const std::filesystem::path& path, const RasterImage& img) {
  if (img.channels() == 1) {
    save_png(path, img.channel(0));
    return;
  }
  cv::Mat m(img.height(), img.width(), CV_8UC3);
  for (int y = 0; y < img.height(); ++y) {
    auto* row = m.ptr<cv::Vec3b>(y);
    for (int x = 0; x < img.width(); ++x)
      row[x] = cv::Vec3b(to_byte(img.at(x, y, 2)), to_byte(img.at(x, y, 1)), to_byte(img.at(x, y, 0)));
  }
  write_atomically(path, m);
}

void save_png(const std::filesystem::path& path, const BinaryMask& mask) {
  cv::Mat m(mask.height(), mask.width(), CV_8UC1);
  for (int y = 0; y < mask.height(); ++y) {
    auto* row = m.ptr<std::uint8_t>(y);
    for (int x = 0; x < mask.width(); ++x) row[x] = mask.test(x, y) ? 255 : 0;
  }
  write_atomically(path, m);
}

void save_png(const std::filesystem::path& path, const Plane& unit_plane) {
  cv::Mat m(unit_plane.height(), unit_plane.width(), CV_8UC1);
  for (int y = 0; y < unit_plane.height(); ++y) {
    auto* row = m.ptr<std::uint8_t>(y);
    for (int x = 0; x < unit_plane.width(); ++x) row[x] = to_byte(unit_plane(x, y));
  }
  write_atomically(path, m);
}

void save_label_png(const std::filesystem::path& path, const LabelGrid& labels) {
  cv::Mat m(labels.height(), labels.width(), CV_8UC3);
  for (int y = 0; y < labels.height(); ++y) {
    auto* row = m.ptr<cv::Vec3b>(y);
    for (int x = 0; x < labels.width(); ++x) {
      auto h = static_cast<std::uint32_t>(labels(x, y)) * 2654435761u;
      row[x] = cv::Vec3b(static_cast<std::uint8_t>(h >> 8), static_cast<std::uint8_t>(h >> 16),
                         static_cast<std::uint8_t>(h >> 24));
    }
  }
  write_atomically(path, m);
}

}  // namespace salmap::io
