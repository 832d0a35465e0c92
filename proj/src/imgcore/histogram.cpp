#include "salmap/imgcore/histogram.hpp"

#include <algorithm>
#include <cmath>

#include "salmap/imgcore/color.hpp"

namespace salmap {

GrayHistogram make_histogram(std::span<const double> values) {
  GrayHistogram h;
  for (double v : values) ++h.bins[static_cast<std::size_t>(GrayHistogram::bin_of(v))];
  h.total = values.size();
  return h;
}

double entropy_bits(const GrayHistogram& h) {
  if (h.total == 0) return 0.0;
  double e = 0.0;
  const double n = static_cast<double>(h.total);
  for (auto c : h.bins) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    e -= p * std::log2(p);
  }
  return e;
}

std::vector<double> channel_entropy(const RasterImage& img) {
  std::vector<double> out;
  if (img.channels() == 1) {
    out.push_back(entropy_bits(make_histogram(img.channel_span(0))));
    return out;
  }
  for (int c = 0; c < 3; ++c) out.push_back(entropy_bits(make_histogram(img.channel_span(c))));
  out.push_back(entropy_bits(make_histogram(to_gray(img).channel_span(0))));
  return out;
}

double otsu_threshold(std::span<const double> values) {
  if (values.empty()) return 0.0;
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (hi <= lo) return hi;
  constexpr int kBins = 256;
  std::array<double, kBins> hist{};
  const double scale = (kBins - 1) / (hi - lo);
  for (double v : values) hist[static_cast<std::size_t>(std::lround((v - lo) * scale))] += 1.0;

  const double total = static_cast<double>(values.size());
  double sum_all = 0.0;
  for (int i = 0; i < kBins; ++i) sum_all += i * hist[static_cast<std::size_t>(i)];

  double w0 = 0.0, sum0 = 0.0, best = -1.0;
  int best_bin = 0;
  for (int t = 0; t < kBins - 1; ++t) {
    w0 += hist[static_cast<std::size_t>(t)];
    sum0 += t * hist[static_cast<std::size_t>(t)];
    const double w1 = total - w0;
    if (w0 == 0.0 || w1 == 0.0) continue;
    const double m0 = sum0 / w0;
    const double m1 = (sum_all - sum0) / w1;
    const double between = w0 * w1 * (m0 - m1) * (m0 - m1);
    if (between > best) {
      best = between;
      best_bin = t;
    }
  }
  // Upper edge of the winning bin.
  return lo + (best_bin + 0.5) / scale;
}

}  // namespace salmap
