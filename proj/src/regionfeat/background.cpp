#include <algorithm>
#include <vector>

#include "salmap/imgcore/color.hpp"
#include "salmap/imgcore/histogram.hpp"
#include "salmap/imgcore/morphology.hpp"
#include "salmap/regionfeat.hpp"

namespace salmap {
namespace {

std::vector<double> moving_average(const GrayHistogram& h, int window) {
  // centred window, averaged over the bins that exist
  const int half = std::max(0, window / 2);
  std::vector<double> out(256, 0.0);
  for (int b = 0; b < 256; ++b) {
    double acc = 0.0;
    int used = 0;
    for (int k = std::max(0, b - half); k <= std::min(255, b + half); ++k, ++used)
      acc += static_cast<double>(h.bins[static_cast<std::size_t>(k)]);
    out[static_cast<std::size_t>(b)] = acc / used;
  }
  return out;
}

// Topographic prominence of the plateau [lo, hi]; the histogram is zero
// outside its range.
double prominence(const std::vector<double>& v, int lo, int hi) {
  const int n = static_cast<int>(v.size());
  const double top = v[static_cast<std::size_t>(lo)];
  double left_min = top, right_min = top;
  int k = lo - 1;
  for (; k >= 0 && v[static_cast<std::size_t>(k)] <= top; --k) left_min = std::min(left_min, v[static_cast<std::size_t>(k)]);
  if (k < 0) left_min = 0.0;
  k = hi + 1;
  for (; k < n && v[static_cast<std::size_t>(k)] <= top; ++k) right_min = std::min(right_min, v[static_cast<std::size_t>(k)]);
  if (k >= n) right_min = 0.0;
  return top - std::max(left_min, right_min);
}

// Highest-intensity local maximum (plateaus count once, at their midpoint)
// whose prominence reaches min_prominence; -1 when none does.
int last_peak(const std::vector<double>& v, double min_prominence) {
  const int n = static_cast<int>(v.size());
  int best = -1;
  int b = 0;
  while (b < n) {
    int e = b;
    while (e + 1 < n && v[static_cast<std::size_t>(e + 1)] == v[static_cast<std::size_t>(b)]) ++e;
    const double val = v[static_cast<std::size_t>(b)];
    const bool left_ok = b == 0 || v[static_cast<std::size_t>(b - 1)] < val;
    const bool right_ok = e == n - 1 || v[static_cast<std::size_t>(e + 1)] < val;
    if (val > 0.0 && left_ok && right_ok && prominence(v, b, e) >= min_prominence) best = (b + e) / 2;
    b = e + 1;
  }
  return best;
}

BinaryMask border_ring(int w, int h, int width) {
  BinaryMask ring(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (x < width || y < width || x >= w - width || y >= h - width) ring(x, y) = 1;
  return ring;
}

}  // namespace

PseudoBackground extract_pseudo_background(const RasterImage& img, const RegionFeatConfig& cfg) {
  if (img.channels() != 3) throw Error("pseudo-background needs a 3-channel image");
  const int w = img.width(), h = img.height();
  const Plane gray = to_gray(img).channel(0);
  const GrayHistogram hist = make_histogram(gray.values());
  const auto smooth = moving_average(hist, cfg.histogram_smoothing);

  PseudoBackground out{BinaryMask(w, h), BinaryMask(w, h), 0.0, false};
  const int peak = last_peak(smooth, cfg.peak_prominence * static_cast<double>(hist.total));
  if (peak >= 0) {
    out.background_threshold = cfg.threshold_factor * GrayHistogram::intensity_of(peak);
    BinaryMask obj = threshold(gray, out.background_threshold);
    obj = fill_holes(obj);
    obj = remove_small(obj, cfg.min_object_area);
    obj = close(obj, StructuringElement::disk(cfg.close_radius));
    out.object = obj;
    if (obj.any()) out.strip_mask = mask_minus(obj, erode(obj, StructuringElement::disk(cfg.strip_width)));
  }
  if (!out.strip_mask.any()) {
    out.fallback = true;
    out.strip_mask = border_ring(w, h, cfg.strip_width);
  }
  return out;
}

}  // namespace salmap
