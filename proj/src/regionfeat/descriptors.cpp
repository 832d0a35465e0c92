#include <algorithm>
#include <cmath>
#include <limits>

#include "salmap/imgcore/color.hpp"
#include "salmap/regionfeat.hpp"

namespace salmap {

std::array<double, kDescriptorDims> RegionDescriptor::flat() const {
  std::array<double, kDescriptorDims> v{};
  auto it = std::copy(contrast.begin(), contrast.end(), v.begin());
  it = std::copy(property.begin(), property.end(), it);
  std::copy(background.begin(), background.end(), it);
  return v;
}

namespace {

constexpr std::size_t kLM = 15, kLaws = 14;

std::uint16_t quantize(double v, int bins) {
  const int b = static_cast<int>(v * bins);
  return static_cast<std::uint16_t>(std::clamp(b, 0, bins - 1));
}

}  // namespace

FeaturePlanes compute_planes(const RasterImage& img, const CircleMaps& circles, const RegionFeatConfig& cfg) {
  if (img.channels() != 3) throw Error("region features need a 3-channel image");
  FeaturePlanes p;
  const RasterImage lab = convert_color(img, ColorSpace::Lab);
  const RasterImage hsv = convert_color(img, ColorSpace::HSV);
  for (int c = 0; c < 3; ++c) {
    p.rgb[static_cast<std::size_t>(c)] = img.channel(c);
    p.lab[static_cast<std::size_t>(c)] = lab.channel(c);
    p.hsv[static_cast<std::size_t>(c)] = hsv.channel(c);
  }
  p.gray = to_gray(img).channel(0);
  p.lm = filter_response(p.gray, make_lm15());
  p.laws = filter_response(p.gray, make_laws14());
  p.lm_max = Plane(img.width(), img.height());
  for (std::size_t i = 0; i < p.lm_max.size(); ++i) {
    double m = 0.0;
    for (const auto& r : p.lm) m = std::max(m, std::abs(r[i]));
    p.lm_max[i] = m;
  }
  const LBPMap codes = lbp_codes(p.gray);
  p.lbp = Plane(img.width(), img.height());
  const std::size_t n = p.gray.size();
  p.lab_bin.resize(n);
  p.hue_bin.resize(n);
  p.sat_bin.resize(n);
  p.lbp_bin.resize(n);
  const int lb = cfg.lab_bins;
  for (std::size_t i = 0; i < n; ++i) {
    p.lbp[i] = codes[i];
    p.lbp_bin[i] = codes[i];
    p.lab_bin[i] = static_cast<std::uint16_t>((quantize(p.lab[0][i], lb) * lb + quantize(p.lab[1][i], lb)) * lb +
                                              quantize(p.lab[2][i], lb));
    p.hue_bin[i] = quantize(p.hsv[0][i], cfg.hue_bins);
    p.sat_bin[i] = quantize(p.hsv[1][i], cfg.sat_bins);
  }
  if (!circles.probability_map.same_shape(p.gray)) throw Error("circle maps do not match the image");
  p.circle_prob = circles.probability_map;
  return p;
}

FeaturePlanes compute_planes(const RasterImage& img, const RegionFeatConfig& cfg) {
  return compute_planes(img, detect_circles(img, cfg), cfg);
}

namespace {

// Column layout of one additive accumulator row.
struct Layout {
  std::size_t count = 0, sx, sy, sxx, syy, sxy;
  std::size_t rgb, rgb2, lab, lab2, hsv, hsv2;
  std::size_t lm_abs, lm, lm2, lm_max, lbp, lbp2, laws, circ;
  std::size_t h_lab, h_hue, h_sat, h_lbp, contrast_end;
  std::size_t xh, yh, width;
  int lab_n, hue_n, sat_n;

  Layout(int w, int h, const RegionFeatConfig& cfg) {
    std::size_t at = 1;
    auto take = [&](std::size_t n) {
      const std::size_t o = at;
      at += n;
      return o;
    };
    sx = take(1), sy = take(1), sxx = take(1), syy = take(1), sxy = take(1);
    rgb = take(3), rgb2 = take(3), lab = take(3), lab2 = take(3), hsv = take(3), hsv2 = take(3);
    lm_abs = take(kLM), lm = take(kLM), lm2 = take(kLM), lm_max = take(1);
    lbp = take(1), lbp2 = take(1), laws = take(kLaws), circ = take(1);
    lab_n = cfg.lab_bins * cfg.lab_bins * cfg.lab_bins;
    hue_n = cfg.hue_bins;
    sat_n = cfg.sat_bins;
    h_lab = take(static_cast<std::size_t>(lab_n));
    h_hue = take(static_cast<std::size_t>(hue_n));
    h_sat = take(static_cast<std::size_t>(sat_n));
    h_lbp = take(256);
    contrast_end = at;
    xh = take(static_cast<std::size_t>(w));
    yh = take(static_cast<std::size_t>(h));
    width = at;
  }
};

class Table {
 public:
  Table(std::size_t rows, std::size_t cols) : cols_(cols), data_(rows * cols, 0.0) {}
  double* row(std::size_t r) { return data_.data() + r * cols_; }
  const double* row(std::size_t r) const { return data_.data() + r * cols_; }

 private:
  std::size_t cols_;
  std::vector<double> data_;
};

void add_pixel(double* a, const Layout& L, const FeaturePlanes& p, std::size_t i, int x, int y, bool positions) {
  a[L.count] += 1.0;
  a[L.sx] += x;
  a[L.sy] += y;
  a[L.sxx] += double(x) * x;
  a[L.syy] += double(y) * y;
  a[L.sxy] += double(x) * y;
  for (std::size_t c = 0; c < 3; ++c) {
    const double r = p.rgb[c][i], l = p.lab[c][i], s = p.hsv[c][i];
    a[L.rgb + c] += r;
    a[L.rgb2 + c] += r * r;
    a[L.lab + c] += l;
    a[L.lab2 + c] += l * l;
    a[L.hsv + c] += s;
    a[L.hsv2 + c] += s * s;
  }
  for (std::size_t k = 0; k < kLM; ++k) {
    const double v = p.lm[k][i];
    a[L.lm_abs + k] += std::abs(v);
    a[L.lm + k] += v;
    a[L.lm2 + k] += v * v;
  }
  a[L.lm_max] += p.lm_max[i];
  a[L.lbp] += p.lbp[i];
  a[L.lbp2] += p.lbp[i] * p.lbp[i];
  for (std::size_t k = 0; k < kLaws; ++k) a[L.laws + k] += std::abs(p.laws[k][i]);
  a[L.circ] += p.circle_prob[i];
  a[L.h_lab + p.lab_bin[i]] += 1.0;
  a[L.h_hue + p.hue_bin[i]] += 1.0;
  a[L.h_sat + p.sat_bin[i]] += 1.0;
  a[L.h_lbp + p.lbp_bin[i]] += 1.0;
  if (positions) {
    a[L.xh + static_cast<std::size_t>(x)] += 1.0;
    a[L.yh + static_cast<std::size_t>(y)] += 1.0;
  }
}

double chi_square(const double* a, const double* b, std::size_t n, double na, double nb) {
  double chi = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = a[i] / na, v = b[i] / nb;
    const double s = u + v;
    if (s > 0.0) chi += 2.0 * (u - v) * (u - v) / s;
  }
  return chi;
}

std::array<double, kContrastDims> contrast(const double* r, const double* o, const Layout& L) {
  std::array<double, kContrastDims> out{};
  const double nr = r[L.count], no = o[L.count];
  std::size_t k = 0;
  auto mean_diff = [&](std::size_t off, std::size_t n) {
    for (std::size_t c = 0; c < n; ++c) out[k++] = std::abs(r[off + c] / nr - o[off + c] / no);
  };
  mean_diff(L.rgb, 3);
  mean_diff(L.lab, 3);
  mean_diff(L.hsv, 3);
  mean_diff(L.lm_abs, kLM);
  mean_diff(L.lm_max, 1);
  out[k++] = chi_square(r + L.h_lab, o + L.h_lab, static_cast<std::size_t>(L.lab_n), nr, no);
  out[k++] = chi_square(r + L.h_hue, o + L.h_hue, static_cast<std::size_t>(L.hue_n), nr, no);
  out[k++] = chi_square(r + L.h_sat, o + L.h_sat, static_cast<std::size_t>(L.sat_n), nr, no);
  out[k++] = chi_square(r + L.h_lbp, o + L.h_lbp, 256, nr, no);
  return out;
}

// Nearest-rank percentile from a position histogram.
double percentile(const double* hist, std::size_t n, double count, double p) {
  const double rank = std::max(1.0, std::ceil(p * count));
  double cum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    cum += hist[i];
    if (cum >= rank) return static_cast<double>(i);
  }
  return static_cast<double>(n - 1);
}

std::pair<double, double> span_of(const double* hist, std::size_t n) {
  std::size_t lo = n, hi = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (hist[i] > 0.0) {
      lo = std::min(lo, i);
      hi = i;
    }
  return {static_cast<double>(lo), static_cast<double>(hi)};
}

double variance(const double* a, std::size_t sum, std::size_t sq, std::size_t c, double n) {
  const double m = a[sum + c] / n;
  return std::max(0.0, a[sq + c] / n - m * m);
}

// Per-row x extremes of every region, as pixel-corner points.
std::vector<std::vector<Point2d>> corner_hulls(const LabelMap& m) {
  const auto n = static_cast<std::size_t>(m.region_count);
  std::vector<std::vector<Point2d>> pts(n);
  std::vector<int> lo(n), hi(n);
  for (int y = 0; y < m.height(); ++y) {
    std::fill(lo.begin(), lo.end(), std::numeric_limits<int>::max());
    std::fill(hi.begin(), hi.end(), -1);
    for (int x = 0; x < m.width(); ++x) {
      const auto r = static_cast<std::size_t>(m.labels(x, y));
      lo[r] = std::min(lo[r], x);
      hi[r] = std::max(hi[r], x);
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (hi[r] < 0) continue;
      pts[r].push_back({double(lo[r]), double(y)});
      pts[r].push_back({double(lo[r]), double(y + 1)});
      pts[r].push_back({double(hi[r] + 1), double(y)});
      pts[r].push_back({double(hi[r] + 1), double(y + 1)});
    }
  }
  for (auto& p : pts) p = convex_hull(std::move(p));
  return pts;
}

std::vector<double> perimeters(const LabelMap& m) {
  std::vector<double> per(static_cast<std::size_t>(m.region_count), 0.0);
  const int w = m.width(), h = m.height();
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const int r = m.labels(x, y);
      const bool edge = x == 0 || y == 0 || x == w - 1 || y == h - 1 || m.labels(x - 1, y) != r ||
                        m.labels(x + 1, y) != r || m.labels(x, y - 1) != r || m.labels(x, y + 1) != r;
      if (edge) per[static_cast<std::size_t>(r)] += 1.0;
    }
  return per;
}

}  // namespace

std::vector<std::vector<RegionDescriptor>> describe_regions(const MultiLevelPartition& partition,
                                                            const FeaturePlanes& planes,
                                                            const PseudoBackground& background,
                                                            const RegionFeatConfig& cfg) {
  if (partition.levels.empty()) throw Error("empty partition");
  const LabelMap& finest = partition.levels.front();
  const int w = finest.width(), h = finest.height();
  if (!planes.gray.same_shape(finest.labels) || !background.strip_mask.same_shape(finest.labels))
    throw Error("feature planes, background and partition differ in shape");
  if (!background.strip_mask.any()) throw Error("empty pseudo-background strip");
  const Layout L(w, h, cfg);
  const double img_area = static_cast<double>(w) * h;
  const double frame = 2.0 * (w + h);
  const std::size_t levels = partition.level_count();

  Table strip(1, L.width);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const std::size_t i = finest.labels.index(x, y);
      if (background.strip_mask[i]) add_pixel(strip.row(0), L, planes, i, x, y, false);
    }

  std::vector<std::vector<RegionDescriptor>> result(levels);
  Table acc(static_cast<std::size_t>(finest.region_count), L.width);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const std::size_t i = finest.labels.index(x, y);
      add_pixel(acc.row(static_cast<std::size_t>(finest.labels[i])), L, planes, i, x, y, true);
    }
  std::vector<std::vector<Point2d>> hulls = corner_hulls(finest);

  for (std::size_t l = 0; l < levels; ++l) {
    const LabelMap& map = partition.levels[l];
    const auto n = static_cast<std::size_t>(map.region_count);
    if (l > 0) {
      const auto& up = partition.parents[l];
      Table next(n, L.width);
      std::vector<std::vector<Point2d>> merged(n);
      for (std::size_t c = 0; c < up.size(); ++c) {
        const auto p = static_cast<std::size_t>(up[c]);
        double* dst = next.row(p);
        const double* src = acc.row(c);
        for (std::size_t k = 0; k < L.width; ++k) dst[k] += src[k];
        merged[p].insert(merged[p].end(), hulls[c].begin(), hulls[c].end());
      }
      for (auto& m : merged) m = convex_hull(std::move(m));
      acc = std::move(next);
      hulls = std::move(merged);
    }
    const auto adj = region_adjacency(map);
    const auto per = perimeters(map);
    const double level_feature = levels > 1 ? static_cast<double>(l) / static_cast<double>(levels - 1) : 0.0;

    auto& out = result[l];
    out.resize(n);
    Table nbr(1, L.contrast_end);
    for (std::size_t r = 0; r < n; ++r) {
      RegionDescriptor& d = out[r];
      d.region_id = static_cast<int>(r);
      d.level_index = static_cast<int>(l);
      const double* a = acc.row(r);
      const double cnt = a[L.count];

      double* nb = nbr.row(0);
      std::fill(nb, nb + L.contrast_end, 0.0);
      for (int q : adj[r]) {
        const double* b = acc.row(static_cast<std::size_t>(q));
        for (std::size_t k = 0; k < L.contrast_end; ++k) nb[k] += b[k];
      }
      if (adj[r].empty())
        d.isolated = true;
      else
        d.contrast = contrast(a, nb, L);
      d.background = contrast(a, strip.row(0), L);

      auto& pr = d.property;
      std::size_t k = 0;
      pr[k++] = a[L.sx] / cnt / w;
      pr[k++] = a[L.sy] / cnt / h;
      pr[k++] = percentile(a + L.xh, static_cast<std::size_t>(w), cnt, 0.1) / w;
      pr[k++] = percentile(a + L.xh, static_cast<std::size_t>(w), cnt, 0.9) / w;
      pr[k++] = percentile(a + L.yh, static_cast<std::size_t>(h), cnt, 0.1) / h;
      pr[k++] = percentile(a + L.yh, static_cast<std::size_t>(h), cnt, 0.9) / h;
      pr[k++] = cnt / img_area;
      pr[k++] = per[r] / frame;
      pr[k++] = nb[L.count] / img_area;
      const auto [x0, x1] = span_of(a + L.xh, static_cast<std::size_t>(w));
      const auto [y0, y1] = span_of(a + L.yh, static_cast<std::size_t>(h));
      pr[k++] = (x1 - x0 + 1.0) / (y1 - y0 + 1.0);
      for (std::size_t c = 0; c < 3; ++c) pr[k++] = variance(a, L.rgb, L.rgb2, c, cnt);
      for (std::size_t c = 0; c < 3; ++c) pr[k++] = variance(a, L.lab, L.lab2, c, cnt);
      for (std::size_t c = 0; c < 3; ++c) pr[k++] = variance(a, L.hsv, L.hsv2, c, cnt);
      for (std::size_t c = 0; c < kLM; ++c) pr[k++] = variance(a, L.lm, L.lm2, c, cnt);
      pr[k++] = variance(a, L.lbp, L.lbp2, 0, cnt);
      for (std::size_t c = 0; c < 3; ++c) pr[k++] = a[L.rgb + c] / cnt;
      pr[k++] = a[L.lab + 1] / cnt;
      pr[k++] = a[L.lab + 2] / cnt;

      RegionStats st;
      st.area = static_cast<std::size_t>(cnt);
      st.centroid = {a[L.sx] / cnt, a[L.sy] / cnt};
      st.mu20 = a[L.sxx] / cnt - st.centroid.x * st.centroid.x + 1.0 / 12.0;
      st.mu02 = a[L.syy] / cnt - st.centroid.y * st.centroid.y + 1.0 / 12.0;
      st.mu11 = a[L.sxy] / cnt - st.centroid.x * st.centroid.y;
      st.perimeter = static_cast<std::size_t>(per[r]);
      st.hull = hulls[r];
      pr[k++] = elongation(st);
      pr[k++] = extent(st);
      pr[k++] = a[L.circ] / cnt;
      for (std::size_t c = 0; c < kLaws; ++c) pr[k++] = a[L.laws + c] / cnt;
      pr[k++] = level_feature;
    }
  }
  return result;
}

std::vector<std::vector<RegionDescriptor>> describe_image(const MultiLevelPartition& partition,
                                                          const RasterImage& img,
                                                          const RegionFeatConfig& cfg) {
  return describe_regions(partition, compute_planes(img, cfg), extract_pseudo_background(img, cfg), cfg);
}

}  // namespace salmap
