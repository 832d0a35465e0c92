#include "salmap/segment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "salmap/imgcore/color.hpp"
#include "salmap/imgcore/distance.hpp"
#include "salmap/imgcore/geometry.hpp"
#include "salmap/imgcore/histogram.hpp"
#include "salmap/imgcore/morphology.hpp"
#include "salmap/imgcore/resample.hpp"

namespace salmap {

BinaryMask filter_small_objects(const BinaryMask& mask, double k) {
  const auto comps = connected_components(mask);
  if (comps.size() < 2) return mask;
  double mean = 0.0;
  for (const auto& c : comps) mean += static_cast<double>(c.area);
  mean /= static_cast<double>(comps.size());
  double var = 0.0;
  for (const auto& c : comps) var += (static_cast<double>(c.area) - mean) * (static_cast<double>(c.area) - mean);
  const double sd = std::sqrt(var / static_cast<double>(comps.size() - 1));
  const double cutoff = mean - k * sd;
  BinaryMask out(mask.width(), mask.height());
  for (const auto& c : comps)
    if (static_cast<double>(c.area) >= cutoff)
      for (auto i : c.pixels) out[i] = 1;
  return out;
}

BinaryMask initial_mask(const Plane& saliency, double level) {
  const BinaryMask thr = threshold(saliency, level);
  if (!thr.any()) throw Error("no salient object");
  return convex_hull_mask(filter_small_objects(thr));
}

BinaryMask most_salient_region(const Plane& saliency, const LabelMap& regions) {
  if (!saliency.same_shape(regions.labels)) throw Error("saliency and regions differ in shape");
  const auto n = static_cast<std::size_t>(regions.region_count);
  std::vector<double> sum(n, 0.0);
  std::vector<std::size_t> area(n, 0);
  for (std::size_t i = 0; i < saliency.size(); ++i) {
    const auto r = static_cast<std::size_t>(regions.labels[i]);
    sum[r] += saliency[i];
    ++area[r];
  }
  std::size_t best = 0;
  double best_mean = -1.0;
  for (std::size_t r = 0; r < n; ++r) {
    if (area[r] == 0) continue;
    const double m = sum[r] / static_cast<double>(area[r]);
    if (m > best_mean) {
      best_mean = m;
      best = r;
    }
  }
  BinaryMask out(saliency.width(), saliency.height());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = regions.labels[i] == static_cast<std::int32_t>(best);
  return out;
}

ChannelChoice select_evolution_channel(const RasterImage& img) {
  if (img.channels() == 1) return {img.channel(0), 3};
  const auto h = channel_entropy(img);
  int best = 0;
  for (int i = 1; i < 4; ++i)
    if (h[static_cast<std::size_t>(i)] > h[static_cast<std::size_t>(best)]) best = i;
  if (best == 3) return {to_gray(img).channel(0), 3};
  return {img.channel(best), best};
}

namespace {

// Central differences inside, one-sided at the border.
void gradient(const Plane& f, Plane& gx, Plane& gy) {
  const int w = f.width(), h = f.height();
  gx = Plane(w, h);
  gy = Plane(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (w > 1) {
        if (x == 0)
          gx(x, y) = f(1, y) - f(0, y);
        else if (x == w - 1)
          gx(x, y) = f(x, y) - f(x - 1, y);
        else
          gx(x, y) = 0.5 * (f(x + 1, y) - f(x - 1, y));
      }
      if (h > 1) {
        if (y == 0)
          gy(x, y) = f(x, 1) - f(x, 0);
        else if (y == h - 1)
          gy(x, y) = f(x, y) - f(x, y - 1);
        else
          gy(x, y) = 0.5 * (f(x, y + 1) - f(x, y - 1));
      }
    }
}

Plane divergence(const Plane& fx, const Plane& fy) {
  Plane dxx, dxy, dyx, dyy;
  gradient(fx, dxx, dxy);
  gradient(fy, dyx, dyy);
  Plane out(fx.width(), fx.height());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = dxx[i] + dyy[i];
  return out;
}

// 5-point Laplacian with replicated borders.
Plane laplacian(const Plane& f) {
  Plane out(f.width(), f.height());
  for (int y = 0; y < f.height(); ++y)
    for (int x = 0; x < f.width(); ++x)
      out(x, y) = f.clamped(x + 1, y) + f.clamped(x - 1, y) + f.clamped(x, y + 1) + f.clamped(x, y - 1) - 4.0 * f(x, y);
  return out;
}

// Mirror the frame from two pixels inside (zero normal derivative).
void neumann(Plane& f) {
  const int w = f.width(), h = f.height();
  if (w < 5 || h < 5) return;
  for (int y = 0; y < h; ++y) {
    f(0, y) = f(2, y);
    f(w - 1, y) = f(w - 3, y);
  }
  for (int x = 0; x < w; ++x) {
    f(x, 0) = f(x, 2);
    f(x, h - 1) = f(x, h - 3);
  }
}

double dirac(double x, double eps) {
  if (std::abs(x) > eps) return 0.0;
  return (1.0 + std::cos(std::numbers::pi * x / eps)) / (2.0 * eps);
}

// Double-well distance regularization: div(dp(|grad phi|) grad phi).
Plane dist_reg(const Plane& phi) {
  Plane px, py;
  gradient(phi, px, py);
  Plane fx(phi.width(), phi.height()), fy(phi.width(), phi.height());
  for (std::size_t i = 0; i < phi.size(); ++i) {
    const double s = std::hypot(px[i], py[i]);
    double ps = 0.0;
    if (s <= 1.0)
      ps = std::sin(2.0 * std::numbers::pi * s) / (2.0 * std::numbers::pi);
    else
      ps = s - 1.0;
    const double dps = (ps != 0.0 ? ps : 1.0) / (s != 0.0 ? s : 1.0);
    fx[i] = dps * px[i] - px[i];
    fy[i] = dps * py[i] - py[i];
  }
  Plane div = divergence(fx, fy);
  const Plane lap = laplacian(phi);
  for (std::size_t i = 0; i < div.size(); ++i) div[i] += lap[i];
  return div;
}

}  // namespace

Plane edge_indicator(const Plane& channel, double sigma) {
  Plane scaled = channel;
  for (double& v : scaled.raw()) v *= 255.0;
  const Plane smooth = sigma > 0.0 ? gaussian_blur(scaled, sigma) : scaled;
  Plane gx, gy;
  gradient(smooth, gx, gy);
  Plane g(channel.width(), channel.height());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = 1.0 / (1.0 + gx[i] * gx[i] + gy[i] * gy[i]);
  return g;
}

BinaryMask drlse_evolve(const BinaryMask& init, const Plane& channel, const DrlseParams& p, LevelSetField* phi_out,
                        const DrlseObserver& observer) {
  if (!init.same_shape(channel)) throw Error("initial mask and channel differ in shape");
  if (!(p.mu * p.dt < 0.25)) throw Error("unstable DRLSE parameters: mu * dt must be below 0.25");
  if (p.iters < 0) throw Error("iteration count must be non-negative");
  LevelSetField phi = signed_distance(init);  // throws "degenerate mask"
  if (p.c0 > 0.0)
    for (double& v : phi.raw()) v = std::clamp(v, -p.c0, p.c0);
  if (p.iters > 0) {
    const Plane g = edge_indicator(channel, p.sigma);
    Plane vx, vy;
    gradient(g, vx, vy);
    Plane px, py;
    for (int it = 0; it < p.iters; ++it) {
      neumann(phi);
      gradient(phi, px, py);
      Plane nx(phi.width(), phi.height()), ny(phi.width(), phi.height());
      for (std::size_t i = 0; i < phi.size(); ++i) {
        const double s = std::hypot(px[i], py[i]) + 1e-10;
        nx[i] = px[i] / s;
        ny[i] = py[i] / s;
      }
      const Plane curv = divergence(nx, ny);
      const Plane reg = dist_reg(phi);
      for (std::size_t i = 0; i < phi.size(); ++i) {
        const double d = dirac(phi[i], p.epsilon);
        const double area = d * g[i];
        const double edge = d * (vx[i] * nx[i] + vy[i] * ny[i]) + d * g[i] * curv[i];
        phi[i] += p.dt * (p.mu * reg[i] + p.lambda * edge + p.alpha * area);
      }
      if (observer.fn && observer.every > 0 && (it + 1) % observer.every == 0) observer.fn(it + 1, phi);
    }
    neumann(phi);
  }
  BinaryMask out(init.width(), init.height());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = phi[i] < 0.0;
  if (phi_out) *phi_out = std::move(phi);
  return out;
}

BinaryMask final_cleanup(const BinaryMask& mask, int radius, bool* warned) {
  // replicate-padded so objects touching the frame keep their frame edge
  const int pad = std::max(radius, 0) + 1;
  const int w = mask.width(), h = mask.height();
  BinaryMask big(w + 2 * pad, h + 2 * pad);
  for (int y = 0; y < big.height(); ++y)
    for (int x = 0; x < big.width(); ++x) big(x, y) = mask.clamped(x - pad, y - pad);
  const auto se = StructuringElement::disk(radius);
  big = close(open(big, se), se);
  BinaryMask m(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) m(x, y) = big(x + pad, y + pad);
  m = fill_holes(m);
  m = largest_component(m);
  if (warned) *warned = !m.any();
  return m.any() ? m : mask;
}

SegmentationResult segment_from_saliency(const Plane& saliency, const RasterImage& processed, const LabelMap& finest,
                                         const SegmentConfig& cfg) {
  if (!saliency.same_shape(processed.width(), processed.height())) throw Error("saliency and image differ in shape");
  SegmentationResult r;
  if (threshold(saliency, cfg.threshold).any()) {
    r.initial = initial_mask(saliency, cfg.threshold);
  } else {
    r.fallback = true;
    r.initial = convex_hull_mask(most_salient_region(saliency, finest));
  }
  const ChannelChoice ch = select_evolution_channel(processed);
  r.channel = ch.index;
  if (r.initial.all()) {
    r.evolution_skipped = true;
    r.evolved = r.initial;
  } else {
    DrlseObserver obs;
    if (cfg.snapshot_every > 0) {
      obs.every = cfg.snapshot_every;
      obs.fn = [&r](int it, const LevelSetField& phi) { r.snapshots.emplace_back(it, phi); };
    }
    r.evolved = drlse_evolve(r.initial, ch.channel, cfg.drlse, nullptr, obs);
    if (!r.evolved.any()) r.evolved = r.initial;  // contour collapsed
  }
  r.final_mask = final_cleanup(r.evolved, cfg.cleanup_radius, &r.cleanup_warning);
  return r;
}

}  // namespace salmap
