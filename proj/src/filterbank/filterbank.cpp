#include "salmap/filterbank.hpp"

#include <fftw3.h>

#include <array>
#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <numbers>
#include <numeric>

namespace salmap {
namespace {

constexpr int kLmSupport = 49;
constexpr int kFftThreshold = 7;  // kernels wider than this use the FFT path

void normalize_zero_mean_l1(std::vector<double>& taps) {
  const double mean = std::accumulate(taps.begin(), taps.end(), 0.0) / static_cast<double>(taps.size());
  double l1 = 0.0;
  for (double& v : taps) {
    v -= mean;
    l1 += std::abs(v);
  }
  for (double& v : taps) v /= l1;
}

double gauss1d(double sigma, double x, int order) {
  const double var = sigma * sigma;
  const double g = std::exp(-x * x / (2.0 * var)) / std::sqrt(2.0 * std::numbers::pi * var);
  switch (order) {
    case 1: return -g * x / var;
    case 2: return g * (x * x - var) / (var * var);
    default: return g;
  }
}

// Derivative of the given order taken along direction theta (sigma_across),
// smoothing along the perpendicular (sigma_along).
Kernel oriented_kernel(const std::string& name, double theta, int order) {
  constexpr double sigma_across = 1.0;
  constexpr double sigma_along = 3.0;
  Kernel k{name, kLmSupport, std::vector<double>(kLmSupport * kLmSupport)};
  const int r = kLmSupport / 2;
  const double c = std::cos(theta), s = std::sin(theta);
  for (int y = -r; y <= r; ++y)
    for (int x = -r; x <= r; ++x) {
      const double u = x * c + y * s;
      const double v = -x * s + y * c;
      k.taps[static_cast<std::size_t>((y + r) * kLmSupport + (x + r))] =
          gauss1d(sigma_across, u, order) * gauss1d(sigma_along, v, 0);
    }
  normalize_zero_mean_l1(k.taps);
  return k;
}

Kernel gaussian_kernel(const std::string& name, double sigma) {
  Kernel k{name, kLmSupport, std::vector<double>(kLmSupport * kLmSupport)};
  const int r = kLmSupport / 2;
  double sum = 0.0;
  for (int y = -r; y <= r; ++y)
    for (int x = -r; x <= r; ++x) {
      const double v = std::exp(-(x * x + y * y) / (2.0 * sigma * sigma));
      k.taps[static_cast<std::size_t>((y + r) * kLmSupport + (x + r))] = v;
      sum += v;
    }
  for (double& v : k.taps) v /= sum;
  return k;
}

Kernel log_kernel(const std::string& name, double sigma) {
  Kernel k{name, kLmSupport, std::vector<double>(kLmSupport * kLmSupport)};
  const int r = kLmSupport / 2;
  const double var = sigma * sigma;
  for (int y = -r; y <= r; ++y)
    for (int x = -r; x <= r; ++x) {
      const double r2 = x * x + y * y;
      k.taps[static_cast<std::size_t>((y + r) * kLmSupport + (x + r))] =
          (r2 - 2.0 * var) / (var * var) * std::exp(-r2 / (2.0 * var));
    }
  normalize_zero_mean_l1(k.taps);
  return k;
}

Plane correlate_direct(const Plane& img, const Kernel& k) {
  const int w = img.width(), h = img.height(), r = k.radius();
  Plane out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) acc += k.at(dx, dy) * img.clamped(x + dx, y + dy);
      out(x, y) = acc;
    }
  return out;
}

// FFTW planning is not thread-safe; execution with new-array calls is.
std::mutex& fftw_planner_mutex() {
  static std::mutex mu;
  return mu;
}

int fft_friendly(int n) {
  for (;; ++n) {
    int m = n;
    for (int p : {2, 3, 5, 7})
      while (m % p == 0) m /= p;
    if (m == 1) return n;
  }
}

struct FftPlans {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
  ~FftPlans() {
    std::lock_guard lock(fftw_planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
  }
};

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};
template <typename T>
using FftwBuffer = std::unique_ptr<T[], FftwFree>;

template <typename T>
FftwBuffer<T> fftw_buffer(std::size_t n) {
  return FftwBuffer<T>(static_cast<T*>(fftw_malloc(sizeof(T) * n)));
}

// Circular correlation on a replicate-padded canvas of at least
// (w + 2r) x (h + 2r): valid outputs never wrap.
std::vector<Plane> correlate_fft(const Plane& img, const std::vector<const Kernel*>& kernels) {
  int r = 0;
  for (const auto* k : kernels) r = std::max(r, k->radius());
  const int w = img.width(), h = img.height();
  const int nx = fft_friendly(w + 2 * r);
  const int ny = fft_friendly(h + 2 * r);
  const int ncx = nx / 2 + 1;
  const std::size_t nreal = static_cast<std::size_t>(nx) * ny;
  const std::size_t ncomplex = static_cast<std::size_t>(ncx) * ny;

  auto real = fftw_buffer<double>(nreal);
  auto img_hat = fftw_buffer<fftw_complex>(ncomplex);
  auto ker_hat = fftw_buffer<fftw_complex>(ncomplex);

  FftPlans plans;
  {
    std::lock_guard lock(fftw_planner_mutex());
    plans.forward = fftw_plan_dft_r2c_2d(ny, nx, real.get(), img_hat.get(), FFTW_ESTIMATE);
    plans.backward = fftw_plan_dft_c2r_2d(ny, nx, ker_hat.get(), real.get(), FFTW_ESTIMATE);
  }

  // Canvas pixel (x, y) holds img.clamped(x - r, y - r); the rest stays zero.
  std::fill(real.get(), real.get() + nreal, 0.0);
  for (int y = 0; y < h + 2 * r; ++y)
    for (int x = 0; x < w + 2 * r; ++x)
      real[static_cast<std::size_t>(y) * nx + x] = img.clamped(x - r, y - r);
  fftw_execute_dft_r2c(plans.forward, real.get(), img_hat.get());

  std::vector<Plane> out;
  out.reserve(kernels.size());
  const double scale = 1.0 / static_cast<double>(nreal);
  for (const auto* k : kernels) {
    // Correlation = convolution with the mirrored kernel: tap (dx, dy)
    // lands at index (-dx mod nx, -dy mod ny).
    std::fill(real.get(), real.get() + nreal, 0.0);
    const int kr = k->radius();
    for (int dy = -kr; dy <= kr; ++dy)
      for (int dx = -kr; dx <= kr; ++dx) {
        const int ix = ((-dx) % nx + nx) % nx;
        const int iy = ((-dy) % ny + ny) % ny;
        real[static_cast<std::size_t>(iy) * nx + ix] = k->at(dx, dy);
      }
    fftw_execute_dft_r2c(plans.forward, real.get(), ker_hat.get());
    for (std::size_t i = 0; i < ncomplex; ++i) {
      const double ar = img_hat[i][0], ai = img_hat[i][1];
      const double br = ker_hat[i][0], bi = ker_hat[i][1];
      ker_hat[i][0] = ar * br - ai * bi;
      ker_hat[i][1] = ar * bi + ai * br;
    }
    fftw_execute_dft_c2r(plans.backward, ker_hat.get(), real.get());
    Plane resp(w, h);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) resp(x, y) = real[static_cast<std::size_t>(y + r) * nx + (x + r)] * scale;
    out.push_back(std::move(resp));
  }
  return out;
}

}  // namespace

double Kernel::sum() const { return std::accumulate(taps.begin(), taps.end(), 0.0); }

FilterBank make_lm15() {
  FilterBank bank{BankKind::LM15, {}};
  for (int o = 0; o < 6; ++o)
    bank.kernels.push_back(oriented_kernel("edge" + std::to_string(30 * o), std::numbers::pi * o / 6.0, 1));
  for (int o = 0; o < 6; ++o)
    bank.kernels.push_back(oriented_kernel("bar" + std::to_string(30 * o), std::numbers::pi * o / 6.0, 2));
  bank.kernels.push_back(gaussian_kernel("gauss10", 10.0));
  bank.kernels.push_back(log_kernel("log10", 10.0));
  bank.kernels.push_back(log_kernel("log20", 20.0));
  return bank;
}

FilterBank make_laws14() {
  static constexpr std::array<std::array<double, 5>, 5> vecs{{
      {1, 4, 6, 4, 1},     // L5
      {-1, -2, 0, 2, 1},   // E5
      {-1, 0, 2, 0, -1},   // S5
      {-1, 2, 0, -2, 1},   // W5
      {1, -4, 6, -4, 1},   // R5
  }};
  static constexpr std::array<const char*, 5> names{"L5", "E5", "S5", "W5", "R5"};
  FilterBank bank{BankKind::Laws14, {}};
  for (std::size_t a = 0; a < 5; ++a)
    for (std::size_t b = a; b < 5; ++b) {
      if (a == 0 && b == 0) continue;
      Kernel k{std::string(names[a]) + names[b], 5, std::vector<double>(25)};
      for (std::size_t y = 0; y < 5; ++y)
        for (std::size_t x = 0; x < 5; ++x)
          k.taps[y * 5 + x] = 0.5 * (vecs[a][y] * vecs[b][x] + vecs[b][y] * vecs[a][x]);
      bank.kernels.push_back(std::move(k));
    }
  return bank;
}

Plane correlate(const Plane& img, const Kernel& k) {
  if (k.size <= kFftThreshold) return correlate_direct(img, k);
  return correlate_fft(img, {&k}).front();
}

std::vector<Plane> filter_response(const Plane& img, const FilterBank& bank) {
  std::vector<Plane> out(bank.size());
  std::vector<const Kernel*> large;
  std::vector<std::size_t> large_idx;
  for (std::size_t i = 0; i < bank.size(); ++i) {
    if (bank.kernels[i].size <= kFftThreshold) {
      out[i] = correlate_direct(img, bank.kernels[i]);
    } else {
      large.push_back(&bank.kernels[i]);
      large_idx.push_back(i);
    }
  }
  if (!large.empty()) {
    auto resp = correlate_fft(img, large);
    for (std::size_t j = 0; j < resp.size(); ++j) out[large_idx[j]] = std::move(resp[j]);
  }
  return out;
}

std::vector<Plane> filter_response(const RasterImage& img, const FilterBank& bank) {
  if (img.channels() != 1) throw Error("filter bank input must be single-channel");
  return filter_response(img.channel(0), bank);
}

LBPMap lbp_codes(const Plane& img) {
  static constexpr std::array<int, 8> dx{1, 1, 0, -1, -1, -1, 0, 1};
  static constexpr std::array<int, 8> dy{0, 1, 1, 1, 0, -1, -1, -1};
  LBPMap out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      const double c = img(x, y);
      unsigned code = 0;
      for (std::size_t i = 0; i < 8; ++i)
        if (img.clamped(x + dx[i], y + dy[i]) >= c) code |= 1u << i;
      out(x, y) = static_cast<std::uint8_t>(code);
    }
  return out;
}

Gradient prewitt(const Plane& img) {
  const int w = img.width(), h = img.height();
  Gradient g{Plane(w, h), Plane(w, h)};
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double gx = 0.0, gy = 0.0;
      for (int d = -1; d <= 1; ++d) {
        gx += img.clamped(x + 1, y + d) - img.clamped(x - 1, y + d);
        gy += img.clamped(x + d, y + 1) - img.clamped(x + d, y - 1);
      }
      g.gx(x, y) = gx;
      g.gy(x, y) = gy;
    }
  return g;
}

Plane prewitt_magnitude(const Plane& img) {
  auto g = prewitt(img);
  Plane out(img.width(), img.height());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::hypot(g.gx[i], g.gy[i]);
  return out;
}

}  // namespace salmap
