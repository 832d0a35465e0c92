#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "salmap/imgcore/color.hpp"
#include "salmap/imgcore/distance.hpp"
#include "salmap/imgcore/morphology.hpp"
#include "salmap/segment.hpp"

namespace salmap {
namespace {

BinaryMask disk(int w, int h, double cx, double cy, double r) {
  BinaryMask m(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) m(x, y) = std::hypot(x - cx, y - cy) <= r;
  return m;
}

void paint_square(BinaryMask& m, int x0, int y0, int side) {
  for (int y = y0; y < y0 + side; ++y)
    for (int x = x0; x < x0 + side; ++x) m(x, y) = 1;
}

std::size_t sym_diff(const BinaryMask& a, const BinaryMask& b) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) n += (a[i] != 0) != (b[i] != 0);
  return n;
}

bool is_boundary(const BinaryMask& m, int x, int y) {
  if (!m.test(x, y)) return false;
  const int dx[] = {1, -1, 0, 0}, dy[] = {0, 0, 1, -1};
  for (int k = 0; k < 4; ++k) {
    const int nx = x + dx[k], ny = y + dy[k];
    if (nx < 0 || ny < 0 || nx >= m.width() || ny >= m.height() || !m.test(nx, ny)) return true;
  }
  return false;
}

TEST(InitialMask, ConstantSaliencyGivesFullFrame) {
  Plane s(40, 30, 0.6);
  EXPECT_TRUE(initial_mask(s).all());
}

TEST(InitialMask, ThresholdIsInclusiveHalf) {
  Plane s(40, 30, 0.0);
  s(10, 10) = 0.5;
  s(11, 10) = 0.4999;
  const auto m = initial_mask(s);
  EXPECT_EQ(m.count(), 1u);
  EXPECT_TRUE(m.test(10, 10));
}

TEST(InitialMask, EmptyThrows) {
  Plane s(40, 30, 0.49);
  EXPECT_THROW(initial_mask(s), Error);
}

TEST(InitialMask, ElevenObjectsDropTheTinyOne) {
  // ten squares of 500 px are not possible; use 20x25 rectangles
  BinaryMask m(400, 300);
  int placed = 0;
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 5; ++c, ++placed)
      for (int y = 20 + r * 60; y < 45 + r * 60; ++y)
        for (int x = 20 + c * 60; x < 40 + c * 60; ++x) m(x, y) = 1;
  ASSERT_EQ(placed, 10);
  // tiny object of 10 px
  for (int x = 300; x < 305; ++x)
    for (int y = 250; y < 252; ++y) m(x, y) = 1;

  // oracle: mean 455.45, sample sd 147.7, cutoff about 160
  std::vector<double> areas(10, 500.0);
  areas.push_back(10.0);
  double mean = 0.0;
  for (double a : areas) mean += a;
  mean /= 11.0;
  double var = 0.0;
  for (double a : areas) var += (a - mean) * (a - mean);
  const double sd = std::sqrt(var / 10.0);
  EXPECT_NEAR(mean, 455.5, 0.1);
  EXPECT_NEAR(sd, 147.7, 0.1);
  EXPECT_NEAR(mean - 2 * sd, 160.0, 0.5);

  const auto kept = filter_small_objects(m);
  EXPECT_EQ(kept.count(), 5000u);
  EXPECT_FALSE(kept.test(302, 250));

  Plane s(400, 300);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = m[i] ? 0.9 : 0.1;
  const auto init = initial_mask(s);
  EXPECT_FALSE(init.test(302, 250));  // hull of survivors does not reach it
  for (std::size_t i = 0; i < kept.size(); ++i)
    if (kept[i]) ASSERT_TRUE(init[i]);
}

TEST(InitialMask, SingleObjectKept) {
  BinaryMask m(50, 50);
  paint_square(m, 5, 5, 3);
  EXPECT_EQ(filter_small_objects(m).count(), 9u);
}

TEST(InitialMask, OutputIsConvex) {
  BinaryMask m(100, 80);
  paint_square(m, 10, 10, 20);
  paint_square(m, 60, 40, 20);
  Plane s(100, 80);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = m[i] ? 1.0 : 0.0;
  const auto h = initial_mask(s);
  // every horizontal and vertical run is contiguous
  for (int y = 0; y < h.height(); ++y) {
    int transitions = 0;
    for (int x = 1; x < h.width(); ++x) transitions += h.test(x, y) != h.test(x - 1, y);
    EXPECT_LE(transitions, 2);
  }
  EXPECT_TRUE(h.test(45, 35));  // between the squares
}

TEST(MostSalientRegion, PicksHighestMean) {
  LabelGrid g(10, 4);
  Plane s(10, 4);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 10; ++x) {
      g(x, y) = x < 3 ? 0 : (x < 6 ? 1 : 2);
      s(x, y) = x < 3 ? 0.2 : (x < 6 ? 0.45 : 0.3);
    }
  const auto m = most_salient_region(s, compact_labels(g));
  EXPECT_EQ(m.count(), 12u);
  EXPECT_TRUE(m.test(4, 2));
}

TEST(EvolutionChannel, HighestEntropyWins) {
  RasterImage img(256, 64, 3);
  std::mt19937 rng(3);
  std::vector<int> levels(256 * 64);
  for (std::size_t i = 0; i < levels.size(); ++i) levels[i] = static_cast<int>(i % 256);
  std::shuffle(levels.begin(), levels.end(), rng);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 256; ++x) {
      img.set(x, y, 0, 0.5);
      img.set(x, y, 1, (x + y) % 2 ? 1.0 : 0.0);
      img.set(x, y, 2, levels[static_cast<std::size_t>(y * 256 + x)] / 255.0);
    }
  EXPECT_EQ(select_evolution_channel(img).index, 2);
}

TEST(EvolutionChannel, TiesGoToRed) {
  RasterImage img(32, 32, 3);
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x)
      for (int c = 0; c < 3; ++c) img.set(x, y, c, (x * 8) / 255.0);
  const auto ch = select_evolution_channel(img);
  EXPECT_EQ(ch.index, 0);
  EXPECT_EQ(ch.channel, img.channel(0));
}

TEST(EvolutionChannel, GrayscaleInput) {
  RasterImage img(8, 8, 1, 0.3);
  EXPECT_EQ(select_evolution_channel(img).index, 3);
}

TEST(Drlse, ZeroIterationsIsIdentity) {
  const auto m = disk(80, 60, 40, 30, 15);
  Plane ch(80, 60, 0.5);
  DrlseParams p;
  p.iters = 0;
  EXPECT_EQ(drlse_evolve(m, ch, p), m);
}

TEST(Drlse, RejectsUnstableAndDegenerate) {
  const auto m = disk(40, 40, 20, 20, 8);
  Plane ch(40, 40, 0.5);
  DrlseParams p;
  p.mu = 0.05;  // mu * dt = 0.25
  EXPECT_THROW(drlse_evolve(m, ch, p), Error);
  EXPECT_THROW(drlse_evolve(BinaryMask(40, 40), ch, DrlseParams{}), Error);
  BinaryMask full(40, 40);
  for (auto& v : full.raw()) v = 1;
  EXPECT_THROW(drlse_evolve(full, ch, DrlseParams{}), Error);
}

class ShrinkOntoDisk : public ::testing::Test {
 protected:
  static constexpr int W = 200, H = 200;
  static constexpr double C = 100.0, R = 30.0;

  void SetUp() override {
    channel = Plane(W, H);
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) channel(x, y) = std::hypot(x - C, y - C) <= R ? 0.2 : 0.8;
    mask = drlse_evolve(disk(W, H, C, C, 50), channel, DrlseParams{}, &phi);
  }

  Plane channel;
  BinaryMask mask;
  LevelSetField phi;
};

TEST_F(ShrinkOntoDisk, HausdorffWithinThreePixels) {
  ASSERT_TRUE(mask.any());
  std::vector<std::pair<int, int>> boundary;
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x)
      if (is_boundary(mask, x, y)) boundary.emplace_back(x, y);
  double forward = 0.0;
  for (auto [x, y] : boundary) forward = std::max(forward, std::abs(std::hypot(x - C, y - C) - R));
  double backward = 0.0;
  for (int k = 0; k < 360; ++k) {
    const double t = k * std::numbers::pi / 180.0;
    const double px = C + R * std::cos(t), py = C + R * std::sin(t);
    double best = 1e9;
    for (auto [x, y] : boundary) best = std::min(best, std::hypot(x - px, y - py));
    backward = std::max(backward, best);
  }
  EXPECT_LE(std::max(forward, backward), 3.0);
}

// Pixels within c0 of the final contour; beyond that the double-well
// potential lets phi flatten by design.
TEST_F(ShrinkOntoDisk, SignedDistancePreservedNearZeroSet) {
  const LevelSetField dist = signed_distance(mask);
  double sum = 0.0;
  std::size_t n = 0;
  for (int y = 1; y < H - 1; ++y)
    for (int x = 1; x < W - 1; ++x) {
      if (std::abs(dist(x, y)) > 2.0) continue;
      const double gx = 0.5 * (phi(x + 1, y) - phi(x - 1, y));
      const double gy = 0.5 * (phi(x, y + 1) - phi(x, y - 1));
      sum += std::abs(std::hypot(gx, gy) - 1.0);
      ++n;
    }
  ASSERT_GT(n, 0u);
  EXPECT_LE(sum / static_cast<double>(n), 0.2);
}

TEST_F(ShrinkOntoDisk, Deterministic) {
  LevelSetField again;
  const auto m2 = drlse_evolve(disk(W, H, C, C, 50), channel, DrlseParams{}, &again);
  EXPECT_EQ(m2, mask);
  EXPECT_EQ(again.raw(), phi.raw());
}

TEST(Drlse, RegularizationOnlyDriftIsSmall) {
  const auto m = disk(160, 120, 80, 60, 35);
  Plane ch(160, 120, 0.5);
  DrlseParams p;
  p.alpha = 0.0;
  p.lambda = 0.0;
  p.iters = 50;
  const auto out = drlse_evolve(m, ch, p);
  EXPECT_LE(static_cast<double>(sym_diff(m, out)), 0.02 * static_cast<double>(m.count()));
}

TEST(Drlse, ObserverSeesSnapshots) {
  const auto m = disk(60, 60, 30, 30, 15);
  Plane ch(60, 60, 0.5);
  DrlseParams p;
  p.iters = 120;
  std::vector<int> seen;
  drlse_evolve(m, ch, p, nullptr, {50, [&](int it, const LevelSetField&) { seen.push_back(it); }});
  EXPECT_EQ(seen, (std::vector<int>{50, 100}));
}

TEST(Drlse, MaskStaysInFrameAtBorder) {
  // object touching the frame; balloon pushes outward
  BinaryMask m(60, 40);
  paint_square(m, 0, 0, 20);
  Plane ch(60, 40, 0.5);
  DrlseParams p;
  p.alpha = -1.5;
  p.iters = 30;
  LevelSetField phi;
  const auto out = drlse_evolve(m, ch, p, &phi);
  EXPECT_TRUE(out.test(0, 0));
  EXPECT_GT(out.count(), m.count());
}

TEST(FinalCleanup, SmoothDiskNearlyUnchanged) {
  const auto m = disk(120, 120, 60, 60, 35);
  const auto out = final_cleanup(m);
  std::size_t perimeter = 0;
  for (int y = 0; y < 120; ++y)
    for (int x = 0; x < 120; ++x) perimeter += is_boundary(m, x, y);
  EXPECT_LE(sym_diff(m, out), perimeter);
}

TEST(FinalCleanup, RemovesThinSpur) {
  auto m = disk(160, 120, 60, 60, 30);
  for (int x = 90; x < 150; ++x)
    for (int y = 59; y < 61; ++y) m(x, y) = 1;
  const auto out = final_cleanup(m);
  for (int x = 95; x < 150; ++x) EXPECT_FALSE(out.test(x, 60)) << x;
}

TEST(FinalCleanup, FillsPinhole) {
  auto m = disk(120, 120, 60, 60, 30);
  m(60, 60) = 0;
  EXPECT_TRUE(final_cleanup(m).test(60, 60));
}

TEST(FinalCleanup, KeepsLargestComponent) {
  BinaryMask m(200, 100);
  paint_square(m, 10, 10, 40);
  paint_square(m, 120, 20, 25);
  const auto out = final_cleanup(m);
  EXPECT_FALSE(out.test(130, 30));
  EXPECT_TRUE(out.test(30, 30));
  // opening rounds the four corners
  EXPECT_GE(out.count(), 1500u);
  EXPECT_LE(out.count(), 1600u);
}

TEST(FinalCleanup, EmptyResultReturnsInputWithWarning) {
  BinaryMask m(50, 50);
  paint_square(m, 10, 10, 4);
  bool warned = false;
  EXPECT_EQ(final_cleanup(m, 5, &warned), m);
  EXPECT_TRUE(warned);
}

TEST(SegmentFromSaliency, FallbackAndSkip) {
  RasterImage img(60, 40, 3, 0.5);
  LabelGrid g(60, 40);
  Plane s(60, 40, 0.1);
  for (int y = 10; y < 30; ++y)
    for (int x = 20; x < 45; ++x) {
      g(x, y) = 1;
      s(x, y) = 0.3;
    }
  SegmentConfig cfg;
  cfg.drlse.iters = 0;
  auto r = segment_from_saliency(s, img, compact_labels(g), cfg);
  EXPECT_TRUE(r.fallback);
  EXPECT_EQ(r.initial.count(), 500u);

  Plane full(60, 40, 0.9);
  r = segment_from_saliency(full, img, compact_labels(g), cfg);
  EXPECT_TRUE(r.evolution_skipped);
  EXPECT_TRUE(r.final_mask.all());
}

}  // namespace
}  // namespace salmap
