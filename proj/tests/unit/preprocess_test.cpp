#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "salmap/imgcore.hpp"
#include "salmap/io.hpp"
#include "salmap/preprocess.hpp"

namespace salmap {
namespace {

RasterImage solid_rgb(int w, int h, double r, double g, double b) {
  std::vector<Plane> planes{Plane(w, h, r), Plane(w, h, g), Plane(w, h, b)};
  return RasterImage::from_planes(planes);
}

// Smooth random image kept well inside (0,1) so that no correction clamps.
RasterImage random_image(std::mt19937& rng, int w, int h, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<Plane> planes;
  for (int c = 0; c < 3; ++c) {
    Plane p(w, h);
    for (double& v : p.raw()) v = u(rng);
    planes.push_back(p);
  }
  return RasterImage::from_planes(planes);
}

TEST(ShadesOfGray, GrayImageHasUnitGains) {
  auto g = shades_of_gray_gains(solid_rgb(8, 8, 0.4, 0.4, 0.4), 6);
  EXPECT_NEAR(g.r, 1.0, 1e-12);
  EXPECT_NEAR(g.g, 1.0, 1e-12);
  EXPECT_NEAR(g.b, 1.0, 1e-12);
}

TEST(ShadesOfGray, ClosedFormOnConstantChannels) {
  for (double p : {1.0, 2.0, 6.0, 13.0}) {
    auto g = shades_of_gray_gains(solid_rgb(8, 8, 0.2, 0.4, 0.4), p);
    EXPECT_NEAR(g.r, std::sqrt(3.0), 1e-9);
    EXPECT_NEAR(g.g, std::sqrt(3.0) / 2.0, 1e-9);
    EXPECT_NEAR(g.b, std::sqrt(3.0) / 2.0, 1e-9);
  }
}

TEST(ShadesOfGray, CorrectionIsIdempotent) {
  auto img = solid_rgb(8, 8, 0.2, 0.4, 0.4);
  auto corrected = apply_color_constancy(img, shades_of_gray_gains(img, 6));
  auto again = shades_of_gray_gains(corrected, 6);
  EXPECT_NEAR(again.r, 1.0, 1e-9);
  EXPECT_NEAR(again.g, 1.0, 1e-9);
  EXPECT_NEAR(again.b, 1.0, 1e-9);
}

TEST(ShadesOfGray, IdempotentOnUnclampedRandomImages) {
  std::mt19937 rng(1);
  for (int trial = 0; trial < 10; ++trial) {
    auto img = random_image(rng, 20, 15, 0.3, 0.6);
    auto gains = shades_of_gray_gains(img, 6);
    ASSERT_LT(std::max({gains.r, gains.g, gains.b}) * 0.6, 1.0);
    auto again = shades_of_gray_gains(apply_color_constancy(img, gains), 6);
    EXPECT_NEAR(again.r, 1.0, 1e-6);
    EXPECT_NEAR(again.g, 1.0, 1e-6);
    EXPECT_NEAR(again.b, 1.0, 1e-6);
  }
}

TEST(ShadesOfGray, ScaleInvariant) {
  std::mt19937 rng(2);
  auto img = random_image(rng, 16, 16, 0.05, 1.0);
  for (double s : {0.25, 0.5, 0.9}) {
    std::vector<double> scaled(img.raw());
    for (double& v : scaled) v *= s;
    auto a = shades_of_gray_gains(img, 6);
    auto b = shades_of_gray_gains(RasterImage(16, 16, 3, scaled), 6);
    EXPECT_NEAR(a.r, b.r, 1e-12);
    EXPECT_NEAR(a.g, b.g, 1e-12);
    EXPECT_NEAR(a.b, b.b, 1e-12);
  }
}

TEST(ShadesOfGray, LargePApproachesWhitePatch) {
  // Smooth ramp: the p=100 mean sits close to the channel maximum.
  Plane base(64, 64);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x) base(x, y) = 0.2 + 0.8 * (x + y) / 126.0;
  std::vector<Plane> planes{base, base, base};
  for (double& v : planes[1].raw()) v *= 0.7;
  for (double& v : planes[2].raw()) v = 0.5 * v + 0.05 * std::sin(v * 9.0);
  auto img = RasterImage::from_planes(planes);
  auto g = shades_of_gray_gains(img, 100);
  std::array<double, 3> mx{};
  for (int c = 0; c < 3; ++c)
    for (double v : img.channel_span(c)) mx[static_cast<std::size_t>(c)] = std::max(mx[static_cast<std::size_t>(c)], v);
  const double norm = std::sqrt(mx[0] * mx[0] + mx[1] * mx[1] + mx[2] * mx[2]);
  const std::array<double, 3> wp{norm / (std::sqrt(3.0) * mx[0]), norm / (std::sqrt(3.0) * mx[1]),
                                 norm / (std::sqrt(3.0) * mx[2])};
  EXPECT_NEAR(g.r / wp[0], 1.0, 0.02);
  EXPECT_NEAR(g.g / wp[1], 1.0, 0.02);
  EXPECT_NEAR(g.b / wp[2], 1.0, 0.02);
}

TEST(ShadesOfGray, ZeroChannelIsDegenerate) {
  EXPECT_THROW(shades_of_gray_gains(solid_rgb(4, 4, 0.5, 0.0, 0.5), 6), Error);
}

TEST(ApplyColorConstancy, MultipliesAndClamps) {
  auto img = solid_rgb(2, 2, 0.5, 0.9, 0.3);
  EXPECT_EQ(apply_color_constancy(img, {1, 1, 1}), img);
  auto out = apply_color_constancy(img, {1.7321, 1.5, 1.0});
  EXPECT_NEAR(out.at(0, 0, 0), 0.86605, 1e-12);
  EXPECT_DOUBLE_EQ(out.at(0, 0, 1), 1.0);
  EXPECT_DOUBLE_EQ(out.at(0, 0, 2), 0.3);
}

TEST(ResizeToStandard, IdentityAndConstant) {
  PreprocessConfig cfg;
  std::mt19937 rng(3);
  auto img = random_image(rng, 400, 300, 0, 1);
  EXPECT_EQ(resize_to_standard(img, cfg), img);

  auto big = solid_rgb(800, 600, 0.3, 0.6, 0.1);
  auto small = resize_to_standard(big, cfg);
  EXPECT_EQ(small.width(), 400);
  EXPECT_EQ(small.height(), 300);
  for (int c = 0; c < 3; ++c)
    for (double v : small.channel_span(c)) EXPECT_DOUBLE_EQ(v, big.at(0, 0, c));
}

TEST(ResizeToStandard, CheckerboardMean) {
  std::vector<Plane> planes(3, Plane(800, 600));
  for (auto& p : planes)
    for (int y = 0; y < 600; ++y)
      for (int x = 0; x < 800; ++x) p(x, y) = ((x / 3 + y / 3) % 2) ? 1.0 : 0.0;
  auto small = resize_to_standard(RasterImage::from_planes(planes), PreprocessConfig{});
  double mean = 0.0;
  for (double v : small.channel_span(0)) mean += v;
  EXPECT_NEAR(mean / small.pixel_count(), 0.5, 0.01);
}

TEST(ResizeToStandard, MasksUseNearest) {
  BinaryMask m(800, 600);
  for (int y = 100; y < 300; ++y)
    for (int x = 200; x < 600; ++x) m.set(x, y);
  auto small = resize_to_standard(m, PreprocessConfig{});
  EXPECT_EQ(small.count(), 100u * 200u);
}

TEST(HairHook, IdentityAndUnknown) {
  std::mt19937 rng(4);
  auto img = random_image(rng, 10, 10, 0, 1);
  EXPECT_EQ(hair_removal_hook(img, "identity"), img);
  EXPECT_THROW(hair_removal_hook(img, "foo"), Error);
}

TEST(HairHook, PassthroughFileReturnsSiblingPixels) {
  const auto dir = std::filesystem::temp_directory_path() / "salmap_hook_test";
  std::filesystem::create_directories(dir);
  std::vector<Plane> planes{Plane(12, 8, 0.2), Plane(12, 8, 0.4), Plane(12, 8, 0.8)};
  io::save_png(dir / "lesion_inpainted.png", RasterImage::from_planes(planes));

  HookContext ctx;
  ctx.source = dir / "lesion.png";
  auto out = hair_removal_hook(solid_rgb(12, 8, 0.9, 0.9, 0.9), "passthrough-file", ctx);
  EXPECT_NEAR(out.at(3, 3, 0), 51.0 / 255.0, 1e-12);
  EXPECT_NEAR(out.at(3, 3, 1), 102.0 / 255.0, 1e-12);
  EXPECT_NEAR(out.at(3, 3, 2), 204.0 / 255.0, 1e-12);
  std::filesystem::remove_all(dir);
}

TEST(HairHook, CustomRegistration) {
  register_hair_hook("darken", [](const RasterImage& img, const HookContext&) {
    return apply_color_constancy(img, {0.5, 0.5, 0.5});
  });
  EXPECT_TRUE(has_hair_hook("darken"));
  auto out = hair_removal_hook(solid_rgb(2, 2, 0.8, 0.8, 0.8), "darken");
  EXPECT_NEAR(out.at(0, 0, 0), 0.4, 1e-12);
}

TEST(PreprocessImage, OrderAndGains) {
  auto img = solid_rgb(800, 600, 0.2, 0.4, 0.4);
  auto res = preprocess_image(img, PreprocessConfig{});
  EXPECT_EQ(res.image.width(), 400);
  EXPECT_NEAR(res.gains.r, std::sqrt(3.0), 1e-9);
  EXPECT_NEAR(res.image.at(5, 5, 0), res.image.at(5, 5, 1), 1e-9);

  PreprocessConfig off;
  off.color_constancy = false;
  auto raw = preprocess_image(img, off);
  EXPECT_DOUBLE_EQ(raw.gains.r, 1.0);
  EXPECT_DOUBLE_EQ(raw.image.at(5, 5, 0), 0.2);
}

}  // namespace
}  // namespace salmap
