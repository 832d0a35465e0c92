#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "salmap/imgcore/morphology.hpp"
#include "salmap/io.hpp"
#include "salmap/preprocess.hpp"
#include "salmap/synthgen.hpp"

namespace salmap {
namespace {

int borders(const BinaryMask& m) {
  bool t = false, b = false, l = false, r = false;
  for (int x = 0; x < m.width(); ++x) {
    t = t || m.test(x, 0);
    b = b || m.test(x, m.height() - 1);
  }
  for (int y = 0; y < m.height(); ++y) {
    l = l || m.test(0, y);
    r = r || m.test(m.width() - 1, y);
  }
  return t + b + l + r;
}

std::array<double, 3> channel_means(const RasterImage& img) {
  std::array<double, 3> m{};
  for (int c = 0; c < 3; ++c) {
    for (double v : img.channel_span(c)) m[static_cast<std::size_t>(c)] += v;
    m[static_cast<std::size_t>(c)] /= static_cast<double>(img.pixel_count());
  }
  return m;
}

// Sum over channels of the across-image variance of per-image channel means.
double mean_channel_variance(const std::vector<RasterImage>& imgs) {
  double total = 0.0;
  std::vector<std::array<double, 3>> means;
  for (const auto& i : imgs) means.push_back(channel_means(i));
  for (std::size_t c = 0; c < 3; ++c) {
    double mu = 0.0;
    for (const auto& m : means) mu += m[c];
    mu /= static_cast<double>(means.size());
    for (const auto& m : means) total += (m[c] - mu) * (m[c] - mu);
  }
  return total / static_cast<double>(means.size());
}

TEST(Synthgen, DeterministicPerSeed) {
  auto spec = SynthSpec::all_artifacts(42, 3);
  const auto a = generate(spec, 1);
  const auto b = generate(spec, 3);
  ASSERT_EQ(a.size(), 3u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].id, b[i].id);
    EXPECT_EQ(a[i].image, b[i].image);
    EXPECT_EQ(a[i].gt, b[i].gt);
  }
  spec.seed = 43;
  EXPECT_NE(generate(spec)[0].image, a[0].image);
}

TEST(Synthgen, ImagesAreIndependentOfCount) {
  auto spec = SynthSpec::all_artifacts(5, 4);
  const auto four = generate(spec);
  EXPECT_EQ(generate_one(spec, 2).image, four[2].image);
}

TEST(Synthgen, StandardSizeAndIds) {
  const auto s = generate_one(SynthSpec{}, 7);
  EXPECT_EQ(s.image.width(), 400);
  EXPECT_EQ(s.image.height(), 300);
  EXPECT_EQ(s.image.channels(), 3);
  EXPECT_EQ(s.id, "synth_0007");
}

TEST(Synthgen, GroundTruthInvariants) {
  const auto set = generate(SynthSpec::all_artifacts(9, 30));
  for (const auto& s : set) {
    const double frac = static_cast<double>(s.gt.count()) / static_cast<double>(s.gt.size());
    EXPECT_GE(frac, 0.05) << s.id;
    EXPECT_LE(frac, 0.4) << s.id;
    EXPECT_EQ(connected_components(s.gt).size(), 1u) << s.id;
    EXPECT_EQ(fill_holes(s.gt), s.gt) << s.id;
    EXPECT_LE(borders(s.gt), 2) << s.id;
  }
}

TEST(Synthgen, LesionDarkerThanSkin) {
  SynthSpec spec;
  spec.count = 10;
  for (const auto& s : generate(spec)) {
    double in = 0.0, out = 0.0;
    std::size_t ni = 0, no = 0;
    for (std::size_t i = 0; i < s.gt.size(); ++i) {
      double lum = 0.0;
      for (int c = 0; c < 3; ++c) lum += s.image.channel_span(c)[i];
      (s.gt[i] ? in : out) += lum;
      ++(s.gt[i] ? ni : no);
    }
    EXPECT_LT(in / static_cast<double>(ni), 0.9 * out / static_cast<double>(no)) << s.id;
  }
}

TEST(Synthgen, ArtifactsOffLeavesSmoothSkin) {
  SynthSpec spec;
  spec.count = 5;
  spec.extreme_fraction = 0.0;
  for (const auto& s : generate(spec)) {
    // no hair, corners or chart: skin pixels stay bright and unsaturated
    for (int y = 0; y < 300; ++y)
      for (int x = 0; x < 400; ++x) {
        if (s.gt.test(x, y)) continue;
        const double r = s.image.at(x, y, 0), g = s.image.at(x, y, 1), b = s.image.at(x, y, 2);
        bool near_lesion = false;
        for (int dy = -12; dy <= 12 && !near_lesion; dy += 3)
          for (int dx = -12; dx <= 12 && !near_lesion; dx += 3)
            near_lesion = s.gt.test(std::clamp(x + dx, 0, 399), std::clamp(y + dy, 0, 299));
        if (near_lesion) continue;
        ASSERT_GT(r, 0.6) << s.id << " at " << x << "," << y;
        ASSERT_LT(std::max({r, g, b}) - std::min({r, g, b}), 0.45);
      }
  }
}

TEST(Synthgen, AreaRangeIsConfigurable) {
  SynthSpec spec;
  spec.count = 6;
  spec.min_area_fraction = 0.2;
  spec.max_area_fraction = 0.25;
  for (const auto& s : generate(spec)) {
    const double frac = static_cast<double>(s.gt.count()) / static_cast<double>(s.gt.size());
    EXPECT_GE(frac, 0.2);
    EXPECT_LE(frac, 0.25);
  }
  spec.max_area_fraction = 0.1;
  EXPECT_THROW(generate(spec), Error);
}

TEST(Synthgen, ColorConstancyReducesCastVariance) {
  auto spec = SynthSpec::all_artifacts(11, 24);
  std::vector<RasterImage> raw, corrected;
  for (const auto& s : generate(spec)) {
    raw.push_back(s.image);
    corrected.push_back(apply_color_constancy(s.image, shades_of_gray_gains(s.image, 6.0)));
  }
  EXPECT_LT(mean_channel_variance(corrected), 0.5 * mean_channel_variance(raw));
}

TEST(Synthgen, WritesDatasetLayout) {
  const auto root = std::filesystem::temp_directory_path() / "salmap_synth_layout";
  std::filesystem::remove_all(root);
  SynthSpec spec;
  spec.count = 2;
  const auto set = generate(spec);
  write_dataset(set, root);
  EXPECT_TRUE(std::filesystem::exists(root / "images" / "synth_0001.png"));
  const auto mask = io::load_mask(root / "masks" / "synth_0001_segmentation.png");
  EXPECT_EQ(mask, set[1].gt);
  std::filesystem::remove_all(root);
}

}  // namespace
}  // namespace salmap
