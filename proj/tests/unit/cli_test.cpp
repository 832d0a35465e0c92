#include <gtest/gtest.h>

#include <fstream>
#include <iterator>
#include <random>
#include <sstream>

#include "salmap/cli.hpp"
#include "salmap/io.hpp"
#include "salmap/model_io.hpp"
#include "salmap/synthgen.hpp"

namespace fs = std::filesystem;
using namespace salmap;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static std::mt19937_64 rng(std::random_device{}());
    path = fs::temp_directory_path() / ("salmap_cli_" + std::to_string(rng()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  fs::path operator/(const std::string& s) const { return path / s; }
};

int run(std::vector<std::string> args, std::string* err = nullptr) {
  args.insert(args.begin(), "salmap");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  testing::internal::CaptureStderr();
  const int rc = run_cli(static_cast<int>(argv.size()), argv.data());
  const std::string e = testing::internal::GetCapturedStderr();
  if (err) *err = e;
  return rc;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), {}};
}

SynthSpec small_spec(std::uint64_t seed, int count) {
  SynthSpec s;
  s.seed = seed;
  s.count = count;
  s.width = 80;
  s.height = 60;
  return s;
}

SaliencyConfig small_config(int levels, int trees) {
  SaliencyConfig cfg;
  cfg.preprocess.target_width = 80;
  cfg.preprocess.target_height = 60;
  cfg.multiseg.level_count = levels;
  cfg.multiseg.coarsest_regions = 4;
  cfg.multiseg.felz_min_size = 10;
  cfg.forest.tree_count = trees;
  cfg.forest.seed = 11;
  return cfg;
}

std::vector<TrainingSample> as_training(const std::vector<SynthSample>& s) {
  std::vector<TrainingSample> out;
  for (const auto& x : s) out.push_back({x.id, x.image, x.gt, std::nullopt});
  return out;
}

// One small model shared by the prediction tests.
const SaliencyModel& small_model() {
  static const SaliencyModel m = train_saliency(as_training(generate(small_spec(5, 8), 1)), small_config(3, 12));
  return m;
}

}  // namespace

TEST(ModelFile, RoundTripKeepsEveryField) {
  const SaliencyModel& m = small_model();
  std::stringstream ss;
  write_model(ss, m);
  const SaliencyModel r = read_model(ss);
  ASSERT_EQ(r.forest.trees.size(), m.forest.trees.size());
  for (std::size_t t = 0; t < m.forest.trees.size(); ++t) {
    ASSERT_EQ(r.forest.trees[t].nodes.size(), m.forest.trees[t].nodes.size());
    for (std::size_t i = 0; i < m.forest.trees[t].nodes.size(); ++i) {
      const auto& a = m.forest.trees[t].nodes[i];
      const auto& b = r.forest.trees[t].nodes[i];
      EXPECT_EQ(a.feature, b.feature);
      EXPECT_EQ(a.left, b.left);
      EXPECT_EQ(a.right, b.right);
      EXPECT_EQ(a.value, b.value);
    }
  }
  EXPECT_EQ(r.forest.feature_count, m.forest.feature_count);
  EXPECT_EQ(r.forest.seed, m.forest.seed);
  EXPECT_EQ(r.fusion_weights, m.fusion_weights);
  EXPECT_EQ(r.config.multiseg.level_count, 3);
  EXPECT_EQ(r.config.preprocess.target_width, 80);
  EXPECT_EQ(r.config.forest.tree_count, 12);
  EXPECT_EQ(r.info.images, m.info.images);
  EXPECT_EQ(r.info.created, m.info.created);
  EXPECT_EQ(r.info.fusion_mse, m.info.fusion_mse);
}

TEST(ModelFile, ReloadedModelPredictsBitIdenticallyOnHundredImages) {
  const SaliencyModel& m = small_model();
  TempDir dir;
  save_model(dir / "m.model", m);
  const SaliencyModel r = load_model(dir / "m.model");
  const auto probes = generate(small_spec(909, 100), 1);
  for (const auto& p : probes) {
    const Plane a = predict_saliency(m, p.image).saliency;
    const Plane b = predict_saliency(r, p.image).saliency;
    ASSERT_EQ(a.raw(), b.raw()) << p.id;
  }
}

TEST(ModelFile, RejectsCorruptInput) {
  std::stringstream good;
  write_model(good, small_model());
  const std::string bytes = good.str();

  std::stringstream magic("NOT-A-MODEL\n{}");
  EXPECT_THROW(read_model(magic), Error);

  std::stringstream truncated(bytes.substr(0, bytes.size() - 5));
  EXPECT_THROW(read_model(truncated), Error);

  std::stringstream trailing(bytes + "x");
  EXPECT_THROW(read_model(trailing), Error);

  std::string future = bytes;
  const auto pos = future.find("\"format_version\": 1");
  ASSERT_NE(pos, std::string::npos);
  future.replace(pos, 20, "\"format_version\": 9");
  std::stringstream fv(future);
  EXPECT_THROW(read_model(fv), Error);
}

TEST(ModelFile, MissingFileIsAnError) { EXPECT_THROW(load_model("/nonexistent/dir/m.model"), Error); }

TEST(Dataset, IndexesImagesAndMasks) {
  TempDir dir;
  const auto s = generate(small_spec(3, 3), 1);
  write_dataset(s, dir.path);
  fs::remove(dir / "masks/synth_0001_segmentation.png");
  const auto idx = index_dataset(dir.path);
  ASSERT_EQ(idx.size(), 3u);
  EXPECT_EQ(idx[0].stem, "synth_0000");
  EXPECT_TRUE(idx[0].gt.has_value());
  EXPECT_FALSE(idx[1].gt.has_value());

  const auto one = index_inputs(dir / "images/synth_0002.png");
  ASSERT_EQ(one.size(), 1u);
  ASSERT_TRUE(one[0].gt.has_value());
  EXPECT_EQ(one[0].gt->filename(), "synth_0002_segmentation.png");
}

TEST(Dataset, DuplicateStemsAreRejected) {
  TempDir dir;
  const auto s = generate(small_spec(3, 1), 1);
  io::save_png(dir / "a.png", s[0].image);
  fs::copy_file(dir / "a.png", dir / "a.jpg");
  EXPECT_THROW(index_dataset(dir.path), Error);
}

TEST(Train, LevelsOneGivesOneWeight) {
  TempDir dir;
  write_dataset(generate(small_spec(21, 3), 1), dir / "data");
  std::string err;
  ASSERT_EQ(run({"train", "--data", (dir / "data").string(), "--out", (dir / "m.model").string(), "--levels", "1",
                 "--trees", "4"},
                &err),
            0)
      << err;
  const SaliencyModel m = load_model(dir / "m.model");
  EXPECT_EQ(m.fusion_weights.size(), 1u);
  EXPECT_NE(err.find("per-level weights"), std::string::npos);
  EXPECT_NE(err.find("residual"), std::string::npos);
}

TEST(Train, DefaultsRecordFifteenLevelsAndTwoHundredTrees) {
  TempDir dir;
  write_dataset(generate(small_spec(22, 2), 1), dir / "data");
  std::string err;
  ASSERT_EQ(run({"train", "--data", (dir / "data").string(), "--out", (dir / "m.model").string()}, &err), 0) << err;
  const SaliencyModel m = load_model(dir / "m.model");
  EXPECT_EQ(m.config.multiseg.level_count, 15);
  EXPECT_EQ(m.config.forest.tree_count, 200);
  EXPECT_EQ(m.forest.trees.size(), 200u);
  EXPECT_EQ(m.fusion_weights.size(), 15u);
  EXPECT_TRUE(m.config.preprocess.color_constancy);
}

TEST(Train, NoColorConstancyIsRecorded) {
  TempDir dir;
  write_dataset(generate(small_spec(23, 2), 1), dir / "data");
  ASSERT_EQ(run({"train", "--data", (dir / "data").string(), "--out", (dir / "m.model").string(), "--levels", "2",
                 "--trees", "2", "--no-color-constancy"}),
            0);
  EXPECT_FALSE(load_model(dir / "m.model").config.preprocess.color_constancy);
}

TEST(Train, MissingGroundTruthIsNamed) {
  TempDir dir;
  write_dataset(generate(small_spec(24, 3), 1), dir / "data");
  fs::remove(dir / "data/masks/synth_0002_segmentation.png");
  std::string err;
  EXPECT_EQ(run({"train", "--data", (dir / "data").string(), "--out", (dir / "m.model").string()}, &err), 2);
  EXPECT_NE(err.find("synth_0002_segmentation.png"), std::string::npos) << err;
  EXPECT_FALSE(fs::exists(dir / "m.model"));
}

TEST(Train, UnreadableImageIsNamed) {
  TempDir dir;
  write_dataset(generate(small_spec(25, 3), 1), dir / "data");
  std::ofstream(dir / "data/images/synth_0001.png") << "garbage";
  std::string err;
  EXPECT_EQ(run({"train", "--data", (dir / "data").string(), "--out", (dir / "m.model").string()}, &err), 2);
  EXPECT_NE(err.find("synth_0001.png"), std::string::npos) << err;
}

TEST(Train, NeedsTwoPairs) {
  TempDir dir;
  write_dataset(generate(small_spec(26, 1), 1), dir / "data");
  EXPECT_EQ(run({"train", "--data", (dir / "data").string(), "--out", (dir / "m.model").string()}), 2);
}

class SegmentCommand : public testing::Test {
 protected:
  void SetUp() override {
    save_model(dir / "m.model", small_model());
    samples = generate(small_spec(31, 10), 1);
    write_dataset(samples, dir / "data");
  }
  TempDir dir;
  std::vector<SynthSample> samples;
};

TEST_F(SegmentCommand, SingleImageWritesFourFiles) {
  std::string err;
  ASSERT_EQ(run({"segment", "--model", (dir / "m.model").string(), "--in", (dir / "data/images/synth_0003.png").string(),
                 "--out", (dir / "out").string()},
                &err),
            0)
      << err;
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(dir / "out")) names.push_back(e.path().filename().string());
  std::sort(names.begin(), names.end());
  const std::vector<std::string> want{"synth_0003_final.png", "synth_0003_initial.png", "synth_0003_overlay.png",
                                      "synth_0003_saliency.png"};
  EXPECT_EQ(names, want);
  const BinaryMask fin = io::load_mask(dir / "out/synth_0003_final.png");
  EXPECT_EQ(fin.width(), 80);
  EXPECT_EQ(fin.height(), 60);
  const RasterImage overlay = io::load_image(dir / "out/synth_0003_overlay.png");
  EXPECT_EQ(overlay.channels(), 3);
  bool green = false, blue = false;
  for (int y = 0; y < overlay.height(); ++y)
    for (int x = 0; x < overlay.width(); ++x) {
      green |= overlay.at(x, y, 1) == 1.0 && overlay.at(x, y, 0) == 0.0 && overlay.at(x, y, 2) == 0.0;
      blue |= overlay.at(x, y, 2) == 1.0 && overlay.at(x, y, 0) == 0.0 && overlay.at(x, y, 1) == 0.0;
    }
  EXPECT_TRUE(green);
  EXPECT_TRUE(blue);
}

TEST_F(SegmentCommand, DirectoryWritesFortyFilesAndSummary) {
  std::string err;
  ASSERT_EQ(run({"segment", "--model", (dir / "m.model").string(), "--in", (dir / "data").string(), "--out",
                 (dir / "out").string(), "--jobs", "2"},
                &err),
            0)
      << err;
  EXPECT_EQ(std::distance(fs::directory_iterator(dir / "out"), fs::directory_iterator{}), 40);
  EXPECT_NE(err.find("segmented 10 of 10 images (0 failed)"), std::string::npos) << err;
}

TEST_F(SegmentCommand, DumpIntermediateAddsMaps) {
  ASSERT_EQ(run({"segment", "--model", (dir / "m.model").string(), "--in", (dir / "data/images/synth_0000.png").string(),
                 "--out", (dir / "out").string(), "--dump-intermediate"}),
            0);
  for (const char* f : {"synth_0000_strip.png", "synth_0000_circles.png", "synth_0000_level00.png",
                        "synth_0000_level01.png", "synth_0000_level02.png"})
    EXPECT_TRUE(fs::exists(dir / "out" / f)) << f;
}

TEST_F(SegmentCommand, FailingImageDoesNotStopTheBatch) {
  std::ofstream(dir / "data/images/synth_0004.png") << "not a png";
  std::string err;
  EXPECT_EQ(run({"segment", "--model", (dir / "m.model").string(), "--in", (dir / "data").string(), "--out",
                 (dir / "out").string()},
                &err),
            1);
  EXPECT_NE(err.find("synth_0004"), std::string::npos);
  EXPECT_NE(err.find("segmented 9 of 10 images (1 failed)"), std::string::npos) << err;
  EXPECT_TRUE(fs::exists(dir / "out/synth_0009_final.png"));
  EXPECT_FALSE(fs::exists(dir / "out/synth_0004_final.png"));
}

TEST_F(SegmentCommand, BadModelIsFatal) {
  std::ofstream(dir / "bad.model") << "SALMAP-MODEL 1\n{";
  EXPECT_EQ(run({"segment", "--model", (dir / "bad.model").string(), "--in", (dir / "data").string(), "--out",
                 (dir / "out").string()}),
            2);
}

TEST(Eval, CopiesOfGroundTruthScorePerfect) {
  TempDir dir;
  const auto s = generate(small_spec(41, 4), 1);
  write_dataset(s, dir / "data");
  fs::create_directories(dir / "pred");
  for (const auto& x : s) io::save_png(dir / "pred" / (x.id + "_final.png"), x.gt);
  std::string err;
  ASSERT_EQ(run({"eval", "--pred", (dir / "pred").string(), "--gt", (dir / "data/masks").string(), "--out",
                 (dir / "m.csv").string()},
                &err),
            0)
      << err;
  const std::string csv = slurp(dir / "m.csv");
  EXPECT_EQ(csv.rfind("id,dsc,jsi,acc,sens,spec\n", 0), 0u);
  EXPECT_NE(csv.find("mean,1.000000,1.000000,1.000000,1.000000,1.000000"), std::string::npos) << csv;
  EXPECT_NE(csv.find("synth_0003,"), std::string::npos);
}

TEST(Eval, EmptyIntersectionListsBothSides) {
  TempDir dir;
  const auto s = generate(small_spec(42, 2), 1);
  fs::create_directories(dir / "pred");
  fs::create_directories(dir / "gt");
  io::save_png(dir / "pred/alpha_final.png", s[0].gt);
  io::save_png(dir / "gt/beta_segmentation.png", s[1].gt);
  std::string err;
  EXPECT_EQ(run({"eval", "--pred", (dir / "pred").string(), "--gt", (dir / "gt").string(), "--out",
                 (dir / "m.csv").string()},
                &err),
            2);
  EXPECT_NE(err.find("alpha"), std::string::npos) << err;
  EXPECT_NE(err.find("beta"), std::string::npos) << err;
  EXPECT_FALSE(fs::exists(dir / "m.csv"));
}

TEST(Eval, PartialMismatchIsReported) {
  TempDir dir;
  const auto s = generate(small_spec(43, 3), 1);
  write_dataset(s, dir / "data");
  fs::create_directories(dir / "pred");
  io::save_png(dir / "pred/synth_0000_final.png", s[0].gt);
  io::save_png(dir / "pred/synth_0001_final.png", s[1].gt);
  std::string err;
  EXPECT_EQ(run({"eval", "--pred", (dir / "pred").string(), "--gt", (dir / "data").string(), "--out",
                 (dir / "m.csv").string()},
                &err),
            1);
  EXPECT_NE(err.find("synth_0002"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "m.csv"));
}

TEST(Synth, SameSeedGivesByteEqualFiles) {
  TempDir dir;
  const std::string spec = R"({"count": 3, "width": 90, "height": 70, "all_artifacts": true})";
  ASSERT_EQ(run({"synth", "--spec", spec, "--out", (dir / "a").string(), "--seed", "99"}), 0);
  ASSERT_EQ(run({"synth", "--spec", spec, "--out", (dir / "b").string(), "--seed", "99", "--jobs", "3"}), 0);
  int files = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir / "a")) {
    if (!e.is_regular_file()) continue;
    const fs::path rel = fs::relative(e.path(), dir / "a");
    EXPECT_EQ(slurp(e.path()), slurp(dir / "b" / rel)) << rel;
    ++files;
  }
  EXPECT_EQ(files, 6);
}

TEST(Synth, SpecFromFileAndOverrides) {
  TempDir dir;
  std::ofstream(dir / "spec.json") << R"({"count": 5, "width": 60, "height": 50, "hair": true})";
  ASSERT_EQ(run({"synth", "--spec", (dir / "spec.json").string(), "--out", (dir / "d").string(), "--count", "2"}), 0);
  EXPECT_EQ(std::distance(fs::directory_iterator(dir / "d/images"), fs::directory_iterator{}), 2);
  EXPECT_EQ(io::load_image(dir / "d/images/synth_0000.png").width(), 60);
}

TEST(Synth, UnknownKeyIsRejected) {
  TempDir dir;
  std::string err;
  EXPECT_EQ(run({"synth", "--spec", R"({"colour_cast": true})", "--out", (dir / "d").string()}, &err), 2);
  EXPECT_NE(err.find("colour_cast"), std::string::npos);
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run({}), 2);
  EXPECT_EQ(run({"train"}), 2);
  EXPECT_EQ(run({"frobnicate"}), 2);
}
