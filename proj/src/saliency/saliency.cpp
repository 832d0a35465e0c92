#include "salmap/saliency.hpp"

#include <Eigen/Dense>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <iomanip>
#include <mutex>
#include <sstream>

#include "salmap/imgcore/parallel.hpp"

namespace salmap {

RegionLabels label_regions(const MultiLevelPartition& partition, const BinaryMask& gt, double positive_overlap,
                           double negative_overlap) {
  RegionLabels out(partition.level_count());
  for (std::size_t l = 0; l < partition.level_count(); ++l) {
    const LabelMap& m = partition.levels[l];
    if (!gt.same_shape(m.labels)) throw Error("ground truth and partition differ in shape");
    std::vector<std::size_t> area(static_cast<std::size_t>(m.region_count), 0), hit(area.size(), 0);
    for (std::size_t i = 0; i < gt.size(); ++i) {
      const auto r = static_cast<std::size_t>(m.labels[i]);
      ++area[r];
      hit[r] += gt[i] ? 1 : 0;
    }
    auto& lab = out[l];
    lab.resize(area.size());
    for (std::size_t r = 0; r < area.size(); ++r) {
      const double ratio = area[r] ? static_cast<double>(hit[r]) / static_cast<double>(area[r]) : 0.0;
      lab[r] = ratio >= positive_overlap ? 1 : (ratio <= negative_overlap ? 0 : -1);
    }
  }
  return out;
}

Plane paint_regions(const LabelMap& map, std::span<const double> scores) {
  if (scores.size() != static_cast<std::size_t>(map.region_count)) throw Error("one score per region required");
  Plane p(map.width(), map.height());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = scores[static_cast<std::size_t>(map.labels[i])];
  return p;
}

FusionFit fit_fusion(const std::vector<std::vector<Plane>>& level_maps, const std::vector<BinaryMask>& gts) {
  if (level_maps.empty() || level_maps.size() != gts.size()) throw Error("fusion needs one ground truth per image");
  const std::size_t L = level_maps.front().size();
  if (L == 0) throw Error("fusion needs at least one level");
  Eigen::MatrixXd ata = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(L), static_cast<Eigen::Index>(L));
  Eigen::VectorXd atb = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(L));
  double btb = 0.0;
  std::size_t pixels = 0;
  std::vector<double> s(L);
  for (std::size_t img = 0; img < gts.size(); ++img) {
    const auto& maps = level_maps[img];
    if (maps.size() != L) throw Error("every image needs the same number of level maps");
    for (const auto& m : maps)
      if (!m.same_shape(gts[img])) throw Error("level map and ground truth differ in shape");
    for (std::size_t p = 0; p < gts[img].size(); ++p) {
      const double b = gts[img][p] ? 1.0 : 0.0;
      for (std::size_t l = 0; l < L; ++l) s[l] = maps[l][p];
      for (std::size_t i = 0; i < L; ++i) {
        atb(static_cast<Eigen::Index>(i)) += s[i] * b;
        for (std::size_t j = i; j < L; ++j) ata(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) += s[i] * s[j];
      }
      btb += b;
    }
    pixels += gts[img].size();
  }
  ata = ata.selfadjointView<Eigen::Upper>();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(ata);
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  const double top = lambda.cwiseAbs().maxCoeff();
  const double tol = top * static_cast<double>(L) * 1e-13;
  Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(L));
  FusionFit fit;
  for (Eigen::Index k = 0; k < lambda.size(); ++k) {
    if (!(lambda(k) > tol)) continue;
    const auto v = eig.eigenvectors().col(k);
    w += (v.dot(atb) / lambda(k)) * v;
    ++fit.rank;
  }
  fit.weights.assign(w.data(), w.data() + w.size());
  const double sse = w.dot(ata * w) - 2.0 * w.dot(atb) + btb;
  fit.mse = std::max(0.0, sse) / static_cast<double>(pixels);
  return fit;
}

Plane fuse_levels(const std::vector<Plane>& level_maps, std::span<const double> weights) {
  if (level_maps.empty() || level_maps.size() != weights.size()) throw Error("one fusion weight per level required");
  Plane out(level_maps.front().width(), level_maps.front().height());
  for (std::size_t l = 0; l < level_maps.size(); ++l)
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += weights[l] * level_maps[l][i];
  for (double& v : out.raw()) v = clamp01(v);
  return out;
}

std::vector<std::vector<double>> score_regions(const ForestModel& forest,
                                               const std::vector<std::vector<RegionDescriptor>>& desc) {
  std::vector<std::vector<double>> out(desc.size());
  for (std::size_t l = 0; l < desc.size(); ++l) {
    out[l].resize(desc[l].size());
    for (std::size_t r = 0; r < desc[l].size(); ++r) out[l][r] = forest.predict(desc[l][r].flat());
  }
  return out;
}

namespace {

struct Prepared {
  BinaryMask gt;
  MultiLevelPartition partition;
  std::vector<std::vector<RegionDescriptor>> descriptors;
  RegionLabels labels;
};

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

}  // namespace

SaliencyModel train_saliency(const std::vector<TrainingSample>& set, const SaliencyConfig& cfg,
                             const Progress& progress) {
  if (set.size() < 2) throw Error("training needs at least 2 images");
  std::vector<Prepared> prep(set.size());
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;
  parallel_for(set.size(), cfg.jobs, [&](std::size_t i) {
    const auto& s = set[i];
    if (!s.gt.same_shape(s.image.width(), s.image.height()))
      throw Error("ground truth of '" + s.id + "' does not match the image size");
    HookContext ctx;
    ctx.source = s.source;
    const PreprocessResult pre = preprocess_image(s.image, cfg.preprocess, ctx);
    Prepared& p = prep[i];
    p.gt = resize_to_standard(s.gt, cfg.preprocess);
    p.partition = segment_levels(pre.image, cfg.multiseg);
    p.descriptors = describe_image(p.partition, pre.image, cfg.regionfeat);
    p.labels = label_regions(p.partition, p.gt, cfg.positive_overlap, cfg.negative_overlap);
    if (progress) {
      std::lock_guard lock(progress_mutex);
      progress("features", ++done, set.size());
    }
  });

  FeatureMatrix x(0, kDescriptorDims);
  std::vector<double> y;
  std::size_t excluded = 0;
  for (const auto& p : prep)
    for (std::size_t l = 0; l < p.descriptors.size(); ++l)
      for (std::size_t r = 0; r < p.descriptors[l].size(); ++r) {
        const auto lab = p.labels[l][r];
        if (lab < 0) {
          ++excluded;
          continue;
        }
        x.append(p.descriptors[l][r].flat());
        y.push_back(lab);
      }
  if (x.rows == 0) throw Error("no labelled regions to train on");

  SaliencyModel model;
  model.config = cfg;
  ForestConfig fc = cfg.forest;
  fc.jobs = cfg.jobs;
  TrainingReport report;
  if (progress) progress("forest", 0, 1);
  model.forest = train_forest(x, y, fc, &report);
  if (progress) progress("forest", 1, 1);

  std::vector<std::vector<Plane>> maps(prep.size());
  std::vector<BinaryMask> gts(prep.size());
  parallel_for(prep.size(), cfg.jobs, [&](std::size_t i) {
    const auto scores = score_regions(model.forest, prep[i].descriptors);
    for (std::size_t l = 0; l < scores.size(); ++l) maps[i].push_back(paint_regions(prep[i].partition.levels[l], scores[l]));
    gts[i] = prep[i].gt;
  });
  const FusionFit fit = fit_fusion(maps, gts);
  model.fusion_weights = fit.weights;
  model.info = {set.size(), x.rows, excluded, fit.mse, report.oob_mse, utc_now()};
  return model;
}

SaliencyResult predict_saliency(const SaliencyModel& model, const RasterImage& img, const HookContext& ctx) {
  const SaliencyConfig& cfg = model.config;
  SaliencyResult out;
  const PreprocessResult pre = preprocess_image(img, cfg.preprocess, ctx);
  out.processed = pre.image;
  out.gains = pre.gains;
  out.partition = segment_levels(out.processed, cfg.multiseg);
  if (out.partition.level_count() != model.fusion_weights.size())
    throw Error("model has " + std::to_string(model.fusion_weights.size()) + " fusion weights but the partition has " +
                std::to_string(out.partition.level_count()) + " levels");
  out.circles = detect_circles(out.processed, cfg.regionfeat);
  out.background = extract_pseudo_background(out.processed, cfg.regionfeat);
  const FeaturePlanes planes = compute_planes(out.processed, out.circles, cfg.regionfeat);
  const auto desc = describe_regions(out.partition, planes, out.background, cfg.regionfeat);
  const auto scores = score_regions(model.forest, desc);
  for (std::size_t l = 0; l < scores.size(); ++l) out.level_maps.push_back(paint_regions(out.partition.levels[l], scores[l]));
  out.saliency = fuse_levels(out.level_maps, model.fusion_weights);
  return out;
}

}  // namespace salmap
