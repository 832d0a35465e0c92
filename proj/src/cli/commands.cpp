#include <CLI11.hpp>
#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>
#include <mutex>
#include <set>
#include <sstream>

#include "salmap/cli.hpp"
#include "salmap/evalkit.hpp"
#include "salmap/fsutil.hpp"
#include "salmap/imgcore/parallel.hpp"
#include "salmap/imgcore/resample.hpp"
#include "salmap/io.hpp"
#include "salmap/model_io.hpp"
#include "salmap/saliency.hpp"
#include "salmap/segment.hpp"
#include "salmap/synthgen.hpp"

namespace salmap {

namespace fs = std::filesystem;

namespace {

std::mutex log_mutex;

template <class... Args>
void log(const Args&... args) {
  std::ostringstream os;
  (os << ... << args);
  std::lock_guard lock(log_mutex);
  std::cerr << os.str() << '\n';
}

void save_atomic(const fs::path& path, const auto& data) {
  atomic_write(path, [&](const fs::path& tmp) { io::save_png(tmp, data); });
}

// ---------------------------------------------------------------- train

struct TrainOptions {
  fs::path data, out;
  int levels = 15;
  int trees = 200;
  std::uint64_t seed = 1;
  bool no_color_constancy = false;
  std::string hair_hook = "identity";
  int jobs = 1;
};

int cmd_train(const TrainOptions& o) {
  if (!has_hair_hook(o.hair_hook)) throw Error("unknown hair hook '" + o.hair_hook + "'");
  if (o.levels < 1) throw Error("--levels must be at least 1");
  if (o.trees < 1) throw Error("--trees must be at least 1");
  const auto entries = index_dataset(o.data);
  std::vector<std::string> missing;
  for (const auto& e : entries)
    if (!e.gt) missing.push_back(e.stem + "_segmentation.png");
  if (!missing.empty()) {
    std::string list;
    for (std::size_t i = 0; i < std::min<std::size_t>(missing.size(), 20); ++i) list += "\n  " + missing[i];
    if (missing.size() > 20) list += "\n  ... and " + std::to_string(missing.size() - 20) + " more";
    throw Error(std::to_string(missing.size()) + " missing ground-truth masks:" + list);
  }
  if (entries.size() < 2) throw Error("training needs at least 2 image/mask pairs in '" + o.data.string() + "'");

  std::vector<TrainingSample> set(entries.size());
  parallel_for(entries.size(), o.jobs, [&](std::size_t i) {
    const auto& e = entries[i];
    set[i] = {e.stem, io::load_image(e.image), io::load_mask(*e.gt), e.image};
  });

  SaliencyConfig cfg;
  cfg.multiseg.level_count = o.levels;
  cfg.forest.tree_count = o.trees;
  cfg.forest.seed = o.seed;
  cfg.preprocess.color_constancy = !o.no_color_constancy;
  cfg.preprocess.hair_hook = o.hair_hook;
  cfg.jobs = o.jobs;
  log("training on ", set.size(), " images (levels ", o.levels, ", trees ", o.trees, ", seed ", o.seed, ")");
  const SaliencyModel model = train_saliency(set, cfg, [](const std::string& stage, std::size_t done, std::size_t total) {
    if (stage == "features" && done != total && done % 10 != 0) return;
    log("  ", stage, " ", done, "/", total);
  });
  save_model(o.out, model);

  std::ostringstream w;
  w.precision(4);
  for (std::size_t l = 0; l < model.fusion_weights.size(); ++l) w << (l ? " " : "") << model.fusion_weights[l];
  log("regions: ", model.info.samples, " labelled, ", model.info.excluded, " excluded");
  log("forest out-of-bag MSE: ", model.info.oob_mse);
  log("fusion training residual (MSE): ", model.info.fusion_mse);
  log("per-level weights: ", w.str());
  log("model written to ", o.out.string());
  return 0;
}

// ---------------------------------------------------------------- segment

struct SegmentOptions {
  fs::path model, in, out;
  bool dump = false;
  int jobs = 1;
};

BinaryMask boundary(const BinaryMask& m) {
  BinaryMask b(m.width(), m.height());
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x) {
      if (!m.test(x, y)) continue;
      b(x, y) = x == 0 || y == 0 || x == m.width() - 1 || y == m.height() - 1 || !m.test(x - 1, y) ||
                !m.test(x + 1, y) || !m.test(x, y - 1) || !m.test(x, y + 1);
    }
  return b;
}

void draw_contour(RasterImage& img, const BinaryMask& mask, double r, double g, double b, bool dashed) {
  const BinaryMask edge = boundary(mask);
  const int thick = std::max(1, std::min(img.width(), img.height()) / 300);
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      if (!edge.test(x, y)) continue;
      if (dashed && ((x + y) / (6 * thick)) % 2 == 1) continue;
      for (int dy = -thick + 1; dy < thick; ++dy)
        for (int dx = -thick + 1; dx < thick; ++dx) {
          const int px = x + dx, py = y + dy;
          if (px < 0 || py < 0 || px >= img.width() || py >= img.height()) continue;
          img.set(px, py, 0, r);
          img.set(px, py, 1, g);
          img.set(px, py, 2, b);
        }
    }
}

RasterImage as_rgb(const RasterImage& img) {
  if (img.channels() == 3) return img;
  const Plane p = img.channel(0);
  const std::vector<Plane> planes{p, p, p};
  return RasterImage::from_planes(planes);
}

void segment_one(const SaliencyModel& model, const DatasetEntry& e, const SegmentOptions& o) {
  const RasterImage img = io::load_image(e.image);
  HookContext ctx;
  ctx.source = e.image;
  const SaliencyResult sal = predict_saliency(model, img, ctx);
  SegmentConfig scfg;
  if (o.dump) scfg.snapshot_every = 50;
  const SegmentationResult seg = segment_from_saliency(sal.saliency, sal.processed, sal.partition.levels.front(), scfg);
  if (seg.fallback) log(e.stem, ": no pixel reached the saliency threshold; using the most salient region");
  if (seg.cleanup_warning) log(e.stem, ": cleanup removed everything; keeping the evolved mask");

  const int w = img.width(), h = img.height();
  const Plane saliency = resize_bilinear(sal.saliency, w, h);
  const BinaryMask initial = resize_nearest(seg.initial, w, h);
  const BinaryMask final_mask = resize_nearest(seg.final_mask, w, h);
  save_atomic(o.out / (e.stem + "_saliency.png"), saliency);
  save_atomic(o.out / (e.stem + "_initial.png"), initial);
  save_atomic(o.out / (e.stem + "_final.png"), final_mask);

  RasterImage overlay = as_rgb(img);
  if (e.gt) {
    const BinaryMask gt = io::load_mask(*e.gt);
    if (gt.same_shape(w, h))
      draw_contour(overlay, gt, 0.0, 1.0, 0.0, false);
    else
      log(e.stem, ": ground truth size differs from the image; not drawn");
  }
  draw_contour(overlay, initial, 1.0, 0.0, 0.0, true);
  draw_contour(overlay, final_mask, 0.0, 0.0, 1.0, false);
  save_atomic(o.out / (e.stem + "_overlay.png"), overlay);

  if (!o.dump) return;
  save_atomic(o.out / (e.stem + "_strip.png"), sal.background.strip_mask);
  save_atomic(o.out / (e.stem + "_circles.png"), sal.circles.probability_map);
  char name[64];
  for (std::size_t l = 0; l < sal.level_maps.size(); ++l) {
    std::snprintf(name, sizeof name, "_level%02zu.png", l);
    save_atomic(o.out / (e.stem + name), sal.level_maps[l]);
  }
  for (const auto& [it, phi] : seg.snapshots) {
    BinaryMask inside(phi.width(), phi.height());
    for (std::size_t i = 0; i < inside.size(); ++i) inside[i] = phi[i] < 0.0;
    std::snprintf(name, sizeof name, "_phi%04d.png", it);
    save_atomic(o.out / (e.stem + name), inside);
  }
}

int cmd_segment(const SegmentOptions& o) {
  const SaliencyModel model = load_model(o.model);
  const auto entries = index_inputs(o.in);
  if (entries.empty()) throw Error("no images found in '" + o.in.string() + "'");
  fs::create_directories(o.out);
  std::atomic<std::size_t> failed{0};
  // images run one per worker; inner stages stay single-threaded
  parallel_for(entries.size(), o.jobs, [&](std::size_t i) {
    try {
      segment_one(model, entries[i], o);
      log(entries[i].stem, ": done");
    } catch (const std::exception& ex) {
      ++failed;
      log(entries[i].stem, ": FAILED: ", ex.what());
    }
  });
  log("segmented ", entries.size() - failed, " of ", entries.size(), " images (", failed.load(), " failed)");
  return failed ? 1 : 0;
}

// ---------------------------------------------------------------- eval

struct EvalOptions {
  fs::path pred, gt, out;
  std::optional<fs::path> saliency;
  int jobs = 1;
};

std::string strip_suffix(const std::string& stem, std::initializer_list<const char*> suffixes) {
  for (const char* s : suffixes) {
    const std::string suf(s);
    if (stem.size() > suf.size() && stem.compare(stem.size() - suf.size(), suf.size(), suf) == 0)
      return stem.substr(0, stem.size() - suf.size());
  }
  return stem;
}

std::map<std::string, fs::path> pngs_by_stem(const fs::path& dir, const char* preferred_suffix) {
  if (!fs::is_directory(dir)) throw Error("'" + dir.string() + "' is not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".png" && e.path().filename().string().front() != '.')
      files.push_back(e.path());
  const std::string pref(preferred_suffix);
  const bool has_pref = std::any_of(files.begin(), files.end(), [&](const fs::path& p) {
    const std::string s = p.stem().string();
    return s.size() > pref.size() && s.compare(s.size() - pref.size(), pref.size(), pref) == 0;
  });
  std::map<std::string, fs::path> out;
  for (const auto& p : files) {
    const std::string s = p.stem().string();
    const std::string key = strip_suffix(s, {preferred_suffix});
    if (has_pref && key == s) continue;
    out[key] = p;
  }
  return out;
}

int cmd_eval(const EvalOptions& o) {
  const auto pred = pngs_by_stem(o.pred, "_final");
  const fs::path gt_dir = fs::is_directory(o.gt / "masks") ? o.gt / "masks" : o.gt;
  const auto gt = pngs_by_stem(gt_dir, "_segmentation");
  std::vector<std::string> both, only_pred, only_gt;
  for (const auto& [k, _] : pred) (gt.count(k) ? both : only_pred).push_back(k);
  for (const auto& [k, _] : gt)
    if (!pred.count(k)) only_gt.push_back(k);
  auto join = [](const std::vector<std::string>& v) {
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : ", ") + x;
    return s.empty() ? std::string("(none)") : s;
  };
  if (both.empty())
    throw Error("no common stems between predictions and ground truth\n  predictions: " + join(only_pred) +
                "\n  ground truth: " + join(only_gt));
  if (!only_pred.empty()) log("predictions without ground truth: ", join(only_pred));
  if (!only_gt.empty()) log("ground truth without predictions: ", join(only_gt));

  std::vector<EvalCase> cases(both.size());
  std::vector<double> aucs(both.size(), -1.0);
  std::atomic<std::size_t> failed{0};
  std::vector<char> ok(both.size(), 0);
  parallel_for(both.size(), o.jobs, [&](std::size_t i) {
    const auto& k = both[i];
    try {
      cases[i] = {k, io::load_mask(pred.at(k)), io::load_mask(gt.at(k))};
      if (o.saliency) {
        const fs::path sp = *o.saliency / (k + "_saliency.png");
        if (fs::exists(sp)) {
          const RasterImage s = io::load_image(sp);
          aucs[i] = roc_auc(s.channel(0), cases[i].gt).auc;
        }
      }
      ok[i] = 1;
    } catch (const std::exception& ex) {
      ++failed;
      log(k, ": FAILED: ", ex.what());
    }
  });
  std::vector<EvalCase> good;
  for (std::size_t i = 0; i < cases.size(); ++i)
    if (ok[i]) good.push_back(std::move(cases[i]));
  if (good.empty()) throw Error("no pair could be evaluated");
  const BatchReport report = batch_evaluate(good, o.jobs);
  atomic_write(o.out, [&](const fs::path& tmp) {
    std::ofstream os(tmp);
    if (!os) throw Error("cannot write '" + tmp.string() + "'");
    write_metrics_csv(os, report);
    os.close();
    if (!os) throw Error("failed to write '" + tmp.string() + "'");
  });
  const auto& m = report.mean;
  log("evaluated ", good.size(), " images: dsc ", m.dsc, " jsi ", m.jsi, " acc ", m.acc, " sens ", m.sens, " spec ",
      m.spec);
  double auc = 0.0;
  std::size_t n = 0;
  for (double a : aucs)
    if (a >= 0.0) {
      auc += a;
      ++n;
    }
  if (n) log("mean saliency AUC over ", n, " maps: ", auc / static_cast<double>(n));
  const bool mismatched = !only_pred.empty() || !only_gt.empty();
  return failed || mismatched ? 1 : 0;
}

// ---------------------------------------------------------------- synth

SynthSpec parse_synth_spec(const std::string& text) {
  using nlohmann::json;
  std::string body = text;
  if (!text.empty() && text.front() != '{') {
    std::ifstream is(text);
    if (!is) throw Error("cannot read synth spec '" + text + "'");
    body.assign(std::istreambuf_iterator<char>(is), {});
  }
  json j;
  try {
    j = json::parse(body.empty() ? "{}" : body);
  } catch (const json::exception& e) {
    throw Error(std::string("invalid synth spec: ") + e.what());
  }
  if (!j.is_object()) throw Error("synth spec must be a JSON object");
  SynthSpec s;
  if (j.value("all_artifacts", false)) s = SynthSpec::all_artifacts(s.seed, s.count);
  for (const auto& [key, v] : j.items()) {
    try {
      if (key == "all_artifacts") continue;
      else if (key == "seed") s.seed = v.get<std::uint64_t>();
      else if (key == "count") s.count = v.get<int>();
      else if (key == "width") s.width = v.get<int>();
      else if (key == "height") s.height = v.get<int>();
      else if (key == "min_area_fraction") s.min_area_fraction = v.get<double>();
      else if (key == "max_area_fraction") s.max_area_fraction = v.get<double>();
      else if (key == "min_contrast") s.min_contrast = v.get<double>();
      else if (key == "max_contrast") s.max_contrast = v.get<double>();
      else if (key == "extreme_fraction") s.extreme_fraction = v.get<double>();
      else if (key == "extreme_min_contrast") s.extreme_min_contrast = v.get<double>();
      else if (key == "extreme_max_contrast") s.extreme_max_contrast = v.get<double>();
      else if (key == "min_red_absorption") s.min_red_absorption = v.get<double>();
      else if (key == "max_red_absorption") s.max_red_absorption = v.get<double>();
      else if (key == "hair") s.hair = v.get<bool>();
      else if (key == "color_chart") s.color_chart = v.get<bool>();
      else if (key == "dark_corners") s.dark_corners = v.get<bool>();
      else if (key == "color_cast") s.color_cast = v.get<bool>();
      else if (key == "cast_strength") s.cast_strength = v.get<double>();
      else throw Error("unknown synth spec key '" + key + "'");
    } catch (const json::exception&) {
      throw Error("synth spec key '" + key + "' has the wrong type");
    }
  }
  return s;
}

struct SynthOptions {
  std::string spec;
  fs::path out;
  std::optional<std::uint64_t> seed;
  std::optional<int> count;
  int jobs = 1;
};

int cmd_synth(const SynthOptions& o) {
  SynthSpec s = parse_synth_spec(o.spec);
  if (o.seed) s.seed = *o.seed;
  if (o.count) s.count = *o.count;
  const auto samples = generate(s, o.jobs);
  fs::create_directories(o.out / "images");
  fs::create_directories(o.out / "masks");
  parallel_for(samples.size(), o.jobs, [&](std::size_t i) {
    save_atomic(o.out / "images" / (samples[i].id + ".png"), samples[i].image);
    save_atomic(o.out / "masks" / (samples[i].id + "_segmentation.png"), samples[i].gt);
  });
  log("wrote ", samples.size(), " synthetic images to ", o.out.string());
  return 0;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Saliency-driven lesion segmentation"};
  app.require_subcommand(1);
  app.fallthrough();
  int jobs = default_jobs();
  app.add_option("--jobs", jobs, "Worker threads (default: SALMAP_JOBS or 1)")->check(CLI::Range(1, 1024));

  TrainOptions train;
  auto* t = app.add_subcommand("train", "Train a saliency model on images/ + masks/");
  t->add_option("--data", train.data, "Dataset directory")->required();
  t->add_option("--out", train.out, "Model file to write")->required();
  t->add_option("--levels", train.levels, "Segmentation levels")->capture_default_str();
  t->add_option("--trees", train.trees, "Trees in the forest")->capture_default_str();
  t->add_option("--seed", train.seed, "Random seed")->capture_default_str();
  t->add_flag("--no-color-constancy", train.no_color_constancy, "Skip Shades-of-Gray correction");
  t->add_option("--hair-hook", train.hair_hook, "Hair removal hook")->capture_default_str();

  SegmentOptions seg;
  auto* s = app.add_subcommand("segment", "Segment one image or a directory");
  s->add_option("--model", seg.model, "Model file")->required();
  s->add_option("--in", seg.in, "Image or directory")->required();
  s->add_option("--out", seg.out, "Output directory")->required();
  s->add_flag("--dump-intermediate", seg.dump, "Also write strip, circle, level and level-set maps");

  EvalOptions ev;
  std::string saliency_dir;
  auto* e = app.add_subcommand("eval", "Compare predicted masks with ground truth");
  e->add_option("--pred", ev.pred, "Directory of predicted masks")->required();
  e->add_option("--gt", ev.gt, "Directory of ground-truth masks (or dataset root)")->required();
  e->add_option("--out", ev.out, "CSV file to write")->required();
  e->add_option("--saliency", saliency_dir, "Directory of <stem>_saliency.png maps for AUC");

  SynthOptions syn;
  std::uint64_t syn_seed = 0;
  int syn_count = 0;
  auto* y = app.add_subcommand("synth", "Write a synthetic dataset");
  y->add_option("--spec", syn.spec, "JSON object or path to a JSON file");
  y->add_option("--out", syn.out, "Output directory")->required();
  auto* seed_opt = y->add_option("--seed", syn_seed, "Override the spec seed");
  auto* count_opt = y->add_option("--count", syn_count, "Override the spec count");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err, std::cerr, std::cerr);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*t) {
      train.jobs = jobs;
      return cmd_train(train);
    }
    if (*s) {
      seg.jobs = jobs;
      return cmd_segment(seg);
    }
    if (*e) {
      ev.jobs = jobs;
      if (!saliency_dir.empty()) ev.saliency = saliency_dir;
      return cmd_eval(ev);
    }
    if (*y) {
      syn.jobs = jobs;
      if (*seed_opt) syn.seed = syn_seed;
      if (*count_opt) syn.count = syn_count;
      return cmd_synth(syn);
    }
  } catch (const std::exception& ex) {
    log("error: ", ex.what());
    return 2;
  }
  return 2;
}

}  // namespace salmap
