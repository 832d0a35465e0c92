#include "salmap/forest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <thread>

#include "salmap/imgcore/raster.hpp"

namespace salmap {

void FeatureMatrix::append(std::span<const double> values) {
  if (rows == 0 && cols == 0) cols = values.size();
  if (values.size() != cols) throw Error("feature row has " + std::to_string(values.size()) + " columns, expected " +
                                         std::to_string(cols));
  data.insert(data.end(), values.begin(), values.end());
  ++rows;
}

double RegressionTree::predict(std::span<const double> x) const {
  std::size_t i = 0;
  while (nodes[i].feature >= 0) {
    const auto& n = nodes[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.value ? n.left : n.right);
  }
  return nodes[i].value;
}

std::size_t RegressionTree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.feature < 0; }));
}

std::size_t RegressionTree::depth() const {
  if (nodes.empty()) return 0;
  std::vector<std::size_t> d(nodes.size(), 0);
  std::size_t best = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {  // children always follow parents
    best = std::max(best, d[i]);
    if (nodes[i].feature >= 0) {
      d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
      d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
    }
  }
  return best;
}

double ForestModel::predict(std::span<const double> x) const {
  if (x.size() != feature_count)
    throw Error("forest expects " + std::to_string(feature_count) + " features, got " + std::to_string(x.size()));
  if (trees.empty()) throw Error("forest has no trees");
  double s = 0.0;
  for (const auto& t : trees) s += t.predict(x);
  return s / static_cast<double>(trees.size());
}

std::vector<double> ForestModel::predict(const FeatureMatrix& x) const {
  std::vector<double> out(x.rows);
  for (std::size_t i = 0; i < x.rows; ++i) out[i] = predict(x.row(i));
  return out;
}

namespace {

struct Shared {
  const FeatureMatrix& x;
  std::span<const double> y;
  const ForestConfig& cfg;
  std::size_t mtry;
  std::vector<std::vector<std::uint32_t>> order;  // rows sorted by each feature
};

class TreeBuilder {
 public:
  TreeBuilder(const Shared& s, std::size_t tree_index)
      : s_(s), rng_(s.cfg.seed + tree_index), n_(s.x.rows), f_(s.x.cols) {}

  RegressionTree build(std::vector<std::uint8_t>& in_bag) {
    // bootstrap: sample position -> row
    std::vector<std::uint32_t> mult(n_, 0);
    std::uniform_int_distribution<std::size_t> pick(0, n_ - 1);
    for (std::size_t i = 0; i < n_; ++i) ++mult[pick(rng_)];
    rows_.clear();
    std::vector<std::uint32_t> first(n_);
    for (std::size_t r = 0; r < n_; ++r) {
      first[r] = static_cast<std::uint32_t>(rows_.size());
      for (std::uint32_t k = 0; k < mult[r]; ++k) rows_.push_back(static_cast<std::uint32_t>(r));
    }
    in_bag.assign(n_, 0);
    for (std::size_t r = 0; r < n_; ++r) in_bag[r] = mult[r] > 0;

    // per-feature sample positions in ascending feature order
    lists_.assign(f_, std::vector<std::uint32_t>(n_));
    for (std::size_t f = 0; f < f_; ++f) {
      auto& list = lists_[f];
      std::size_t at = 0;
      for (std::uint32_t r : s_.order[f])
        for (std::uint32_t k = 0; k < mult[r]; ++k) list[at++] = first[r] + k;
    }
    goes_left_.assign(n_, 0);
    buffer_.resize(n_);
    features_.resize(f_);

    RegressionTree tree;
    struct Task {
      std::size_t node, begin, end;
    };
    std::vector<Task> stack{{0, 0, n_}};
    tree.nodes.emplace_back();
    while (!stack.empty()) {
      const Task t = stack.back();
      stack.pop_back();
      const Split sp = best_split(t.begin, t.end);
      TreeNode& node = tree.nodes[t.node];
      if (sp.feature < 0) {
        node.value = sp.mean;
        continue;
      }
      node.feature = sp.feature;
      node.value = sp.threshold;
      const std::size_t mid = partition(t.begin, t.end, static_cast<std::size_t>(sp.feature), sp.threshold);
      node.left = static_cast<std::int32_t>(tree.nodes.size());
      node.right = node.left + 1;
      const auto left = static_cast<std::size_t>(node.left);
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      stack.push_back({left + 1, mid, t.end});
      stack.push_back({left, t.begin, mid});
    }
    return tree;
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double mean = 0.0;
  };

  double value(std::size_t pos, std::size_t f) const { return s_.x(rows_[pos], f); }
  double label(std::size_t pos) const { return s_.y[rows_[pos]]; }

  Split best_split(std::size_t b, std::size_t e) {
    Split out;
    const std::size_t n = e - b;
    double sum = 0.0, sq = 0.0;
    for (std::size_t i = b; i < e; ++i) {
      const double v = label(lists_[0][i]);
      sum += v;
      sq += v * v;
    }
    out.mean = sum / static_cast<double>(n);
    const double sse = std::max(0.0, sq - sum * sum / static_cast<double>(n));
    if (n < static_cast<std::size_t>(s_.cfg.min_node_size) || sse / static_cast<double>(n) < s_.cfg.min_variance)
      return out;

    // mtry candidates in ascending index order; when none of them varies in
    // this node, further features are drawn one at a time until one does.
    std::iota(features_.begin(), features_.end(), 0u);
    for (std::size_t k = 0; k < s_.mtry; ++k) draw(k);
    std::sort(features_.begin(), features_.begin() + static_cast<std::ptrdiff_t>(s_.mtry));
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < s_.mtry; ++k) scan(features_[k], b, e, sum, sq, best, out);
    for (std::size_t k = s_.mtry; out.feature < 0 && k < f_; ++k) {
      draw(k);
      scan(features_[k], b, e, sum, sq, best, out);
    }
    return out;
  }

  void draw(std::size_t k) {
    std::uniform_int_distribution<std::size_t> d(k, f_ - 1);
    std::swap(features_[k], features_[d(rng_)]);
  }

  void scan(std::size_t f, std::size_t b, std::size_t e, double sum, double sq, double& best, Split& out) const {
    const auto& list = lists_[f];
    if (value(list[b], f) == value(list[e - 1], f)) return;
    double ls = 0.0, lq = 0.0;
    for (std::size_t i = b; i + 1 < e; ++i) {
      const double v = label(list[i]);
      ls += v;
      lq += v * v;
      const double xv = value(list[i], f), xn = value(list[i + 1], f);
      if (xv == xn) continue;
      const double nl = static_cast<double>(i + 1 - b), nr = static_cast<double>(e - i - 1);
      const double rs = sum - ls, rq = sq - lq;
      const double cost = (lq - ls * ls / nl) + (rq - rs * rs / nr);
      if (cost < best) {
        best = cost;
        out.feature = static_cast<int>(f);
        out.threshold = 0.5 * (xv + xn);
        // midpoint can round onto the upper value; keep the split non-empty
        if (!(out.threshold < xn)) out.threshold = xv;
      }
    }
  }

  std::size_t partition(std::size_t b, std::size_t e, std::size_t f, double thr) {
    std::size_t nl = 0;
    for (std::size_t i = b; i < e; ++i) {
      const std::uint32_t p = lists_[0][i];
      goes_left_[p] = value(p, f) <= thr;
      nl += goes_left_[p];
    }
    for (auto& list : lists_) {
      std::size_t l = b, r = b + nl;
      for (std::size_t i = b; i < e; ++i) {
        const std::uint32_t p = list[i];
        buffer_[goes_left_[p] ? l++ : r++] = p;
      }
      std::copy(buffer_.begin() + static_cast<std::ptrdiff_t>(b), buffer_.begin() + static_cast<std::ptrdiff_t>(e),
                list.begin() + static_cast<std::ptrdiff_t>(b));
    }
    return b + nl;
  }

  const Shared& s_;
  std::mt19937_64 rng_;
  std::size_t n_, f_;
  std::vector<std::uint32_t> rows_;
  std::vector<std::vector<std::uint32_t>> lists_;
  std::vector<std::uint8_t> goes_left_;
  std::vector<std::uint32_t> buffer_;
  std::vector<std::uint32_t> features_;
};

}  // namespace

ForestModel train_forest(const FeatureMatrix& x, std::span<const double> y, const ForestConfig& cfg,
                         TrainingReport* report) {
  if (x.rows < 10) throw Error("forest training needs at least 10 samples, got " + std::to_string(x.rows));
  if (y.size() != x.rows) throw Error("label count does not match sample count");
  if (x.cols == 0) throw Error("forest training needs at least one feature");
  if (cfg.tree_count < 1) throw Error("tree_count must be at least 1");
  if (x.rows > std::numeric_limits<std::uint32_t>::max()) throw Error("too many samples");
  for (std::size_t r = 0; r < x.rows; ++r) {
    if (!(y[r] >= 0.0 && y[r] <= 1.0)) throw Error("label at row " + std::to_string(r) + " is outside [0,1]");
    for (std::size_t c = 0; c < x.cols; ++c)
      if (!std::isfinite(x(r, c)))
        throw Error("non-finite feature at row " + std::to_string(r) + ", column " + std::to_string(c));
  }

  std::size_t mtry = cfg.features_per_split > 0 ? static_cast<std::size_t>(cfg.features_per_split) : x.cols / 3;
  mtry = std::clamp<std::size_t>(mtry, 1, x.cols);

  Shared shared{x, y, cfg, mtry, std::vector<std::vector<std::uint32_t>>(x.cols)};
  for (std::size_t f = 0; f < x.cols; ++f) {
    auto& o = shared.order[f];
    o.resize(x.rows);
    std::iota(o.begin(), o.end(), 0u);
    std::stable_sort(o.begin(), o.end(), [&](std::uint32_t a, std::uint32_t b) { return x(a, f) < x(b, f); });
  }

  const auto trees = static_cast<std::size_t>(cfg.tree_count);
  ForestModel model;
  model.feature_count = x.cols;
  model.seed = cfg.seed;
  model.trees.resize(trees);
  std::vector<std::vector<std::uint8_t>> in_bag(trees);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t; (t = next++) < trees;) {
      TreeBuilder b(shared, t);
      model.trees[t] = b.build(in_bag[t]);
    }
  };
  const std::size_t jobs = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(1, cfg.jobs)), 1, trees);
  std::vector<std::thread> pool;
  for (std::size_t j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  if (report) {
    report->oob_prediction.assign(x.rows, std::numeric_limits<double>::quiet_NaN());
    double se = 0.0;
    std::size_t used = 0;
    for (std::size_t r = 0; r < x.rows; ++r) {
      double s = 0.0;
      std::size_t k = 0;
      for (std::size_t t = 0; t < trees; ++t)
        if (!in_bag[t][r]) {
          s += model.trees[t].predict(x.row(r));
          ++k;
        }
      if (k == 0) continue;
      const double p = s / static_cast<double>(k);
      report->oob_prediction[r] = p;
      se += (p - y[r]) * (p - y[r]);
      ++used;
    }
    report->oob_rows = used;
    report->oob_mse = used ? se / static_cast<double>(used) : 0.0;
  }
  return model;
}

}  // namespace salmap
