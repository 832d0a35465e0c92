#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace salmap {

/// Dense row-major sample matrix.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  FeatureMatrix() = default;
  FeatureMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
  std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  void append(std::span<const double> values);
};

struct ForestConfig {
  int tree_count = 200;
  int features_per_split = 0;   // 0 = floor(cols / 3)
  int min_node_size = 5;        // nodes smaller than this become leaves
  double min_variance = 1e-8;
  std::uint64_t seed = 1;
  int jobs = 1;
};

/// feature < 0 marks a leaf; `value` is the threshold of an internal node
/// (x <= value goes left) or the prediction of a leaf.
struct TreeNode {
  std::int32_t feature = -1;
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0.0;
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double predict(std::span<const double> x) const;
  std::size_t leaf_count() const;
  std::size_t depth() const;
};

struct ForestModel {
  std::vector<RegressionTree> trees;
  std::size_t feature_count = 0;
  std::uint64_t seed = 0;

  double predict(std::span<const double> x) const;
  std::vector<double> predict(const FeatureMatrix& x) const;
};

struct TrainingReport {
  std::vector<double> oob_prediction;  // NaN for rows that were always in-bag
  double oob_mse = 0.0;
  std::size_t oob_rows = 0;
};

/// Bootstrap-aggregated CART regression trees with variance-reduction splits.
/// Deterministic for a given seed regardless of `jobs`.
ForestModel train_forest(const FeatureMatrix& x, std::span<const double> y, const ForestConfig& cfg,
                         TrainingReport* report = nullptr);

}  // namespace salmap
