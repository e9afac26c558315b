#pragma once

// Extremely randomized trees for regression.
//
// Every tree is grown on the full training sample (no bootstrap). At a node
// with more than `min_samples_split` samples and non-constant targets, K
// candidate features are drawn without replacement among the features that
// are non-constant in the node; each gets one cut-point drawn uniformly in the
// open interval (min, max) of that feature in the node. The candidate with the
// largest variance reduction
//   Var(S) - |S_L|/|S| Var(S_L) - |S_R|/|S| Var(S_R)
// is kept (ties: lower feature index, then lower threshold). Samples with
// x[f] <= threshold go left. Leaves predict the mean target of the node and
// the forest predicts the mean over trees.
//
// Tree t draws from its own stream seeded with derive_seed(params.seed, t),
// so fits are identical regardless of how many threads build the trees.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "soilfusion/matrix.hpp"

namespace soilfusion {

struct ForestParams {
  std::size_t n_trees = 100;
  std::optional<std::size_t> k_features;  // unset: all features
  std::size_t min_samples_split = 5;  // nodes with at most this many samples become leaves
  std::uint64_t seed = 0;

  void validate(std::size_t n_features) const;
  std::size_t resolved_k(std::size_t n_features) const { return k_features.value_or(n_features); }
};

struct TreeNode {
  int feature = -1;  // -1 for leaves
  double threshold = 0.0;
  std::int32_t right = -1;  // left child is always the next node (preorder)
  double value = 0.0;       // mean target of the node's samples
  double impurity_decrease = 0.0;
  std::size_t n_samples = 0;

  bool is_leaf() const { return feature < 0; }
};

struct Tree {
  std::vector<TreeNode> nodes;  // preorder, nodes[0] is the root

  const TreeNode& leaf_for(std::span<const double> row) const;
};

class ForestModel {
 public:
  // Validates node structure and computes normalized impurity importances.
  static ForestModel from_trees(ForestParams params, std::size_t n_features, std::vector<Tree> trees);

  const ForestParams& params() const { return params_; }
  std::size_t n_features() const { return n_features_; }
  const std::vector<Tree>& trees() const { return trees_; }
  const std::vector<double>& feature_importances() const { return importances_; }

  double predict(std::span<const double> row) const;

 private:
  ForestModel() = default;

  ForestParams params_;
  std::size_t n_features_ = 0;
  std::vector<Tree> trees_;
  std::vector<double> importances_;
};

// `n_threads` > 1 builds trees concurrently; the result does not depend on it.
ForestModel fit_extra_trees(MatrixView x, std::span<const double> y, const ForestParams& params,
                            unsigned n_threads = 1);

std::vector<double> predict_forest(const ForestModel& model, MatrixView x);

// Per-feature sum over nodes of (n_node / n_total) * impurity_decrease,
// accumulated over trees and normalized to 1; all zero when no tree split.
std::vector<double> feature_importance(const ForestModel& model);

// Versioned JSON document: params, preorder node arrays per tree, importances.
std::string serialize_forest(const ForestModel& model);
ForestModel deserialize_forest(std::string_view json_text);

}  // namespace soilfusion
