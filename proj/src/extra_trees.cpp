#include "soilfusion/extra_trees.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include <json.hpp>

#include "soilfusion/error.hpp"
#include "soilfusion/rng.hpp"

namespace soilfusion {

namespace {

constexpr std::string_view kFormat = "soilfusion.extra_trees";
constexpr int kFormatVersion = 1;

struct Split {
  std::size_t feature = 0;
  double threshold = 0.0;
  double score = 0.0;
};

// Higher score wins; exact ties go to the lower feature index, then the lower
// threshold.
bool better(const Split& a, const Split& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.feature != b.feature) return a.feature < b.feature;
  return a.threshold < b.threshold;
}

// Grows one tree over sample indices; nodes are appended in preorder.
class TreeBuilder {
 public:
  TreeBuilder(MatrixView x, std::span<const double> y, const ForestParams& params, std::uint64_t seed)
      : x_(x), y_(y), k_(params.resolved_k(x.cols())), min_split_(params.min_samples_split), rng_(seed) {}

  Tree build() {
    std::vector<std::size_t> idx(x_.rows());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    grow(idx, 0, idx.size());
    return std::move(tree_);
  }

 private:
  std::int32_t grow(std::vector<std::size_t>& idx, std::size_t begin, std::size_t end) {
    const std::size_t n = end - begin;
    double sum = 0.0;
    double lo = y_[idx[begin]];
    double hi = lo;
    for (std::size_t i = begin; i < end; ++i) {
      const double v = y_[idx[i]];
      sum += v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    const double mean = sum / static_cast<double>(n);

    const auto id = static_cast<std::int32_t>(tree_.nodes.size());
    TreeNode node;
    node.n_samples = n;
    // Rounding can push a mean of equal values past them.
    node.value = std::clamp(mean, lo, hi);
    tree_.nodes.push_back(node);

    if (n <= min_split_ || lo == hi) return id;
    const auto split = best_split(idx, begin, end, mean);
    if (!split) return id;

    const auto mid = std::partition(idx.begin() + static_cast<std::ptrdiff_t>(begin),
                                    idx.begin() + static_cast<std::ptrdiff_t>(end),
                                    [&](std::size_t i) { return x_(i, split->feature) <= split->threshold; });
    const auto split_at = static_cast<std::size_t>(mid - idx.begin());

    auto& self = tree_.nodes[static_cast<std::size_t>(id)];
    self.feature = static_cast<int>(split->feature);
    self.threshold = split->threshold;
    self.impurity_decrease = std::max(0.0, split->score);

    grow(idx, begin, split_at);
    const auto right = grow(idx, split_at, end);
    tree_.nodes[static_cast<std::size_t>(id)].right = right;
    return id;
  }

  std::optional<Split> best_split(const std::vector<std::size_t>& idx, std::size_t begin, std::size_t end,
                                  double mean) {
    const std::size_t d = x_.cols();
    std::vector<double> fmin(d, 0.0), fmax(d, 0.0);
    for (std::size_t j = 0; j < d; ++j) fmin[j] = fmax[j] = x_(idx[begin], j);
    for (std::size_t i = begin + 1; i < end; ++i) {
      const auto row = x_.row(idx[i]);
      for (std::size_t j = 0; j < d; ++j) {
        fmin[j] = std::min(fmin[j], row[j]);
        fmax[j] = std::max(fmax[j], row[j]);
      }
    }
    std::vector<std::size_t> usable;
    for (std::size_t j = 0; j < d; ++j) {
      if (fmin[j] < fmax[j]) usable.push_back(j);
    }
    if (usable.empty()) return std::nullopt;

    // Partial Fisher-Yates: the first k entries become the candidates.
    const std::size_t k = std::min(k_, usable.size());
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng_.below(usable.size() - i));
      std::swap(usable[i], usable[j]);
    }

    const double n = static_cast<double>(end - begin);
    double sse = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      const double r = y_[idx[i]] - mean;
      sse += r * r;
    }
    const double parent_var = sse / n;

    std::optional<Split> best;
    for (std::size_t c = 0; c < k; ++c) {
      const std::size_t f = usable[c];
      const double threshold = rng_.uniform_open(fmin[f], fmax[f]);
      const Split candidate{f, threshold, parent_var - weighted_child_variance(idx, begin, end, f, threshold)};
      if (!best || better(candidate, *best)) best = candidate;
    }
    return best;
  }

  // (|S_L| Var(S_L) + |S_R| Var(S_R)) / |S|, two-pass per side.
  double weighted_child_variance(const std::vector<std::size_t>& idx, std::size_t begin, std::size_t end,
                                 std::size_t f, double threshold) const {
    double sum_l = 0.0, sum_r = 0.0;
    std::size_t n_l = 0, n_r = 0;
    for (std::size_t i = begin; i < end; ++i) {
      if (x_(idx[i], f) <= threshold) {
        sum_l += y_[idx[i]];
        ++n_l;
      } else {
        sum_r += y_[idx[i]];
        ++n_r;
      }
    }
    const double mean_l = n_l ? sum_l / static_cast<double>(n_l) : 0.0;
    const double mean_r = n_r ? sum_r / static_cast<double>(n_r) : 0.0;
    double sse = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      const double m = x_(idx[i], f) <= threshold ? mean_l : mean_r;
      const double r = y_[idx[i]] - m;
      sse += r * r;
    }
    return sse / static_cast<double>(end - begin);
  }

  MatrixView x_;
  std::span<const double> y_;
  std::size_t k_;
  std::size_t min_split_;
  Rng rng_;
  Tree tree_;
};

std::vector<double> compute_importances(const std::vector<Tree>& trees, std::size_t n_features) {
  std::vector<double> imp(n_features, 0.0);
  for (const auto& tree : trees) {
    const double total = static_cast<double>(tree.nodes.front().n_samples);
    for (const auto& node : tree.nodes) {
      if (node.is_leaf()) continue;
      imp[static_cast<std::size_t>(node.feature)] +=
          static_cast<double>(node.n_samples) / total * node.impurity_decrease;
    }
  }
  const double sum = std::accumulate(imp.begin(), imp.end(), 0.0);
  if (sum > 0.0) {
    for (auto& v : imp) v /= sum;
  }
  return imp;
}

void check_tree(const Tree& tree, std::size_t n_features) {
  const auto& nodes = tree.nodes;
  if (nodes.empty()) throw SchemaError("tree has no nodes");
  // Every internal node's left child follows it and its right child lies
  // further on; a well-formed preorder array visits each node exactly once.
  std::vector<std::size_t> stack{0};
  std::size_t visited = 0;
  std::size_t expected = 0;
  while (!stack.empty()) {
    const std::size_t i = stack.back();
    stack.pop_back();
    if (i != expected) throw SchemaError("tree nodes are not in preorder");
    ++expected;
    ++visited;
    const auto& node = nodes[i];
    if (node.n_samples == 0) throw SchemaError("tree node with zero samples");
    if (!std::isfinite(node.value)) throw SchemaError("non-finite leaf value");
    if (node.is_leaf()) continue;
    if (static_cast<std::size_t>(node.feature) >= n_features) throw SchemaError("split feature out of range");
    if (node.right <= static_cast<std::int32_t>(i) + 1 || static_cast<std::size_t>(node.right) >= nodes.size()) {
      throw SchemaError("invalid right child index");
    }
    if (!(node.impurity_decrease >= 0.0)) throw SchemaError("negative impurity decrease");
    stack.push_back(static_cast<std::size_t>(node.right));
    stack.push_back(i + 1);
  }
  if (visited != nodes.size()) throw SchemaError("tree contains unreachable nodes");
}

}  // namespace

void ForestParams::validate(std::size_t n_features) const {
  if (n_trees == 0) throw ConfigError("number of trees must be positive");
  if (min_samples_split < 1) throw ConfigError("min_samples_split must be at least 1");
  if (k_features && (*k_features == 0 || *k_features > n_features)) {
    throw ConfigError("k_features must lie in [1, " + std::to_string(n_features) + "]");
  }
}

const TreeNode& Tree::leaf_for(std::span<const double> row) const {
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    const auto& n = nodes[i];
    i = row[static_cast<std::size_t>(n.feature)] <= n.threshold ? i + 1 : static_cast<std::size_t>(n.right);
  }
  return nodes[i];
}

ForestModel ForestModel::from_trees(ForestParams params, std::size_t n_features, std::vector<Tree> trees) {
  if (trees.empty()) throw SchemaError("forest has no trees");
  for (const auto& t : trees) check_tree(t, n_features);
  ForestModel m;
  m.params_ = params;
  m.n_features_ = n_features;
  m.importances_ = compute_importances(trees, n_features);
  m.trees_ = std::move(trees);
  return m;
}

double ForestModel::predict(std::span<const double> row) const {
  if (row.size() != n_features_) {
    throw DimensionError("forest expects " + std::to_string(n_features_) + " features, got " +
                         std::to_string(row.size()));
  }
  double sum = 0.0;
  double lo = 0.0, hi = 0.0;
  for (std::size_t t = 0; t < trees_.size(); ++t) {
    const double v = trees_[t].leaf_for(row).value;
    sum += v;
    lo = t == 0 ? v : std::min(lo, v);
    hi = t == 0 ? v : std::max(hi, v);
  }
  return std::clamp(sum / static_cast<double>(trees_.size()), lo, hi);
}

ForestModel fit_extra_trees(MatrixView x, std::span<const double> y, const ForestParams& params,
                            unsigned n_threads) {
  if (x.rows() == 0 || x.cols() == 0) throw InsufficientDataError("extra trees need at least one row and one feature");
  if (y.size() != x.rows()) throw DimensionError("target length does not match row count");
  params.validate(x.cols());
  for (double v : x.data()) {
    if (!std::isfinite(v)) throw SchemaError("non-finite feature value in forest input");
  }
  for (double v : y) {
    if (!std::isfinite(v)) throw SchemaError("non-finite target value in forest input");
  }

  std::vector<Tree> trees(params.n_trees);
  auto build_range = [&](std::size_t first, std::size_t stride) {
    for (std::size_t t = first; t < trees.size(); t += stride) {
      trees[t] = TreeBuilder(x, y, params, derive_seed(params.seed, t)).build();
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(n_threads, 1, trees.size());
  if (workers == 1) {
    build_range(0, 1);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(build_range, w, workers);
  }
  return ForestModel::from_trees(params, x.cols(), std::move(trees));
}

std::vector<double> predict_forest(const ForestModel& model, MatrixView x) {
  if (x.cols() != model.n_features()) {
    throw DimensionError("forest expects " + std::to_string(model.n_features()) + " features, got " +
                         std::to_string(x.cols()));
  }
  std::vector<double> out;
  out.reserve(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) out.push_back(model.predict(x.row(i)));
  return out;
}

std::vector<double> feature_importance(const ForestModel& model) { return model.feature_importances(); }

std::string serialize_forest(const ForestModel& model) {
  using nlohmann::json;
  const auto& p = model.params();
  json doc;
  doc["format"] = kFormat;
  doc["version"] = kFormatVersion;
  doc["params"] = {{"n_trees", p.n_trees},
                   {"k_features", p.k_features ? json(*p.k_features) : json(nullptr)},
                   {"min_samples_split", p.min_samples_split},
                   {"seed", p.seed}};
  doc["n_features"] = model.n_features();
  doc["feature_importances"] = model.feature_importances();
  json trees = json::array();
  for (const auto& tree : model.trees()) {
    json feature = json::array(), threshold = json::array(), right = json::array(), value = json::array(),
         decrease = json::array(), samples = json::array();
    for (const auto& n : tree.nodes) {
      feature.push_back(n.feature);
      threshold.push_back(n.threshold);
      right.push_back(n.right);
      value.push_back(n.value);
      decrease.push_back(n.impurity_decrease);
      samples.push_back(n.n_samples);
    }
    trees.push_back({{"feature", feature},
                     {"threshold", threshold},
                     {"right", right},
                     {"value", value},
                     {"impurity_decrease", decrease},
                     {"n_samples", samples}});
  }
  doc["trees"] = std::move(trees);
  return doc.dump() + "\n";
}

ForestModel deserialize_forest(std::string_view json_text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(json_text);
    if (doc.at("format") != kFormat) throw SchemaError("not a forest document");
    if (doc.at("version") != kFormatVersion) {
      throw SchemaError("unsupported forest format version " + doc.at("version").dump());
    }
    ForestParams p;
    const auto& jp = doc.at("params");
    p.n_trees = jp.at("n_trees").get<std::size_t>();
    if (!jp.at("k_features").is_null()) p.k_features = jp.at("k_features").get<std::size_t>();
    p.min_samples_split = jp.at("min_samples_split").get<std::size_t>();
    p.seed = jp.at("seed").get<std::uint64_t>();
    const auto n_features = doc.at("n_features").get<std::size_t>();

    std::vector<Tree> trees;
    for (const auto& jt : doc.at("trees")) {
      const auto& feature = jt.at("feature");
      const std::size_t count = feature.size();
      for (const char* key : {"threshold", "right", "value", "impurity_decrease", "n_samples"}) {
        if (jt.at(key).size() != count) throw SchemaError(std::string("tree array length mismatch: ") + key);
      }
      Tree tree;
      tree.nodes.resize(count);
      for (std::size_t i = 0; i < count; ++i) {
        auto& n = tree.nodes[i];
        n.feature = feature[i].get<int>();
        n.threshold = jt["threshold"][i].get<double>();
        n.right = jt["right"][i].get<std::int32_t>();
        n.value = jt["value"][i].get<double>();
        n.impurity_decrease = jt["impurity_decrease"][i].get<double>();
        n.n_samples = jt["n_samples"][i].get<std::size_t>();
      }
      trees.push_back(std::move(tree));
    }
    if (trees.size() != p.n_trees) throw SchemaError("tree count does not match params");
    return ForestModel::from_trees(p, n_features, std::move(trees));
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed forest document: ") + e.what());
  }
}

}  // namespace soilfusion
