#pragma once

// Binary CART classifier: Gini splits at midpoints between distinct sorted
// values, greedy recursive partitioning, majority leaves.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "landchange/error.hpp"
#include "landchange/samples.hpp"

namespace landchange {

struct CartParams {
  std::size_t max_depth = 10;
  std::size_t min_samples_leaf = 1;
  std::size_t min_samples_split = 2;
  double min_impurity_decrease = 0.0;

  void validate() const {
    if (max_depth < 1) throw ValidationError("max_depth must be >= 1");
    if (min_samples_leaf < 1) throw ValidationError("min_samples_leaf must be >= 1");
    if (min_samples_split < 2) throw ValidationError("min_samples_split must be >= 2");
    if (!(min_impurity_decrease >= 0.0) || !std::isfinite(min_impurity_decrease)) {
      throw ValidationError("min_impurity_decrease must be a finite value >= 0");
    }
  }

  friend bool operator==(const CartParams&, const CartParams&) = default;
};

using ClassCounts = std::array<std::size_t, 2>;

/// 1 - sum_k p_k^2.
inline double gini(const ClassCounts& counts) {
  const std::size_t total = counts[0] + counts[1];
  if (total == 0) throw ValidationError("gini of an empty node is undefined");
  const double n = static_cast<double>(total);
  const double p0 = static_cast<double>(counts[0]) / n;
  const double p1 = static_cast<double>(counts[1]) / n;
  return 1.0 - (p0 * p0 + p1 * p1);
}

/// Majority class; ties resolve to 0.
inline int majority_class(const ClassCounts& counts) noexcept { return counts[1] > counts[0] ? 1 : 0; }

struct SplitCandidate {
  std::size_t feature = 0;
  double threshold = 0.0;
  double decrease = 0.0;
  friend bool operator==(const SplitCandidate&, const SplitCandidate&) = default;
};

struct TreeLeaf {
  int cls = 0;
  ClassCounts counts{};
  friend bool operator==(const TreeLeaf&, const TreeLeaf&) = default;
};

/// Rows with value[feature] <= threshold go left. Children are node indices.
struct TreeSplit {
  std::size_t feature = 0;
  double threshold = 0.0;
  std::size_t left = 0;
  std::size_t right = 0;
  friend bool operator==(const TreeSplit&, const TreeSplit&) = default;
};

using TreeNode = std::variant<TreeLeaf, TreeSplit>;

/// Nodes are stored in pre-order; nodes[0] is the root.
struct DecisionTree {
  std::vector<TreeNode> nodes;
  std::size_t feature_count = 0;
  CartParams params;

  /// Number of split levels on the longest root-to-leaf path.
  std::size_t depth() const { return nodes.empty() ? 0 : depth_from(0); }

  std::size_t leaf_count() const {
    return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(),
                                                  [](const TreeNode& n) { return std::holds_alternative<TreeLeaf>(n); }));
  }

  /// Index of the leaf a vector reaches. No validation.
  template <typename Vec>
  std::size_t leaf_index(const Vec& values) const noexcept {
    std::size_t i = 0;
    while (const auto* s = std::get_if<TreeSplit>(&nodes[i])) {
      i = static_cast<double>(values[s->feature]) <= s->threshold ? s->left : s->right;
    }
    return i;
  }

  template <typename Vec>
  int predict_unchecked(const Vec& values) const noexcept {
    return std::get<TreeLeaf>(nodes[leaf_index(values)]).cls;
  }

  friend bool operator==(const DecisionTree&, const DecisionTree&) = default;

private:
  std::size_t depth_from(std::size_t i) const {
    if (const auto* s = std::get_if<TreeSplit>(&nodes[i])) {
      return 1 + std::max(depth_from(s->left), depth_from(s->right));
    }
    return 0;
  }
};

namespace detail {

// Exact ordering of split quality. For a split with left counts (l0, l1) and
// right counts (r0, r1), the weighted child impurity is
//   n - [ (l0^2 + l1^2) / nL + (r0^2 + r1^2) / nR ]
// so a larger bracket means a larger impurity decrease. The bracket is a
// rational compared by cross-multiplication; with n < 2^24 every product fits
// in 128 bits.
struct SplitScore {
  unsigned __int128 num = 0;  // A*nR + B*nL
  unsigned __int128 den = 1;  // nL*nR

  static SplitScore of(const ClassCounts& left, const ClassCounts& right) {
    using u128 = unsigned __int128;
    const u128 nl = left[0] + left[1];
    const u128 nr = right[0] + right[1];
    const u128 a = u128(left[0]) * left[0] + u128(left[1]) * left[1];
    const u128 b = u128(right[0]) * right[0] + u128(right[1]) * right[1];
    return {a * nr + b * nl, nl * nr};
  }

  friend bool operator>(const SplitScore& x, const SplitScore& y) { return x.num * y.den > y.num * x.den; }
};

inline constexpr std::size_t kMaxTrainingRows = std::size_t{1} << 24;

inline double impurity_decrease(const ClassCounts& parent, const ClassCounts& left, const ClassCounts& right) {
  const double n = static_cast<double>(parent[0] + parent[1]);
  const double nl = static_cast<double>(left[0] + left[1]);
  const double nr = static_cast<double>(right[0] + right[1]);
  return gini(parent) - (nl / n) * gini(left) - (nr / n) * gini(right);
}

inline ClassCounts tally(const TrainingTable& table, std::span<const std::size_t> rows) {
  ClassCounts c{};
  for (std::size_t i : rows) ++c[static_cast<std::size_t>(table.rows[i].label)];
  return c;
}

struct FeatureBest {
  bool found = false;
  SplitScore score;
  SplitCandidate candidate;
};

inline double midpoint(double lo, double hi) {
  double t = std::midpoint(lo, hi);
  // t must separate lo (goes left) from hi (goes right).
  if (!(t >= lo && t < hi)) t = lo;
  return t;
}

/// Best admissible split on one feature; earliest (smallest) threshold wins ties.
inline FeatureBest best_on_feature(const TrainingTable& table, std::span<const std::size_t> rows,
                                   const ClassCounts& parent, std::size_t feature, const CartParams& params) {
  std::vector<std::pair<double, std::size_t>> sorted;
  sorted.reserve(rows.size());
  for (std::size_t i : rows) sorted.emplace_back(table.rows[i].values[feature], i);
  std::sort(sorted.begin(), sorted.end());

  FeatureBest best;
  ClassCounts left{};
  const std::size_t n = sorted.size();
  for (std::size_t k = 0; k + 1 < n; ++k) {
    ++left[static_cast<std::size_t>(table.rows[sorted[k].second].label)];
    if (!(sorted[k].first < sorted[k + 1].first)) continue;
    const std::size_t nl = k + 1;
    const std::size_t nr = n - nl;
    if (nl < params.min_samples_leaf || nr < params.min_samples_leaf) continue;
    const ClassCounts right{parent[0] - left[0], parent[1] - left[1]};
    const SplitScore score = SplitScore::of(left, right);
    if (!best.found || score > best.score) {
      best.found = true;
      best.score = score;
      best.candidate = {feature, midpoint(sorted[k].first, sorted[k + 1].first),
                        impurity_decrease(parent, left, right)};
    }
  }
  return best;
}

}  // namespace detail

/// Best split of the given rows, or nothing when the node is pure, no
/// admissible candidate exists, or the winner's decrease falls below
/// params.min_impurity_decrease. Ties go to the lowest feature, then the
/// smallest threshold. With workers > 1 the features are searched
/// concurrently and reduced in feature order, so the result is unchanged.
inline std::optional<SplitCandidate> best_split(const TrainingTable& table, std::span<const std::size_t> rows,
                                                const CartParams& params, unsigned workers = 1) {
  if (rows.size() < params.min_samples_split) {
    throw ValidationError(detail::concat("best_split needs at least ", params.min_samples_split, " rows, got ",
                                         rows.size()));
  }
  if (rows.size() >= detail::kMaxTrainingRows) {
    throw ValidationError(detail::concat("node of ", rows.size(), " rows exceeds the supported maximum"));
  }
  const ClassCounts parent = detail::tally(table, rows);
  if (parent[0] == 0 || parent[1] == 0) return std::nullopt;

  const std::size_t nf = table.feature_count;
  std::vector<detail::FeatureBest> per_feature(nf);
  const std::size_t threads = std::min<std::size_t>(std::max(1u, workers), nf);
  if (threads <= 1) {
    for (std::size_t f = 0; f < nf; ++f) per_feature[f] = detail::best_on_feature(table, rows, parent, f, params);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t f = t; f < nf; f += threads) {
          per_feature[f] = detail::best_on_feature(table, rows, parent, f, params);
        }
      });
    }
  }

  const detail::FeatureBest* winner = nullptr;
  for (const auto& fb : per_feature) {
    if (fb.found && (!winner || fb.score > winner->score)) winner = &fb;
  }
  if (!winner) return std::nullopt;
  if (params.min_impurity_decrease > 0.0 && winner->candidate.decrease < params.min_impurity_decrease) {
    return std::nullopt;
  }
  return winner->candidate;
}

namespace detail {

class TreeBuilder {
public:
  TreeBuilder(const TrainingTable& table, const CartParams& params, unsigned workers, DecisionTree& tree)
      : table_(table), params_(params), workers_(workers), tree_(tree) {}

  std::size_t build(std::vector<std::size_t> rows, std::size_t depth) {
    const ClassCounts counts = tally(table_, rows);
    const std::size_t index = tree_.nodes.size();
    tree_.nodes.emplace_back(TreeLeaf{majority_class(counts), counts});

    const bool pure = counts[0] == 0 || counts[1] == 0;
    if (pure || depth >= params_.max_depth || rows.size() < params_.min_samples_split) return index;
    const auto split = best_split(table_, rows, params_, workers_);
    if (!split) return index;

    std::vector<std::size_t> left, right;
    for (std::size_t i : rows) {
      (table_.rows[i].values[split->feature] <= split->threshold ? left : right).push_back(i);
    }
    rows = {};
    TreeSplit node{split->feature, split->threshold, 0, 0};
    node.left = build(std::move(left), depth + 1);
    node.right = build(std::move(right), depth + 1);
    tree_.nodes[index] = node;
    return index;
  }

private:
  const TrainingTable& table_;
  const CartParams& params_;
  unsigned workers_;
  DecisionTree& tree_;
};

}  // namespace detail

/// Grows a tree by recursive partitioning. Deterministic for a given table
/// and params, whatever the worker count.
inline DecisionTree train(const TrainingTable& table, const CartParams& params = {}, unsigned workers = 1) {
  params.validate();
  if (table.empty()) throw ValidationError("cannot train on an empty table");
  if (table.feature_count == 0) throw ValidationError("training table has no features");
  table.validate();
  if (table.size() >= detail::kMaxTrainingRows) {
    throw ValidationError(detail::concat("training table of ", table.size(), " rows exceeds the supported maximum"));
  }
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    for (double v : table.rows[i].values) {
      if (!std::isfinite(v)) throw ValidationError(detail::concat("table row ", i, " holds a non-finite value"));
    }
  }
  const std::size_t n0 = table.count_label(kNonUrban);
  if (n0 == 0 || n0 == table.size()) {
    throw ValidationError(detail::concat("training table holds a single label (", n0 == 0 ? 1 : 0,
                                         "); both classes are required"));
  }

  DecisionTree tree;
  tree.feature_count = table.feature_count;
  tree.params = params;
  std::vector<std::size_t> rows(table.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  detail::TreeBuilder(table, params, workers, tree).build(std::move(rows), 0);
  return tree;
}

inline int predict(const DecisionTree& tree, std::span<const double> features) {
  if (features.size() != tree.feature_count) {
    throw ValidationError(detail::concat("feature vector has ", features.size(), " values, tree expects ",
                                         tree.feature_count));
  }
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (!std::isfinite(features[i])) throw ValidationError(detail::concat("feature ", i, " is not finite"));
  }
  return tree.predict_unchecked(features);
}

// --- serialization -----------------------------------------------------------

inline nlohmann::json params_to_json(const CartParams& p) {
  return {{"max_depth", p.max_depth},
          {"min_samples_leaf", p.min_samples_leaf},
          {"min_samples_split", p.min_samples_split},
          {"min_impurity_decrease", p.min_impurity_decrease}};
}

/// Missing keys keep their defaults; unknown keys are rejected.
inline CartParams params_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("CART params must be a JSON object");
  CartParams p;
  for (const auto& [key, value] : j.items()) {
    auto count = [&](std::size_t& field) {
      if (!value.is_number_unsigned()) throw ValidationError(detail::concat("param \"", key, "\" must be a non-negative integer"));
      field = value.get<std::size_t>();
    };
    if (key == "max_depth") {
      count(p.max_depth);
    } else if (key == "min_samples_leaf") {
      count(p.min_samples_leaf);
    } else if (key == "min_samples_split") {
      count(p.min_samples_split);
    } else if (key == "min_impurity_decrease") {
      if (!value.is_number()) throw ValidationError("param \"min_impurity_decrease\" must be a number");
      p.min_impurity_decrease = value.get<double>();
    } else {
      throw ValidationError(detail::concat("unknown CART param \"", key, "\""));
    }
  }
  p.validate();
  return p;
}

namespace detail {

inline nlohmann::json node_to_json(const DecisionTree& tree, std::size_t i) {
  if (const auto* leaf = std::get_if<TreeLeaf>(&tree.nodes[i])) {
    return {{"leaf", {{"class", leaf->cls}, {"counts", {leaf->counts[0], leaf->counts[1]}}}}};
  }
  const auto& s = std::get<TreeSplit>(tree.nodes[i]);
  return {{"split",
           {{"feature", s.feature},
            {"threshold", s.threshold},
            {"left", node_to_json(tree, s.left)},
            {"right", node_to_json(tree, s.right)}}}};
}

inline std::size_t node_from_json(const nlohmann::json& j, DecisionTree& tree, std::size_t depth) {
  if (depth > tree.params.max_depth) {
    throw ValidationError(detail::concat("tree depth exceeds max_depth ", tree.params.max_depth));
  }
  if (!j.is_object() || j.size() != 1) throw ValidationError("tree node must be {\"leaf\": ...} or {\"split\": ...}");
  const std::size_t index = tree.nodes.size();
  if (j.contains("leaf")) {
    const auto& l = j.at("leaf");
    if (!l.is_object() || !l.contains("class") || !l.contains("counts")) {
      throw ValidationError("leaf node needs \"class\" and \"counts\"");
    }
    const auto& cls = l.at("class");
    const auto& counts = l.at("counts");
    if (!cls.is_number_integer() || (cls.get<std::int64_t>() != 0 && cls.get<std::int64_t>() != 1)) {
      throw ValidationError("leaf class must be 0 or 1");
    }
    if (!counts.is_array() || counts.size() != 2 || !counts[0].is_number_unsigned() || !counts[1].is_number_unsigned()) {
      throw ValidationError("leaf counts must be two non-negative integers");
    }
    TreeLeaf leaf{cls.get<int>(), {counts[0].get<std::size_t>(), counts[1].get<std::size_t>()}};
    if (leaf.cls != majority_class(leaf.counts)) {
      throw ValidationError(detail::concat("leaf class ", leaf.cls, " disagrees with its counts [", leaf.counts[0],
                                           ", ", leaf.counts[1], "]"));
    }
    tree.nodes.emplace_back(leaf);
    return index;
  }
  if (!j.contains("split")) throw ValidationError("tree node must be {\"leaf\": ...} or {\"split\": ...}");
  const auto& s = j.at("split");
  if (!s.is_object() || !s.contains("feature") || !s.contains("threshold") || !s.contains("left") ||
      !s.contains("right")) {
    throw ValidationError("split node needs \"feature\", \"threshold\", \"left\" and \"right\"");
  }
  if (!s.at("feature").is_number_unsigned()) throw ValidationError("split feature must be a non-negative integer");
  const auto feature = s.at("feature").get<std::size_t>();
  if (feature >= tree.feature_count) {
    throw ValidationError(detail::concat("split feature ", feature, " >= feature_count ", tree.feature_count));
  }
  if (!s.at("threshold").is_number() || !std::isfinite(s.at("threshold").get<double>())) {
    throw ValidationError("split threshold must be a finite number");
  }
  tree.nodes.emplace_back(TreeSplit{feature, s.at("threshold").get<double>(), 0, 0});
  const std::size_t left = node_from_json(s.at("left"), tree, depth + 1);
  const std::size_t right = node_from_json(s.at("right"), tree, depth + 1);
  auto& node = std::get<TreeSplit>(tree.nodes[index]);
  node.left = left;
  node.right = right;
  return index;
}

}  // namespace detail

inline nlohmann::json tree_to_json(const DecisionTree& tree) {
  return {{"feature_count", tree.feature_count},
          {"params", params_to_json(tree.params)},
          {"root", detail::node_to_json(tree, 0)}};
}

inline std::string serialize_tree(const DecisionTree& tree) { return tree_to_json(tree).dump(2) + "\n"; }

inline DecisionTree tree_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("feature_count") || !j.contains("root")) {
    throw ValidationError("tree JSON needs \"feature_count\" and \"root\"");
  }
  if (!j.at("feature_count").is_number_unsigned() || j.at("feature_count").get<std::size_t>() == 0) {
    throw ValidationError("tree feature_count must be a positive integer");
  }
  DecisionTree tree;
  tree.feature_count = j.at("feature_count").get<std::size_t>();
  tree.params = j.contains("params") ? params_from_json(j.at("params")) : CartParams{};
  detail::node_from_json(j.at("root"), tree, 0);
  return tree;
}

inline DecisionTree deserialize_tree(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(detail::concat("malformed tree JSON: ", e.what()));
  }
  return tree_from_json(j);
}

}  // namespace landchange
