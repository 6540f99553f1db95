// Copyright 2026 The crqrisk Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CRQRISK_GBDT_HPP_
#define CRQRISK_GBDT_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "crqrisk/domain.hpp"

namespace crqrisk {

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// Weighted logistic loss of one sample at margin `f`: w * [log(1 + e^f) - y f].
inline double logistic_loss(double f, double y, double w = 1.0) {
  const double softplus = f > 0.0 ? f + std::log1p(std::exp(-f)) : std::log1p(std::exp(f));
  return w * (softplus - y * f);
}

/// First and second derivatives of logistic_loss with respect to the margin.
struct GradPair {
  double g = 0.0;
  double h = 0.0;
};

inline GradPair logistic_grad(double f, double y, double w = 1.0) {
  const double p = sigmoid(f);
  return {w * (p - y), w * p * (1.0 - p)};
}

struct TrainConfig {
  std::size_t n_trees = 200;
  int max_depth = 5;
  double learning_rate = 0.1;
  double lambda = 1.0;
  double gamma = 0.0;
  double min_child_hessian = 1.0;
  /// Fraction of rows sampled per tree (1 = all rows, no randomness).
  double subsample = 1.0;
  std::uint64_t seed = 0;
  /// Overrides the prior log-odds when set.
  std::optional<double> base_score;
};

inline void validate_train_config(const TrainConfig& c) {
  if (c.n_trees < 1) throw Error(ErrorCode::kInvalidConfig, "n_trees must be >= 1");
  if (c.max_depth < 0) throw Error(ErrorCode::kInvalidConfig, "max_depth must be >= 0");
  if (!(c.learning_rate > 0.0 && c.learning_rate <= 1.0)) {
    throw Error(ErrorCode::kInvalidConfig, "learning_rate must lie in (0,1]");
  }
  if (c.lambda < 0.0 || c.gamma < 0.0 || c.min_child_hessian < 0.0) {
    throw Error(ErrorCode::kInvalidConfig, "regularizers must be >= 0");
  }
  if (!(c.subsample > 0.0 && c.subsample <= 1.0)) throw Error(ErrorCode::kInvalidConfig, "subsample in (0,1]");
}

inline void to_json(Json& j, const TrainConfig& c) {
  j = Json{{"n_trees", c.n_trees},     {"max_depth", c.max_depth}, {"learning_rate", c.learning_rate},
           {"lambda", c.lambda},       {"gamma", c.gamma},         {"min_child_hessian", c.min_child_hessian},
           {"subsample", c.subsample}, {"seed", c.seed}};
  if (c.base_score) j["base_score"] = *c.base_score;
}

inline void from_json(const Json& j, TrainConfig& c) {
  c = TrainConfig{};
  c.n_trees = j.value("n_trees", c.n_trees);
  c.max_depth = j.value("max_depth", c.max_depth);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.lambda = j.value("lambda", c.lambda);
  c.gamma = j.value("gamma", c.gamma);
  c.min_child_hessian = j.value("min_child_hessian", c.min_child_hessian);
  c.subsample = j.value("subsample", c.subsample);
  c.seed = j.value("seed", c.seed);
  if (j.contains("base_score")) c.base_score = j.at("base_score").get<double>();
}

/// Internal node when feature >= 0, leaf otherwise. Non-missing x goes left
/// iff x <= threshold; missing x follows default_left.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  bool default_left = true;
  int left = -1;
  int right = -1;
  double weight = 0.0;

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  /// Raw leaf weight reached by `x` (no shrinkage).
  double value(const FeatureVector& x) const {
    int n = 0;
    while (!nodes[static_cast<std::size_t>(n)].is_leaf()) {
      const auto& node = nodes[static_cast<std::size_t>(n)];
      const auto f = static_cast<std::size_t>(node.feature);
      const bool left = x.missing[f] ? node.default_left : x.values[f] <= node.threshold;
      n = left ? node.left : node.right;
    }
    return nodes[static_cast<std::size_t>(n)].weight;
  }

  int depth() const { return depth_from(0); }

  static Tree leaf(double weight) {
    Tree t;
    t.nodes.push_back(TreeNode{.weight = weight});
    return t;
  }

  bool operator==(const Tree&) const = default;

 private:
  int depth_from(int n) const {
    const auto& node = nodes[static_cast<std::size_t>(n)];
    if (node.is_leaf()) return 0;
    return 1 + std::max(depth_from(node.left), depth_from(node.right));
  }
};

// ---------------------------------------------------------------------------
// Exact greedy split search
// ---------------------------------------------------------------------------

/// Column-major copy of a feature matrix with per-feature row orderings.
struct ColumnStore {
  std::size_t n_rows = 0;
  std::size_t n_features = 0;
  std::vector<std::vector<double>> values;
  std::vector<std::vector<std::uint8_t>> missing;
  /// Non-missing rows of each feature ordered by (value, row).
  std::vector<std::vector<std::uint32_t>> sorted;
  /// Missing rows of each feature in row order.
  std::vector<std::vector<std::uint32_t>> missing_rows;

  static ColumnStore build(const std::vector<FeatureVector>& rows, std::size_t n_features) {
    ColumnStore cs;
    cs.n_rows = rows.size();
    cs.n_features = n_features;
    cs.values.assign(n_features, std::vector<double>(rows.size()));
    cs.missing.assign(n_features, std::vector<std::uint8_t>(rows.size()));
    cs.sorted.resize(n_features);
    cs.missing_rows.resize(n_features);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (std::size_t f = 0; f < n_features; ++f) {
        cs.values[f][i] = rows[i].values[f];
        cs.missing[f][i] = rows[i].missing[f];
      }
    }
    for (std::size_t f = 0; f < n_features; ++f) {
      auto& s = cs.sorted[f];
      for (std::uint32_t i = 0; i < rows.size(); ++i) {
        if (cs.missing[f][i]) {
          cs.missing_rows[f].push_back(i);
        } else {
          s.push_back(i);
        }
      }
      const auto& col = cs.values[f];
      std::stable_sort(s.begin(), s.end(), [&col](std::uint32_t a, std::uint32_t b) { return col[a] < col[b]; });
    }
    return cs;
  }
};

struct SplitParams {
  double lambda = 1.0;
  double gamma = 0.0;
  double min_child_hessian = 1.0;
};

/// Structure-score improvement of a split, net of gamma.
inline double split_gain(double gl, double hl, double gr, double hr, double g, double h, const SplitParams& p) {
  return 0.5 * (gl * gl / (hl + p.lambda) + gr * gr / (hr + p.lambda) - g * g / (h + p.lambda)) - p.gamma;
}

inline double leaf_weight(double g, double h, double lambda) { return -g / (h + lambda); }

struct SplitCandidate {
  bool valid = false;
  int feature = -1;
  double threshold = 0.0;
  bool default_left = true;
  double gain = 0.0;
  double g_left = 0.0, h_left = 0.0, g_right = 0.0, h_right = 0.0;
};

/// Finds the best split of every open node in one pass per feature.
/// `position[i]` is the open-node slot (0..n_open-1) of row i, or -1 when
/// the row is not being split at this level. Candidates are visited in
/// order (feature, threshold, default_left=true before false) and replace
/// the incumbent only on strictly larger gain; a split must leave both
/// children nonempty, meet min_child_hessian on each side, and have gain > 0.
inline std::vector<SplitCandidate> find_best_splits(const ColumnStore& cols, std::span<const double> grad,
                                                    std::span<const double> hess, std::span<const int> position,
                                                    std::size_t n_open, const SplitParams& params) {
  std::vector<double> g_tot(n_open, 0.0), h_tot(n_open, 0.0);
  std::vector<std::size_t> c_tot(n_open, 0);
  for (std::size_t i = 0; i < cols.n_rows; ++i) {
    if (position[i] < 0) continue;
    const auto n = static_cast<std::size_t>(position[i]);
    g_tot[n] += grad[i];
    h_tot[n] += hess[i];
    ++c_tot[n];
  }
  std::vector<SplitCandidate> best(n_open);

  std::vector<double> g_miss(n_open), h_miss(n_open), g_acc(n_open), h_acc(n_open), last(n_open);
  std::vector<std::size_t> c_miss(n_open), c_acc(n_open);

  auto consider = [&](std::size_t n, int feature, double threshold) {
    const double g = g_tot[n], h = h_tot[n];
    for (int dir = 0; dir < 2; ++dir) {
      const bool default_left = dir == 0;
      double gl = g_acc[n], hl = h_acc[n];
      std::size_t cl = c_acc[n];
      if (default_left) {
        gl += g_miss[n];
        hl += h_miss[n];
        cl += c_miss[n];
      }
      const std::size_t cr = c_tot[n] - cl;
      if (cl == 0 || cr == 0) continue;
      const double gr = g - gl, hr = h - hl;
      if (hl < params.min_child_hessian || hr < params.min_child_hessian) continue;
      const double gain = split_gain(gl, hl, gr, hr, g, h, params);
      if (gain > 0.0 && (!best[n].valid || gain > best[n].gain)) {
        best[n] = {true, feature, threshold, default_left, gain, gl, hl, gr, hr};
      }
    }
  };

  for (std::size_t f = 0; f < cols.n_features; ++f) {
    std::fill(g_miss.begin(), g_miss.end(), 0.0);
    std::fill(h_miss.begin(), h_miss.end(), 0.0);
    std::fill(c_miss.begin(), c_miss.end(), 0);
    std::fill(g_acc.begin(), g_acc.end(), 0.0);
    std::fill(h_acc.begin(), h_acc.end(), 0.0);
    std::fill(c_acc.begin(), c_acc.end(), 0);
    for (std::uint32_t i : cols.missing_rows[f]) {
      if (position[i] < 0) continue;
      const auto n = static_cast<std::size_t>(position[i]);
      g_miss[n] += grad[i];
      h_miss[n] += hess[i];
      ++c_miss[n];
    }
    const auto& col = cols.values[f];
    for (std::uint32_t i : cols.sorted[f]) {
      if (position[i] < 0) continue;
      const auto n = static_cast<std::size_t>(position[i]);
      const double x = col[i];
      if (c_acc[n] > 0 && x != last[n]) consider(n, static_cast<int>(f), last[n]);
      g_acc[n] += grad[i];
      h_acc[n] += hess[i];
      ++c_acc[n];
      last[n] = x;
    }
    // Threshold at the largest value: everything observed goes left.
    for (std::size_t n = 0; n < n_open; ++n) {
      if (c_acc[n] > 0) consider(n, static_cast<int>(f), last[n]);
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Ensemble
// ---------------------------------------------------------------------------

/// How the trees of one boosted model are turned into ensemble members for
/// uncertainty estimation.
enum class MemberMode {
  /// Member j is the model truncated after ceil(j*M/n) trees.
  kPrefix,
  /// Member j is sigmoid(base + eta * f_t(x)) for a single tree t.
  kPerTree,
};

struct Ensemble {
  double base_score = 0.0;
  std::vector<Tree> trees;
  double learning_rate = 0.1;
  double lambda = 1.0;
  double gamma = 0.0;
  TrainConfig config;
  /// Total split gain per feature, normalized to sum to 1 (all zeros when
  /// no split exists).
  std::vector<double> feature_importances;
  std::vector<std::string> feature_names;
  std::string schema_version;

  std::size_t n_features() const { return feature_importances.size(); }

  void check_input(const FeatureVector& x) const {
    if (x.size() != feature_importances.size() || x.missing.size() != x.size()) {
      throw Error(ErrorCode::kSchemaMismatch, "feature vector width " + std::to_string(x.size()) +
                                                  " != model width " + std::to_string(feature_importances.size()));
    }
  }

  double margin(const FeatureVector& x, std::size_t n_trees) const {
    double s = 0.0;
    for (std::size_t t = 0; t < n_trees && t < trees.size(); ++t) s += trees[t].value(x);
    return base_score + learning_rate * s;
  }

  double predict_proba(const FeatureVector& x) const {
    check_input(x);
    return sigmoid(margin(x, trees.size()));
  }

  std::vector<double> staged_probas(const FeatureVector& x, std::size_t n_members,
                                    MemberMode mode = MemberMode::kPrefix) const {
    check_input(x);
    const std::size_t m = trees.size();
    if (n_members == 0 || n_members > m) {
      throw Error(ErrorCode::kTooManyMembers, std::to_string(n_members) + " members requested from " +
                                                  std::to_string(m) + " trees");
    }
    std::vector<double> contrib(m);
    for (std::size_t t = 0; t < m; ++t) contrib[t] = trees[t].value(x);
    std::vector<double> out;
    out.reserve(n_members);
    if (mode == MemberMode::kPrefix) {
      double s = 0.0;
      std::size_t used = 0;
      for (std::size_t j = 1; j <= n_members; ++j) {
        const std::size_t upto = (j * m + n_members - 1) / n_members;
        for (; used < upto; ++used) s += contrib[used];
        out.push_back(sigmoid(base_score + learning_rate * s));
      }
    } else {
      for (std::size_t j = 1; j <= n_members; ++j) {
        const std::size_t t = (j * m + n_members - 1) / n_members - 1;
        out.push_back(sigmoid(base_score + learning_rate * contrib[t]));
      }
    }
    return out;
  }

  /// Indices of features sorted by importance, highest first.
  std::vector<std::size_t> top_features(std::size_t k) const {
    std::vector<std::size_t> idx(feature_importances.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [this](std::size_t a, std::size_t b) { return feature_importances[a] > feature_importances[b]; });
    if (idx.size() > k) idx.resize(k);
    return idx;
  }
};

/// Sum of weighted logistic losses over a dataset at the given margins.
inline double weighted_log_loss(const Dataset& ds, std::span<const double> margins) {
  double s = 0.0;
  for (std::size_t i = 0; i < ds.size(); ++i) s += logistic_loss(margins[i], label_value(ds.label(i)), ds.weights()[i]);
  return s;
}

struct TrainReport {
  Ensemble model;
  /// Weighted training log-loss before the first tree and after each tree.
  std::vector<double> loss_history;
};

/// Grows one tree level by level from per-row gradients. On entry
/// `position[i]` is 0 for participating rows and -1 for the rest. On return `leaf_of[i]` holds the
/// leaf reached by each participating row.
inline Tree grow_tree(const ColumnStore& cols, std::span<const double> grad, std::span<const double> hess,
                      std::vector<int>& position, int max_depth, const SplitParams& params,
                      std::vector<double>* feature_gain = nullptr, std::vector<int>* leaf_of = nullptr) {
  Tree tree;
  tree.nodes.push_back(TreeNode{});
  std::vector<int> open = {0};  // tree node id of each open slot
  std::vector<int> node_of(cols.n_rows);
  for (std::size_t i = 0; i < cols.n_rows; ++i) node_of[i] = position[i] < 0 ? -1 : 0;

  auto node_sums = [&](std::size_t n_open) {
    std::vector<std::pair<double, double>> s(n_open, {0.0, 0.0});
    for (std::size_t i = 0; i < cols.n_rows; ++i) {
      if (position[i] < 0) continue;
      auto& p = s[static_cast<std::size_t>(position[i])];
      p.first += grad[i];
      p.second += hess[i];
    }
    return s;
  };

  for (int depth = 0; !open.empty(); ++depth) {
    const auto sums = node_sums(open.size());
    std::vector<SplitCandidate> best(open.size());
    if (depth < max_depth) best = find_best_splits(cols, grad, hess, position, open.size(), params);

    std::vector<int> next_open;
    std::vector<int> slot_left(open.size(), -1), slot_right(open.size(), -1);
    for (std::size_t s = 0; s < open.size(); ++s) {
      const int id = open[s];
      if (!best[s].valid) {
        tree.nodes[static_cast<std::size_t>(id)].weight = leaf_weight(sums[s].first, sums[s].second, params.lambda);
        continue;
      }
      const int l = static_cast<int>(tree.nodes.size());
      tree.nodes.push_back(TreeNode{});
      tree.nodes.push_back(TreeNode{});
      auto& node = tree.nodes[static_cast<std::size_t>(id)];
      node.feature = best[s].feature;
      node.threshold = best[s].threshold;
      node.default_left = best[s].default_left;
      node.left = l;
      node.right = l + 1;
      if (feature_gain) (*feature_gain)[static_cast<std::size_t>(best[s].feature)] += best[s].gain;
      slot_left[s] = static_cast<int>(next_open.size());
      next_open.push_back(l);
      slot_right[s] = static_cast<int>(next_open.size());
      next_open.push_back(l + 1);
    }
    for (std::size_t i = 0; i < cols.n_rows; ++i) {
      if (position[i] < 0) continue;
      const auto s = static_cast<std::size_t>(position[i]);
      if (!best[s].valid) {
        position[i] = -1;
        continue;
      }
      const auto f = static_cast<std::size_t>(best[s].feature);
      const bool left = cols.missing[f][i] ? best[s].default_left : cols.values[f][i] <= best[s].threshold;
      position[i] = left ? slot_left[s] : slot_right[s];
      node_of[i] = left ? tree.nodes[static_cast<std::size_t>(open[s])].left
                        : tree.nodes[static_cast<std::size_t>(open[s])].right;
    }
    open = std::move(next_open);
  }
  if (leaf_of) *leaf_of = std::move(node_of);
  return tree;
}

/// Newton boosting of the weighted logistic loss.
inline TrainReport train_with_report(const Dataset& ds, const TrainConfig& cfg) {
  validate_train_config(cfg);
  if (ds.empty()) throw Error(ErrorCode::kEmptyDataset, "training dataset is empty");
  double w_pos = 0.0, w_neg = 0.0;
  for (std::size_t i = 0; i < ds.size(); ++i) (ds.label(i) == Label::kRisky ? w_pos : w_neg) += ds.weights()[i];
  // The prior log-odds is undefined for one class; an explicit base score
  // makes single-class boosting well defined.
  if ((w_pos == 0.0 || w_neg == 0.0) && !cfg.base_score) {
    throw Error(ErrorCode::kSingleClassDataset, "training data has one class");
  }

  const std::size_t n = ds.size();
  const auto cols = ColumnStore::build(ds.rows(), ds.n_features());
  const SplitParams params{cfg.lambda, cfg.gamma, cfg.min_child_hessian};

  TrainReport report;
  Ensemble& m = report.model;
  m.base_score = cfg.base_score.value_or(std::log(w_pos / w_neg));
  m.learning_rate = cfg.learning_rate;
  m.lambda = cfg.lambda;
  m.gamma = cfg.gamma;
  m.config = cfg;
  m.feature_names = ds.schema()->names();
  m.schema_version = ds.schema()->version();
  std::vector<double> gain(ds.n_features(), 0.0);

  std::vector<double> y(n), margin(n, m.base_score), grad(n), hess(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = label_value(ds.label(i));
  report.loss_history.push_back(weighted_log_loss(ds, margin));

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<int> position(n), leaf_of;
  for (std::size_t t = 0; t < cfg.n_trees; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto gp = logistic_grad(margin[i], y[i], ds.weights()[i]);
      grad[i] = gp.g;
      hess[i] = gp.h;
      position[i] = (cfg.subsample >= 1.0 || unit(rng) < cfg.subsample) ? 0 : -1;
    }
    const std::vector<int> sampled = position;
    Tree tree = grow_tree(cols, grad, hess, position, cfg.max_depth, params, &gain, &leaf_of);
    for (std::size_t i = 0; i < n; ++i) {
      const double v = sampled[i] >= 0 ? tree.nodes[static_cast<std::size_t>(leaf_of[i])].weight
                                       : tree.value(ds.row(i));
      margin[i] += cfg.learning_rate * v;
    }
    m.trees.push_back(std::move(tree));
    report.loss_history.push_back(weighted_log_loss(ds, margin));
  }

  const double total = std::accumulate(gain.begin(), gain.end(), 0.0);
  m.feature_importances.assign(gain.size(), 0.0);
  if (total > 0.0) {
    for (std::size_t f = 0; f < gain.size(); ++f) m.feature_importances[f] = gain[f] / total;
  }
  return report;
}

inline Ensemble train(const Dataset& ds, const TrainConfig& cfg) { return train_with_report(ds, cfg).model; }

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace gbdt_detail {

inline Json node_to_json(const Tree& t, int id) {
  const auto& n = t.nodes[static_cast<std::size_t>(id)];
  if (n.is_leaf()) return Json{{"leaf", n.weight}};
  return Json{{"feature", n.feature},
              {"threshold", n.threshold},
              {"default_left", n.default_left},
              {"left", node_to_json(t, n.left)},
              {"right", node_to_json(t, n.right)}};
}

inline int node_from_json(const Json& j, Tree& t) {
  const int id = static_cast<int>(t.nodes.size());
  t.nodes.push_back(TreeNode{});
  if (j.contains("leaf")) {
    t.nodes[static_cast<std::size_t>(id)].weight = j.at("leaf").get<double>();
    return id;
  }
  TreeNode n;
  n.feature = j.at("feature").get<int>();
  n.threshold = j.at("threshold").get<double>();
  n.default_left = j.at("default_left").get<bool>();
  n.left = node_from_json(j.at("left"), t);
  n.right = node_from_json(j.at("right"), t);
  t.nodes[static_cast<std::size_t>(id)] = n;
  return id;
}

}  // namespace gbdt_detail

inline constexpr int kEnsembleFormatVersion = 1;

inline void to_json(Json& j, const Ensemble& m) {
  Json trees = Json::array();
  for (const auto& t : m.trees) trees.push_back(gbdt_detail::node_to_json(t, 0));
  j = Json{{"format", "crqrisk.ensemble"},
           {"format_version", kEnsembleFormatVersion},
           {"config", m.config},
           {"base_score", m.base_score},
           {"learning_rate", m.learning_rate},
           {"lambda", m.lambda},
           {"gamma", m.gamma},
           {"trees", trees},
           {"importances", m.feature_importances},
           {"feature_names", m.feature_names},
           {"schema_version", m.schema_version}};
}

inline void from_json(const Json& j, Ensemble& m) {
  if (j.value("format", std::string{}) != "crqrisk.ensemble") {
    throw Error(ErrorCode::kParseError, "not a crqrisk.ensemble document");
  }
  if (j.at("format_version").get<int>() != kEnsembleFormatVersion) {
    throw Error(ErrorCode::kParseError, "unsupported ensemble format_version");
  }
  m = Ensemble{};
  m.config = j.at("config").get<TrainConfig>();
  m.base_score = j.at("base_score").get<double>();
  m.learning_rate = j.at("learning_rate").get<double>();
  m.lambda = j.at("lambda").get<double>();
  m.gamma = j.at("gamma").get<double>();
  for (const auto& tj : j.at("trees")) {
    Tree t;
    gbdt_detail::node_from_json(tj, t);
    m.trees.push_back(std::move(t));
  }
  m.feature_importances = j.at("importances").get<std::vector<double>>();
  m.feature_names = j.value("feature_names", std::vector<std::string>{});
  m.schema_version = j.value("schema_version", std::string{});
  for (const auto& t : m.trees) {
    for (const auto& n : t.nodes) {
      if (!n.is_leaf() && static_cast<std::size_t>(n.feature) >= m.feature_importances.size()) {
        throw Error(ErrorCode::kParseError, "tree references feature beyond model width");
      }
    }
  }
}

}  // namespace crqrisk

#endif  // CRQRISK_GBDT_HPP_
