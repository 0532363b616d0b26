/*
 * Copyright 2026 The Turnover Analytics Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "turnover/tree.h"

#include <algorithm>
#include <numeric>

#include "turnover/error.h"
#include "turnover/parallel.h"

namespace turnover {
namespace {

// Weighted Gini impurity times node weight: 2 * w0 * w1 / (w0 + w1).
double Impurity(double w0, double w1) {
  const double total = w0 + w1;
  return total > 0.0 ? 2.0 * w0 * w1 / total : 0.0;
}

struct Split {
  int feature = -1;
  double threshold = 0.0;
  std::vector<bool> left_levels;
  double gain = -1.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const FeatureMatrix& matrix, std::span<const int> targets,
              std::span<const double> weights, const TreeParams& params,
              std::size_t mtry, Rng* rng)
      : matrix_(matrix),
        targets_(targets),
        weights_(weights),
        params_(params),
        mtry_(mtry),
        rng_(rng) {}

  DecisionTree Build(std::span<const std::size_t> rows) {
    std::vector<std::size_t> all(rows.begin(), rows.end());
    Grow(std::move(all), 0);
    return std::move(tree_);
  }

 private:
  int Grow(std::vector<std::size_t> rows, int depth) {
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    double w0 = 0.0, w1 = 0.0;
    for (std::size_t r : rows) (targets_[r] == 1 ? w1 : w0) += weights_[r];
    tree_.nodes[id].weight_active = w0;
    tree_.nodes[id].weight_terminated = w1;

    const auto min_leaf = static_cast<std::size_t>(std::max(1, params_.min_leaf));
    if (w0 <= 0.0 || w1 <= 0.0) return id;
    if (params_.max_depth && depth >= *params_.max_depth) return id;
    if (rows.size() < 2 * min_leaf) return id;

    const Split split = FindSplit(rows, w0, w1, min_leaf);
    if (split.feature < 0) return id;

    std::vector<std::size_t> left, right;
    for (std::size_t r : rows) {
      (GoesLeft(split, matrix_.at(r, split.feature)) ? left : right)
          .push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();
    tree_.nodes[id].feature = split.feature;
    tree_.nodes[id].threshold = split.threshold;
    tree_.nodes[id].left_levels = split.left_levels;
    const int left_id = Grow(std::move(left), depth + 1);
    tree_.nodes[id].left = left_id;
    const int right_id = Grow(std::move(right), depth + 1);
    tree_.nodes[id].right = right_id;
    return id;
  }

  static bool GoesLeft(const Split& split, double value) {
    if (!split.left_levels.empty()) {
      return split.left_levels[static_cast<std::size_t>(value)];
    }
    return value <= split.threshold;
  }

  std::vector<std::size_t> CandidateFeatures() {
    const std::size_t p = matrix_.cols();
    std::vector<std::size_t> features(p);
    std::iota(features.begin(), features.end(), 0);
    if (mtry_ == 0 || mtry_ >= p || rng_ == nullptr) return features;
    // Partial Fisher-Yates draw of mtry features.
    for (std::size_t i = 0; i < mtry_; ++i) {
      std::swap(features[i], features[i + rng_->Index(p - i)]);
    }
    features.resize(mtry_);
    std::sort(features.begin(), features.end());
    return features;
  }

  Split FindSplit(const std::vector<std::size_t>& rows, double w0, double w1,
                  std::size_t min_leaf) {
    const double parent = Impurity(w0, w1);
    const double eps = 1e-12 * (w0 + w1);
    Split best;
    auto consider = [&](double gain, int feature, double threshold,
                        std::vector<bool> left_levels) {
      if (gain < -eps) return;
      if (best.feature >= 0 && !(gain > best.gain + eps)) return;
      best = {feature, threshold, std::move(left_levels), gain};
    };

    std::vector<std::pair<double, std::size_t>> sorted;
    for (std::size_t f : CandidateFeatures()) {
      const auto& spec = matrix_.specs[f];
      if (spec.IsDiscrete()) {
        const std::size_t levels = spec.levels.size();
        std::vector<double> lw0(levels, 0.0), lw1(levels, 0.0);
        std::vector<std::size_t> count(levels, 0);
        for (std::size_t r : rows) {
          const auto level = static_cast<std::size_t>(matrix_.at(r, f));
          (targets_[r] == 1 ? lw1 : lw0)[level] += weights_[r];
          ++count[level];
        }
        std::vector<std::size_t> present;
        for (std::size_t l = 0; l < levels; ++l) {
          if (count[l] > 0) present.push_back(l);
        }
        if (present.size() < 2) continue;
        const bool categorical = spec.kind == FeatureKind::kCategorical;
        if (categorical) {
          // Ordering levels by Terminated share makes the best binary
          // partition a prefix.
          std::stable_sort(present.begin(), present.end(),
                           [&](std::size_t a, std::size_t b) {
                             return lw1[a] * (lw0[b] + lw1[b]) <
                                    lw1[b] * (lw0[a] + lw1[a]);
                           });
        }
        double left0 = 0.0, left1 = 0.0;
        std::size_t left_count = 0;
        std::vector<bool> mask(levels, false);
        for (std::size_t k = 0; k + 1 < present.size(); ++k) {
          const std::size_t l = present[k];
          left0 += lw0[l];
          left1 += lw1[l];
          left_count += count[l];
          mask[l] = true;
          if (left_count < min_leaf || rows.size() - left_count < min_leaf) {
            continue;
          }
          const double gain = parent - Impurity(left0, left1) -
                              Impurity(w0 - left0, w1 - left1);
          if (categorical) {
            consider(gain, static_cast<int>(f), static_cast<double>(k), mask);
          } else {
            consider(gain, static_cast<int>(f),
                     0.5 * static_cast<double>(l + present[k + 1]), {});
          }
        }
        continue;
      }
      sorted.clear();
      for (std::size_t r : rows) sorted.emplace_back(matrix_.at(r, f), r);
      std::sort(sorted.begin(), sorted.end());
      double left0 = 0.0, left1 = 0.0;
      for (std::size_t k = 0; k + 1 < sorted.size(); ++k) {
        const std::size_t r = sorted[k].second;
        (targets_[r] == 1 ? left1 : left0) += weights_[r];
        if (sorted[k].first == sorted[k + 1].first) continue;
        const std::size_t left_count = k + 1;
        if (left_count < min_leaf || sorted.size() - left_count < min_leaf) {
          continue;
        }
        const double gain = parent - Impurity(left0, left1) -
                            Impurity(w0 - left0, w1 - left1);
        consider(gain, static_cast<int>(f),
                 0.5 * (sorted[k].first + sorted[k + 1].first), {});
      }
    }
    return best;
  }

  const FeatureMatrix& matrix_;
  std::span<const int> targets_;
  std::span<const double> weights_;
  const TreeParams& params_;
  std::size_t mtry_;
  Rng* rng_;
  DecisionTree tree_;
};

}  // namespace

const TreeNode& DecisionTree::Leaf(std::span<const double> row) const {
  int id = 0;
  while (!nodes[id].IsLeaf()) {
    const TreeNode& node = nodes[id];
    const double value = row[static_cast<std::size_t>(node.feature)];
    bool left;
    if (!node.left_levels.empty()) {
      const auto level = static_cast<std::size_t>(value);
      left = level < node.left_levels.size() && node.left_levels[level];
    } else {
      left = value <= node.threshold;
    }
    id = left ? node.left : node.right;
  }
  return nodes[id];
}

DecisionTree FitTree(const FeatureMatrix& matrix, std::span<const int> targets,
                     std::span<const double> weights,
                     std::span<const std::size_t> rows,
                     const TreeParams& params, std::size_t mtry, Rng* rng) {
  if (params.min_leaf < 1) throw ConfigError("min_leaf must be >= 1");
  if (params.max_depth && *params.max_depth < 0) {
    throw ConfigError("max_depth must be >= 0");
  }
  if (rows.empty()) throw ConfigError("cannot grow a tree on zero rows");
  return TreeBuilder(matrix, targets, weights, params, mtry, rng).Build(rows);
}

std::vector<std::size_t> BootstrapRows(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::size_t> rows(n);
  for (auto& r : rows) r = rng.Index(n);
  std::sort(rows.begin(), rows.end());
  return rows;
}

ForestState FitForest(const FeatureMatrix& matrix, std::span<const int> targets,
                      std::span<const double> weights, int n_trees,
                      std::size_t mtry, const TreeParams& params,
                      std::uint64_t seed) {
  if (n_trees < 1) throw ConfigError("n_trees must be >= 1");
  ForestState forest;
  forest.trees.resize(static_cast<std::size_t>(n_trees));
  ParallelFor(forest.trees.size(), [&](std::size_t t) {
    const auto rows = BootstrapRows(matrix.rows, DeriveSeed(seed, 2 * t));
    Rng feature_rng(DeriveSeed(seed, 2 * t + 1));
    forest.trees[t] =
        FitTree(matrix, targets, weights, rows, params, mtry, &feature_rng);
  });
  return forest;
}

double ForestProbability(const ForestState& forest,
                         std::span<const double> row) {
  std::size_t votes = 0;
  for (const auto& tree : forest.trees) {
    if (tree.Probability(row) >= 0.5) ++votes;
  }
  return static_cast<double>(votes) / static_cast<double>(forest.trees.size());
}

nlohmann::json TreeToJson(const DecisionTree& tree) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& node : tree.nodes) {
    nlohmann::json j = {{"w0", node.weight_active},
                        {"w1", node.weight_terminated}};
    if (!node.IsLeaf()) {
      j["feature"] = node.feature;
      j["left"] = node.left;
      j["right"] = node.right;
      if (node.left_levels.empty()) {
        j["threshold"] = node.threshold;
      } else {
        std::vector<int> levels;
        for (std::size_t l = 0; l < node.left_levels.size(); ++l) {
          if (node.left_levels[l]) levels.push_back(static_cast<int>(l));
        }
        j["left_levels"] = levels;
        j["num_levels"] = node.left_levels.size();
      }
    }
    nodes.push_back(std::move(j));
  }
  return nodes;
}

DecisionTree TreeFromJson(const nlohmann::json& json) {
  DecisionTree tree;
  for (const auto& j : json) {
    TreeNode node;
    node.weight_active = j.at("w0").get<double>();
    node.weight_terminated = j.at("w1").get<double>();
    if (j.contains("feature")) {
      node.feature = j.at("feature").get<int>();
      node.left = j.at("left").get<int>();
      node.right = j.at("right").get<int>();
      if (j.contains("left_levels")) {
        node.left_levels.assign(j.at("num_levels").get<std::size_t>(), false);
        for (int l : j.at("left_levels")) {
          node.left_levels[static_cast<std::size_t>(l)] = true;
        }
      } else {
        node.threshold = j.at("threshold").get<double>();
      }
    }
    tree.nodes.push_back(std::move(node));
  }
  return tree;
}

}  // namespace turnover
