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

// CART classification trees with weighted Gini impurity, and bootstrap
// ensembles of them (bagging and random forests).

#ifndef TURNOVER_TREE_H_
#define TURNOVER_TREE_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "json.hpp"
#include "turnover/design.h"
#include "turnover/random.h"

namespace turnover {

struct TreeParams {
  // Unbounded when unset.
  std::optional<int> max_depth;
  // Minimum number of rows in each child.
  int min_leaf = 1;
  bool operator==(const TreeParams&) const = default;
};

struct TreeBagParams {
  int n_trees = 100;
  TreeParams tree;
  bool operator==(const TreeBagParams&) const = default;
};

struct ForestParams {
  int n_trees = 100;
  int mtry = 1;
  TreeParams tree;
  bool operator==(const ForestParams&) const = default;
};

struct TreeNode {
  // -1 for leaves.
  int feature = -1;
  // Ordered split: go left when value <= threshold.
  double threshold = 0.0;
  // Categorical split: go left when left_levels[level] is set.
  std::vector<bool> left_levels;
  int left = -1;
  int right = -1;
  double weight_active = 0.0;
  double weight_terminated = 0.0;

  bool IsLeaf() const { return feature < 0; }
  double Probability() const {
    return weight_terminated / (weight_active + weight_terminated);
  }
};

struct DecisionTree {
  std::vector<TreeNode> nodes;

  const TreeNode& Leaf(std::span<const double> row) const;
  // Weighted share of Terminated in the reached leaf.
  double Probability(std::span<const double> row) const {
    return Leaf(row).Probability();
  }
};

// Grows a tree on `rows` (indices into the matrix; repeats allowed, as in a
// bootstrap sample). When 0 < mtry < number of features, each node draws
// mtry candidate features from `rng`. Split ties go to the lowest feature
// index, then the lowest threshold.
DecisionTree FitTree(const FeatureMatrix& matrix, std::span<const int> targets,
                     std::span<const double> weights,
                     std::span<const std::size_t> rows,
                     const TreeParams& params, std::size_t mtry = 0,
                     Rng* rng = nullptr);

// n draws with replacement from [0, n).
std::vector<std::size_t> BootstrapRows(std::size_t n, std::uint64_t seed);

// Seeds of tree t: bootstrap from DeriveSeed(seed, 2t), feature draws from
// DeriveSeed(seed, 2t + 1).
struct ForestState {
  std::vector<DecisionTree> trees;
};

ForestState FitForest(const FeatureMatrix& matrix, std::span<const int> targets,
                      std::span<const double> weights, int n_trees,
                      std::size_t mtry, const TreeParams& params,
                      std::uint64_t seed);

// Fraction of trees whose leaf favours Terminated (probability >= 0.5).
double ForestProbability(const ForestState& forest,
                         std::span<const double> row);

nlohmann::json TreeToJson(const DecisionTree& tree);
DecisionTree TreeFromJson(const nlohmann::json& json);

}  // namespace turnover

#endif  // TURNOVER_TREE_H_
