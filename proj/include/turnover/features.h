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

// Mutual-information scoring of discrete features against the label and
// filter-style feature selection.

#ifndef TURNOVER_FEATURES_H_
#define TURNOVER_FEATURES_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "turnover/dataset.h"

namespace turnover {

// Joint counts of a discrete feature (rows) and the label (columns).
struct ContingencyTable {
  std::string feature;
  std::vector<std::string> x_levels;
  std::vector<std::string> y_levels = {"Active", "Terminated"};
  // counts[x][y].
  std::vector<std::vector<std::uint64_t>> counts;

  std::uint64_t Total() const;
  ContingencyTable Transposed() const;
};

// Throws DataError if the table has no mass or ragged dimensions.
void ValidateTable(const ContingencyTable& table);

struct FeatureScore {
  std::string feature;
  double mi_nats = 0.0;
};

// Plug-in mutual information in nats over cells with positive joint mass.
FeatureScore MutualInformation(const ContingencyTable& table);
// Entropies of the row and column marginals (nats).
double EntropyX(const ContingencyTable& table);
double EntropyY(const ContingencyTable& table);

// Cross-tabulates a discrete feature against the known labels.
ContingencyTable BuildContingencyTable(const Dataset& dataset,
                                       std::size_t feature);

struct BinningRule {
  enum class Strategy { kDeclaredBands, kEqualFrequency };
  std::string feature;
  Strategy strategy = Strategy::kEqualFrequency;
  int bins = 4;

  static BinningRule DeclaredBands(std::string feature);
  static BinningRule EqualFrequency(std::string feature, int bins);
};

// Cut points learned for each numeric feature; reusable on other datasets
// with the same schema.
struct DiscretizationPlan {
  std::map<std::string, std::vector<double>> cut_points;

  Dataset Apply(const Dataset& dataset) const;
};

struct Discretized {
  Dataset dataset;
  DiscretizationPlan plan;
};

// Converts every numeric feature into an ordinal band feature. Equal
// frequency edges are midpoints between consecutive sorted values at the
// quantile positions of the given dataset. Discrete features pass through.
// Throws ConfigError for a numeric feature without a rule or with fewer
// distinct values than bins.
Discretized Discretize(const Dataset& dataset,
                       const std::vector<BinningRule>& rules);

struct FeatureRanking {
  // Descending by MI, ties by ascending feature name.
  std::vector<FeatureScore> scores;
  std::vector<std::string> selected;
};

// Scores each feature against the label and keeps the top
// ceil(keep_fraction * feature count). Requires a fully discrete dataset
// with no Unknown labels.
FeatureRanking RankAndFilter(const Dataset& dataset, double keep_fraction);

// Ordered (feature, mi_nats, selected) triples.
nlohmann::json FeatureRankingToJson(const FeatureRanking& ranking);
std::string FeatureRankingTable(const FeatureRanking& ranking);

}  // namespace turnover

#endif  // TURNOVER_FEATURES_H_
