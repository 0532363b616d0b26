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

#ifndef TURNOVER_MODEL_H_
#define TURNOVER_MODEL_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "turnover/balance.h"
#include "turnover/dataset.h"
#include "turnover/discriminant.h"
#include "turnover/naive_bayes.h"
#include "turnover/svm.h"
#include "turnover/tree.h"

namespace turnover {

enum class ModelFamily {
  kNaiveBayes,
  kLda,
  kSvmRbf,
  kTree,
  kTreeBag,
  kRandomForest
};

std::string_view FamilyName(ModelFamily family);
ModelFamily ParseFamily(std::string_view name);

// The alternative held determines the family.
using Hyperparameters = std::variant<NaiveBayesParams, LdaParams, SvmParams,
                                     TreeParams, TreeBagParams, ForestParams>;

ModelFamily FamilyOf(const Hyperparameters& hp);

// `num_features` bounds mtry.
void ValidateHyperparameters(const Hyperparameters& hp,
                             std::size_t num_features);

nlohmann::json HyperparametersToJson(const Hyperparameters& hp);
// Accepts "sqrt", "third" and "all" for mtry, resolved against
// `num_features`.
Hyperparameters HyperparametersFromJson(const nlohmann::json& json,
                                        std::size_t num_features);
std::string DescribeHyperparameters(const Hyperparameters& hp);

// Default tuning grid for a family over `num_features` selected features.
std::vector<Hyperparameters> DefaultGrid(ModelFamily family,
                                         std::size_t num_features);

// Class-assignment cut-off, strictly inside (0, 1).
class Threshold {
 public:
  explicit Threshold(double value = 0.5);
  double value() const { return value_; }
  bool operator==(const Threshold&) const = default;

 private:
  double value_;
};

using ModelState = std::variant<NaiveBayesState, LdaState, SvmState,
                                DecisionTree, ForestState>;

struct TrainedModel {
  Hyperparameters hyperparameters;
  std::vector<FeatureSpec> features;
  std::string fingerprint;
  Threshold threshold;
  ModelState state;
  // False when the SVM solver hit its iteration budget.
  bool converged = true;

  ModelFamily family() const { return FamilyOf(hyperparameters); }
  std::vector<std::string> FeatureNames() const;
};

// FNV-1a over feature names, kinds and levels.
std::string SchemaFingerprint(const std::vector<FeatureSpec>& features);

TrainedModel Fit(const WeightedDataset& data, const Hyperparameters& hp,
                 const std::vector<std::string>& selected, std::uint64_t seed,
                 Threshold threshold = Threshold());

// Throws FingerprintMismatch unless `schema` carries the model's features
// with identical kinds and levels.
void CheckCompatible(const TrainedModel& model, const Schema& schema);

// Probability of Terminated for a row laid out in the model's feature order.
double PredictRow(const TrainedModel& model, std::span<const double> row);

std::vector<double> PredictProba(const TrainedModel& model,
                                 const Dataset& dataset);
std::vector<double> PredictProba(const TrainedModel& model,
                                 const FeatureMatrix& matrix);

// Two-class posteriors (Active, Terminated); NB and LDA only.
std::vector<std::array<double, 2>> PredictPosteriors(const TrainedModel& model,
                                                     const Dataset& dataset);

std::vector<Label> PredictClass(const TrainedModel& model,
                                const Dataset& dataset);
// Terminated iff probability >= threshold.
std::vector<Label> Classify(std::span<const double> probabilities,
                            Threshold threshold);

nlohmann::json ModelToJson(const TrainedModel& model);
TrainedModel ModelFromJson(const nlohmann::json& json);

}  // namespace turnover

#endif  // TURNOVER_MODEL_H_
