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

#ifndef TURNOVER_EVAL_H_
#define TURNOVER_EVAL_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "turnover/balance.h"
#include "turnover/dataset.h"
#include "turnover/model.h"

namespace turnover {

using Fold = std::vector<std::size_t>;

// Deals each class's shuffled rows round-robin across folds so per-fold
// class counts stay within one of proportional.
std::vector<Fold> StratifiedKFold(std::span<const Label> labels, int k,
                                  std::uint64_t seed);
std::vector<Fold> StratifiedKFold(const Dataset& dataset, int k,
                                  std::uint64_t seed);

struct RocCurve {
  // (false positive rate, true positive rate), from (0,0) to (1,1).
  std::vector<std::pair<double, double>> points;
  double auc = 0.0;
};

// Equal scores form one step of the curve, so the area equals the
// Mann-Whitney statistic with ties counted as one half.
RocCurve RocAuc(std::span<const double> scores, std::span<const Label> labels);

struct ConfusionMetrics {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;
  // Unset when the denominator is zero.
  std::optional<double> flag_precision;      // TP / (TP + FP)
  std::optional<double> stayer_selectivity;  // TN / (TN + FP)
  std::optional<double> sensitivity;         // TP / (TP + FN)
  std::optional<double> specificity;         // TN / (TN + FP)
};

ConfusionMetrics ComputeConfusion(std::span<const Label> predicted,
                                  std::span<const Label> actual);

struct FoldMetrics {
  int fold = 0;
  double auc = 0.0;
  ConfusionMetrics confusion;
};

struct CvConfig {
  Hyperparameters hyperparameters;
  ResamplingMethod resampling;
};

struct CvCell {
  CvConfig config;
  std::vector<FoldMetrics> folds;
  double mean_auc = 0.0;
  double sd_auc = 0.0;
  // Non-empty when any fold failed; the cell is then never selected.
  std::string error;

  bool ok() const { return error.empty(); }
  std::optional<double> MeanFlagPrecision() const;
  std::optional<double> MeanStayerSelectivity() const;
};

struct CvReport {
  int k = 10;
  std::uint64_t seed = 0;
  std::optional<double> holdout_fraction;
  std::vector<CvCell> cells;
  // Index into `cells`; unset when every cell failed.
  std::optional<std::size_t> best;

  const CvConfig& BestConfig() const;
};

struct GridSearchOptions {
  int k = 10;
  std::uint64_t seed = 0;
  // When set, each of the k folds is an independent stratified split that
  // holds out this fraction instead of one k-th of the rows.
  std::optional<double> holdout_fraction;
  Threshold threshold;
};

// Holdout row sets for each fold, in fold order.
std::vector<Fold> HoldoutFolds(const Dataset& train,
                               const GridSearchOptions& options);

// Rebalanced training portion of a fold: `train` minus `holdout`.
WeightedDataset BuildFoldTraining(const Dataset& train, const Fold& holdout,
                                  const ResamplingMethod& method);

// Cells are ordered config-major, resampling-minor.
CvReport GridSearch(const Dataset& train,
                    const std::vector<std::string>& selected,
                    const std::vector<Hyperparameters>& configs,
                    const std::vector<ResamplingMethod>& methods,
                    const GridSearchOptions& options);

struct FeatureImportance {
  std::string feature;
  double mean_drop = 0.0;
  double std_error = 0.0;
};

struct ImportanceReport {
  double baseline_auc = 0.0;
  int repetitions = 1;
  // Sorted by decreasing mean drop, ties by name.
  std::vector<FeatureImportance> features;
};

ImportanceReport PermutationImportance(const TrainedModel& model,
                                       const Dataset& dataset,
                                       int repetitions, std::uint64_t seed);

nlohmann::json CvConfigToJson(const CvConfig& config);
nlohmann::json CvReportToJson(const CvReport& report);
std::string CvReportTable(const CvReport& report);
nlohmann::json ConfusionToJson(const ConfusionMetrics& metrics);
nlohmann::json ImportanceToJson(const ImportanceReport& report);
ImportanceReport ImportanceFromJson(const nlohmann::json& json);
std::string ImportanceTable(const ImportanceReport& report);
// Two tab-separated columns: fpr, tpr.
std::string RocToTsv(const RocCurve& curve);

}  // namespace turnover

#endif  // TURNOVER_EVAL_H_
