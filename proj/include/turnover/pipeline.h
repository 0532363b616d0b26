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

#ifndef TURNOVER_PIPELINE_H_
#define TURNOVER_PIPELINE_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "turnover/balance.h"
#include "turnover/eval.h"
#include "turnover/features.h"
#include "turnover/model.h"
#include "turnover/policy.h"
#include "turnover/synthgen.h"

namespace turnover {

struct RunConfig {
  // Inputs; relative paths resolve against the working directory.
  std::string data = "data.csv";
  std::string schema = "schema.json";
  std::string output_dir = "out";
  // When set, raw rows are curated on this metadata column first.
  std::optional<std::string> exit_reason_column;

  double split_fraction = 0.5;
  double keep_fraction = 0.6;
  int bins = 4;
  int k = 10;
  std::optional<double> holdout_fraction;
  // Family names (default grid) or hyperparameter objects.
  nlohmann::json models = nlohmann::json::array(
      {"NaiveBayes", "LDA", "SvmRbf", "Tree", "TreeBag", "RandomForest"});
  std::vector<ResamplingMethod> resampling = {
      ResamplingMethod::None(),    ResamplingMethod::Down(),
      ResamplingMethod::Up(),      ResamplingMethod::Weights(),
      ResamplingMethod::Smote(),   ResamplingMethod::Rose()};
  double threshold = 0.5;
  std::uint64_t seed = 1;
  int importance_repetitions = 5;

  // generate
  GeneratorConfig generator = DefaultTurnoverScenario();
  // Size of the unlabeled prediction set written next to the data; 0 skips.
  std::size_t prediction_set_size = 1000;

  // simulate
  std::string model;  // defaults to <output_dir>/model.json
  std::string prediction_set;  // defaults to <output_dir>/prediction.csv
  // "builtin" or policy document paths.
  std::vector<std::string> policies = {"builtin"};
  bool targeted = true;
};

RunConfig RunConfigFromJson(const nlohmann::json& json);
nlohmann::json RunConfigToJson(const RunConfig& config);
RunConfig LoadRunConfig(const std::string& path);

// Throws ConfigError unless `dir` exists (or can be created) and accepts
// new files.
void EnsureWritableDirectory(const std::string& dir);

// Expands the `models` entry against the number of selected features.
std::vector<Hyperparameters> ResolveModelGrid(const nlohmann::json& models,
                                              std::size_t num_features);

std::string ReadFile(const std::string& path);
void WriteFile(const std::string& path, const std::string& contents);
// Pretty-printed with a trailing newline.
void WriteJson(const std::string& path, const nlohmann::json& json);

struct GenerateResult {
  std::string data_path;
  std::string schema_path;
  std::size_t rows = 0;
  double positive_share = 0.0;
};

// Writes data.csv, schema.json, generator.json and, when requested,
// prediction.csv into the output directory.
GenerateResult CmdGenerate(const RunConfig& config);

struct TrainResult {
  TrainedModel model;
  CvReport cv;
  FeatureRanking ranking;
  ImportanceReport importance;
  double test_auc = 0.0;
  ConfusionMetrics test_confusion;
};

// curate -> split -> discretize -> rank -> grid search -> refit -> test
// evaluation -> importance. Writes model.json, cv_report.{json,txt},
// features.{json,txt}, test_metrics.json, roc_test.tsv and
// importance.{json,txt}.
TrainResult CmdTrain(const RunConfig& config);

struct SimulateResult {
  std::vector<PolicyImpactReport> mass;
  std::optional<TargetedReport> targeted;
};

// Writes mass_report.{json,txt} and, when targeted, targeted_report.{json,txt}.
SimulateResult CmdSimulate(const RunConfig& config);

// Model plus the training-run summary stored next to it.
struct LoadedModel {
  TrainedModel model;
  nlohmann::json document;
};
LoadedModel LoadModelFile(const std::string& path);

std::string ModelPath(const RunConfig& config);
std::string PredictionSetPath(const RunConfig& config);
Schema LoadSchemaFile(const std::string& path);

// Builtin programs or the listed policy documents.
std::vector<Policy> LoadPolicyMenu(const std::vector<std::string>& sources,
                                   const Schema& schema);

}  // namespace turnover

#endif  // TURNOVER_PIPELINE_H_
