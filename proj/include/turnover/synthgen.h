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

// Synthetic employee populations with a planted logistic turnover
// mechanism.

#ifndef TURNOVER_SYNTHGEN_H_
#define TURNOVER_SYNTHGEN_H_

#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "turnover/dataset.h"

namespace turnover {

// Extra log-odds contribution for rows holding one of the listed levels of
// every named feature.
struct Interaction {
  std::map<std::string, std::vector<std::string>> when;
  double weight = 0.0;
};

// Additive log-odds contributions.
struct EffectWeights {
  // feature -> level (or band) -> contribution.
  std::map<std::string, std::map<std::string, double>> levels;
  // numeric feature -> contribution per unit.
  std::map<std::string, double> slopes;
  std::vector<Interaction> interactions;
};

struct NumericMarginal {
  double mean = 0.0;
  double sd = 1.0;
  double min = -std::numeric_limits<double>::infinity();
  double max = std::numeric_limits<double>::infinity();
};

// Employees are assigned to synthetic managers. Manager features are drawn
// once per manager and shared by the team; team features are derived from
// the team's members.
struct TeamStructure {
  std::vector<std::string> manager_features;
  double mean_team_size = 8.0;
  // Derived numeric features; empty names disable them.
  std::string team_size_feature;
  std::string high_performer_pct_feature;
  std::string low_performer_pct_feature;
  std::string performance_feature;
  std::string high_level = "High";
  std::string low_level = "Low";
};

struct GeneratorConfig {
  std::size_t n = 1000;
  double base_rate = 0.2;
  Schema schema;
  EffectWeights effect_weights;
  double noise_scale = 0.5;
  std::uint64_t seed = 0;
  // Marginal distributions; features without an entry are uniform over
  // their levels (discrete) or standard normal (numeric).
  std::map<std::string, std::vector<double>> level_marginals;
  std::map<std::string, NumericMarginal> numeric_marginals;
  TeamStructure teams;
  std::vector<int> years = {1, 2};
  // Fixed intercept; when unset it is calibrated to hit base_rate.
  std::optional<double> intercept;
  // Emit Unknown labels (a prediction set).
  bool unlabeled = false;
  std::string id_prefix = "e";
};

// Throws ConfigError when the configuration is inconsistent.
void ValidateGeneratorConfig(const GeneratorConfig& config);

struct GeneratedPopulation {
  Dataset dataset;
  double intercept = 0.0;
  // Terminated share of the drawn labels (before any unlabeling).
  double positive_share = 0.0;
};

// Draws covariates, then labels from logit = intercept + sum of weights +
// noise, thresholding a fixed per-row uniform draw. The intercept is found
// by bisection so the positive share is within 0.03 of base_rate; throws
// Error (with the achieved rate) otherwise. Deterministic per seed.
GeneratedPopulation GeneratePopulation(const GeneratorConfig& config);

// Feature set of the reference employee population.
Schema DefaultEmployeeSchema();

// Planted scenario: low performance and the employee time-in-position U
// shape ("0-2" and "4+") are the strongest drivers, followed by manager
// time-in-position and tenure; location effects are near zero. Three
// pairwise interactions among these drivers reward models that capture
// conditional effects.
GeneratorConfig DefaultTurnoverScenario();

nlohmann::json GeneratorConfigToJson(const GeneratorConfig& config);
GeneratorConfig GeneratorConfigFromJson(const nlohmann::json& json);

// Provenance for emitted datasets, including the note that marginal
// distributions are assumptions rather than measured values.
nlohmann::json GeneratorMetadata(const GeneratorConfig& config,
                                 const GeneratedPopulation& population);

}  // namespace turnover

#endif  // TURNOVER_SYNTHGEN_H_
