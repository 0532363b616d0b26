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

#ifndef TURNOVER_NAIVE_BAYES_H_
#define TURNOVER_NAIVE_BAYES_H_

#include <array>
#include <span>
#include <vector>

#include "json.hpp"
#include "turnover/design.h"

namespace turnover {

struct NaiveBayesParams {
  double laplace_alpha = 1.0;
  bool operator==(const NaiveBayesParams&) const = default;
};

// Class priors and per-feature class-conditional distributions, all from
// weighted counts. Index 0 is Active, 1 is Terminated.
struct NaiveBayesState {
  struct Feature {
    bool discrete = true;
    // Smoothed level probabilities (discrete features).
    std::array<std::vector<double>, 2> level_probability;
    // Gaussian parameters (numeric features).
    std::array<double, 2> mean = {0.0, 0.0};
    std::array<double, 2> variance = {1.0, 1.0};
  };
  std::array<double, 2> prior = {0.5, 0.5};
  std::vector<Feature> features;
};

NaiveBayesState FitNaiveBayes(const FeatureMatrix& matrix,
                              std::span<const int> targets,
                              std::span<const double> weights,
                              const NaiveBayesParams& params);

// Posterior (Active, Terminated) of one raw row.
std::array<double, 2> NaiveBayesPosteriors(const NaiveBayesState& state,
                                           std::span<const double> row);

nlohmann::json NaiveBayesToJson(const NaiveBayesState& state);
NaiveBayesState NaiveBayesFromJson(const nlohmann::json& json);

}  // namespace turnover

#endif  // TURNOVER_NAIVE_BAYES_H_
