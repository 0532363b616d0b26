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

#ifndef TURNOVER_DISCRIMINANT_H_
#define TURNOVER_DISCRIMINANT_H_

#include <array>
#include <span>
#include <vector>

#include "json.hpp"
#include "turnover/design.h"

namespace turnover {

struct LdaParams {
  // Added to the pooled covariance diagonal.
  double ridge = 1e-6;
  bool operator==(const LdaParams&) const = default;
};

// Two-class linear discriminant over the encoded features:
// score(x) = coefficients . x + intercept is the log posterior odds of
// Terminated.
struct LdaState {
  Encoder encoder;
  std::vector<double> coefficients;
  double intercept = 0.0;
  std::array<double, 2> prior = {0.5, 0.5};
  std::array<std::vector<double>, 2> means;
};

// Weighted class means and pooled covariance (divided by total weight
// minus 2). Throws SingularCovariance when the regularized covariance is
// not positive definite.
LdaState FitLda(const FeatureMatrix& matrix, std::span<const int> targets,
                std::span<const double> weights, const LdaParams& params);

double LdaScore(const LdaState& state, std::span<const double> row);
std::array<double, 2> LdaPosteriors(const LdaState& state,
                                    std::span<const double> row);

nlohmann::json LdaToJson(const LdaState& state);
LdaState LdaFromJson(const nlohmann::json& json);

}  // namespace turnover

#endif  // TURNOVER_DISCRIMINANT_H_
