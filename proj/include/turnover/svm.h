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

// RBF-kernel support vector classifier trained with an SMO solver, with
// Platt-scaled probabilities.

#ifndef TURNOVER_SVM_H_
#define TURNOVER_SVM_H_

#include <cstddef>
#include <span>
#include <vector>

#include "json.hpp"
#include "turnover/design.h"

namespace turnover {

struct SvmParams {
  double cost = 1.0;
  double gamma = 0.1;
  // Stopping tolerance on the maximal KKT violation.
  double tolerance = 1e-3;
  // Iteration budget, in multiples of the training set size.
  int max_passes = 1000;
  bool operator==(const SvmParams&) const = default;
};

double RbfKernel(std::span<const double> a, std::span<const double> b,
                 double gamma);

struct SmoSolution {
  std::vector<double> alpha;
  double bias = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

// Solves max sum(a) - 1/2 sum_ij a_i a_j y_i y_j K(x_i, x_j) subject to
// 0 <= a_i <= upper_i and sum_i a_i y_i = 0, selecting working pairs by
// maximal violation with second-order gain. Stops when the KKT gap is at
// most `tolerance`. The decision function is
// f(x) = sum_i a_i y_i K(x_i, x) + bias. `signs` holds +1 / -1.
SmoSolution SolveSmo(const std::vector<std::vector<double>>& points,
                     std::span<const int> signs,
                     std::span<const double> upper, double gamma,
                     double tolerance, std::size_t max_iterations);

// P(y = +1 | f) = 1 / (1 + exp(a * f + b)).
struct PlattScaling {
  double a = -1.0;
  double b = 0.0;
};

// Newton fit with regularized targets (Lin, Lin and Weng's variant of
// Platt's procedure).
PlattScaling FitPlatt(std::span<const double> decision_values,
                      std::span<const int> signs);
double PlattProbability(const PlattScaling& platt, double decision_value);

struct SvmState {
  Encoder encoder;
  double gamma = 0.1;
  std::vector<std::vector<double>> support_vectors;
  // alpha_i * y_i of each support vector.
  std::vector<double> coefficients;
  double bias = 0.0;
  PlattScaling platt;
  bool converged = true;
  std::size_t iterations = 0;
};

// Per-row box constraint is cost * weight.
SvmState FitSvm(const FeatureMatrix& matrix, std::span<const int> targets,
                std::span<const double> weights, const SvmParams& params);

double SvmDecision(const SvmState& state, std::span<const double> row);
double SvmProbability(const SvmState& state, std::span<const double> row);

nlohmann::json SvmToJson(const SvmState& state);
SvmState SvmFromJson(const nlohmann::json& json);

}  // namespace turnover

#endif  // TURNOVER_SVM_H_
