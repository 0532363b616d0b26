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

#include "turnover/discriminant.h"

#include <Eigen/Dense>
#include <cmath>

#include "turnover/error.h"

namespace turnover {

LdaState FitLda(const FeatureMatrix& matrix, std::span<const int> targets,
                std::span<const double> weights, const LdaParams& params) {
  if (!(params.ridge >= 0.0)) throw ConfigError("LDA ridge must be >= 0");
  LdaState state;
  state.encoder = Encoder::Fit(matrix, weights, Encoder::Style::kDropFirst);
  const std::size_t d = state.encoder.width();
  const std::size_t n = matrix.rows;

  Eigen::MatrixXd x(n, d);
  for (std::size_t r = 0; r < n; ++r) {
    const auto encoded = state.encoder.Transform(matrix.Row(r));
    for (std::size_t c = 0; c < d; ++c) x(r, c) = encoded[c];
  }

  std::array<double, 2> class_weight = {0.0, 0.0};
  std::array<Eigen::VectorXd, 2> mean = {Eigen::VectorXd::Zero(d),
                                         Eigen::VectorXd::Zero(d)};
  for (std::size_t r = 0; r < n; ++r) {
    class_weight[targets[r]] += weights[r];
    mean[targets[r]] += weights[r] * x.row(r).transpose();
  }
  for (int c = 0; c < 2; ++c) mean[c] /= class_weight[c];
  const double total = class_weight[0] + class_weight[1];

  Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t r = 0; r < n; ++r) {
    const Eigen::VectorXd centered = x.row(r).transpose() - mean[targets[r]];
    scatter.noalias() += weights[r] * centered * centered.transpose();
  }
  const double dof = total > 2.0 ? total - 2.0 : total;
  Eigen::MatrixXd covariance = scatter / dof;
  covariance.diagonal().array() += params.ridge;

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigen(
      covariance, Eigen::EigenvaluesOnly);
  const double largest = eigen.eigenvalues().maxCoeff();
  const double smallest = eigen.eigenvalues().minCoeff();
  if (d > 0 && !(smallest > 1e-12 * std::max(largest, 1.0))) {
    throw SingularCovariance(
        "pooled covariance is singular; use a positive LDA ridge");
  }
  const Eigen::VectorXd difference = mean[1] - mean[0];
  const Eigen::VectorXd direction = covariance.ldlt().solve(difference);

  state.prior = {class_weight[0] / total, class_weight[1] / total};
  state.coefficients.assign(direction.data(), direction.data() + d);
  state.intercept = -0.5 * direction.dot(mean[0] + mean[1]) +
                    std::log(state.prior[1] / state.prior[0]);
  for (int c = 0; c < 2; ++c) {
    state.means[c].assign(mean[c].data(), mean[c].data() + d);
  }
  return state;
}

double LdaScore(const LdaState& state, std::span<const double> row) {
  const auto x = state.encoder.Transform(row);
  double score = state.intercept;
  for (std::size_t c = 0; c < x.size(); ++c) {
    score += state.coefficients[c] * x[c];
  }
  return score;
}

std::array<double, 2> LdaPosteriors(const LdaState& state,
                                    std::span<const double> row) {
  const double score = LdaScore(state, row);
  // Stable logistic on both sides.
  if (score >= 0.0) {
    const double e = std::exp(-score);
    return {e / (1.0 + e), 1.0 / (1.0 + e)};
  }
  const double e = std::exp(score);
  return {1.0 / (1.0 + e), e / (1.0 + e)};
}

nlohmann::json LdaToJson(const LdaState& state) {
  return {{"encoder", state.encoder.ToJson()},
          {"coefficients", state.coefficients},
          {"intercept", state.intercept},
          {"prior", state.prior},
          {"means", state.means}};
}

LdaState LdaFromJson(const nlohmann::json& json) {
  LdaState state;
  state.encoder = Encoder::FromJson(json.at("encoder"));
  state.coefficients = json.at("coefficients").get<std::vector<double>>();
  state.intercept = json.at("intercept").get<double>();
  state.prior = json.at("prior").get<std::array<double, 2>>();
  state.means = json.at("means").get<std::array<std::vector<double>, 2>>();
  return state;
}

}  // namespace turnover
