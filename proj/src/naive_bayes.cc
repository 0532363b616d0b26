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

#include "turnover/naive_bayes.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "turnover/error.h"

namespace turnover {
namespace {

// Floor on Gaussian variances, relative to the pooled variance.
constexpr double kVarianceFloor = 1e-9;

}  // namespace

NaiveBayesState FitNaiveBayes(const FeatureMatrix& matrix,
                              std::span<const int> targets,
                              std::span<const double> weights,
                              const NaiveBayesParams& params) {
  if (!(params.laplace_alpha >= 0.0)) {
    throw ConfigError("laplace_alpha must be >= 0");
  }
  NaiveBayesState state;
  std::array<double, 2> class_weight = {0.0, 0.0};
  for (std::size_t r = 0; r < matrix.rows; ++r) {
    class_weight[targets[r]] += weights[r];
  }
  const double total = class_weight[0] + class_weight[1];
  state.prior = {class_weight[0] / total, class_weight[1] / total};

  for (std::size_t f = 0; f < matrix.cols(); ++f) {
    const auto& spec = matrix.specs[f];
    NaiveBayesState::Feature feature;
    feature.discrete = spec.IsDiscrete();
    if (feature.discrete) {
      const std::size_t levels = spec.levels.size();
      std::array<std::vector<double>, 2> counts = {
          std::vector<double>(levels, 0.0), std::vector<double>(levels, 0.0)};
      for (std::size_t r = 0; r < matrix.rows; ++r) {
        counts[targets[r]][static_cast<std::size_t>(matrix.at(r, f))] +=
            weights[r];
      }
      const double alpha = params.laplace_alpha;
      for (int c = 0; c < 2; ++c) {
        const double denom =
            class_weight[c] + alpha * static_cast<double>(levels);
        feature.level_probability[c].resize(levels);
        for (std::size_t l = 0; l < levels; ++l) {
          feature.level_probability[c][l] =
              denom > 0.0 ? (counts[c][l] + alpha) / denom
                          : 1.0 / static_cast<double>(levels);
        }
      }
    } else {
      std::array<double, 2> sum = {0.0, 0.0};
      for (std::size_t r = 0; r < matrix.rows; ++r) {
        sum[targets[r]] += weights[r] * matrix.at(r, f);
      }
      for (int c = 0; c < 2; ++c) feature.mean[c] = sum[c] / class_weight[c];
      std::array<double, 2> ss = {0.0, 0.0};
      for (std::size_t r = 0; r < matrix.rows; ++r) {
        const double d = matrix.at(r, f) - feature.mean[targets[r]];
        ss[targets[r]] += weights[r] * d * d;
      }
      const double pooled = (ss[0] + ss[1]) / total;
      const double floor = kVarianceFloor * std::max(pooled, 1.0);
      for (int c = 0; c < 2; ++c) {
        feature.variance[c] = std::max(ss[c] / class_weight[c], floor);
      }
    }
    state.features.push_back(std::move(feature));
  }
  return state;
}

std::array<double, 2> NaiveBayesPosteriors(const NaiveBayesState& state,
                                           std::span<const double> row) {
  std::array<double, 2> log_score = {std::log(state.prior[0]),
                                     std::log(state.prior[1])};
  for (std::size_t f = 0; f < state.features.size(); ++f) {
    const auto& feature = state.features[f];
    for (int c = 0; c < 2; ++c) {
      if (feature.discrete) {
        log_score[c] += std::log(
            feature.level_probability[c][static_cast<std::size_t>(row[f])]);
      } else {
        const double d = row[f] - feature.mean[c];
        log_score[c] += -0.5 * std::log(2.0 * std::numbers::pi *
                                        feature.variance[c]) -
                        0.5 * d * d / feature.variance[c];
      }
    }
  }
  const double top = std::max(log_score[0], log_score[1]);
  if (!std::isfinite(top)) {
    // Every class has zero likelihood (unsmoothed unseen level): fall back
    // to the priors.
    return state.prior;
  }
  const double e0 = std::exp(log_score[0] - top);
  const double e1 = std::exp(log_score[1] - top);
  return {e0 / (e0 + e1), e1 / (e0 + e1)};
}

nlohmann::json NaiveBayesToJson(const NaiveBayesState& state) {
  nlohmann::json features = nlohmann::json::array();
  for (const auto& f : state.features) {
    if (f.discrete) {
      features.push_back({{"discrete", true},
                          {"level_probability", f.level_probability}});
    } else {
      features.push_back({{"discrete", false},
                          {"mean", f.mean},
                          {"variance", f.variance}});
    }
  }
  return {{"prior", state.prior}, {"features", features}};
}

NaiveBayesState NaiveBayesFromJson(const nlohmann::json& json) {
  NaiveBayesState state;
  state.prior = json.at("prior").get<std::array<double, 2>>();
  for (const auto& f : json.at("features")) {
    NaiveBayesState::Feature feature;
    feature.discrete = f.at("discrete").get<bool>();
    if (feature.discrete) {
      feature.level_probability =
          f.at("level_probability").get<std::array<std::vector<double>, 2>>();
    } else {
      feature.mean = f.at("mean").get<std::array<double, 2>>();
      feature.variance = f.at("variance").get<std::array<double, 2>>();
    }
    state.features.push_back(std::move(feature));
  }
  return state;
}

}  // namespace turnover
