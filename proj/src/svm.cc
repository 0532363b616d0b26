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

#include "turnover/svm.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "turnover/error.h"

namespace turnover {
namespace {

constexpr double kTau = 1e-12;

bool AtUpper(double alpha, double upper) { return alpha >= upper; }
bool AtLower(double alpha) { return alpha <= 0.0; }

}  // namespace

double RbfKernel(std::span<const double> a, std::span<const double> b,
                 double gamma) {
  double d2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    d2 += d * d;
  }
  return std::exp(-gamma * d2);
}

SmoSolution SolveSmo(const std::vector<std::vector<double>>& points,
                     std::span<const int> signs,
                     std::span<const double> upper, double gamma,
                     double tolerance, std::size_t max_iterations) {
  const std::size_t n = points.size();
  if (signs.size() != n || upper.size() != n) {
    throw ConfigError("SMO inputs have inconsistent sizes");
  }
  // Q_ij = y_i y_j K_ij, precomputed (desk-scale problems).
  std::vector<double> q(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double k = RbfKernel(points[i], points[j], gamma);
      q[i * n + j] = q[j * n + i] = signs[i] * signs[j] * k;
    }
  }
  auto Q = [&](std::size_t i, std::size_t j) { return q[i * n + j]; };

  SmoSolution solution;
  std::vector<double>& alpha = solution.alpha;
  alpha.assign(n, 0.0);
  // Gradient of 1/2 a'Qa - e'a.
  std::vector<double> gradient(n, -1.0);

  auto in_up = [&](std::size_t t) {
    return (signs[t] == 1 && !AtUpper(alpha[t], upper[t])) ||
           (signs[t] == -1 && !AtLower(alpha[t]));
  };
  auto in_low = [&](std::size_t t) {
    return (signs[t] == 1 && !AtLower(alpha[t])) ||
           (signs[t] == -1 && !AtUpper(alpha[t], upper[t]));
  };

  std::size_t iter = 0;
  for (; iter < max_iterations; ++iter) {
    // Working set selection: i maximizes -y G over I_up; j minimizes the
    // second-order objective over violating members of I_low.
    double g_max = -std::numeric_limits<double>::infinity();
    std::size_t i = n;
    for (std::size_t t = 0; t < n; ++t) {
      if (!in_up(t)) continue;
      const double v = -signs[t] * gradient[t];
      if (v >= g_max) {
        g_max = v;
        i = t;
      }
    }
    double g_max2 = -std::numeric_limits<double>::infinity();
    std::size_t j = n;
    double best_objective = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t) {
      if (!in_low(t)) continue;
      const double v = signs[t] * gradient[t];
      g_max2 = std::max(g_max2, v);
      if (i == n) continue;
      const double b = g_max + v;
      if (b > 0.0) {
        double a = Q(i, i) + Q(t, t) - 2.0 * signs[i] * signs[t] * Q(i, t);
        if (a <= 0.0) a = kTau;
        const double objective = -(b * b) / a;
        if (objective <= best_objective) {
          best_objective = objective;
          j = t;
        }
      }
    }
    if (i == n || j == n || g_max + g_max2 < tolerance) {
      solution.converged = true;
      break;
    }

    const double old_i = alpha[i];
    const double old_j = alpha[j];
    const double c_i = upper[i];
    const double c_j = upper[j];
    if (signs[i] != signs[j]) {
      double quad = Q(i, i) + Q(j, j) + 2.0 * Q(i, j);
      if (quad <= 0.0) quad = kTau;
      const double delta = (-gradient[i] - gradient[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = -diff;
      }
      if (diff > c_i - c_j) {
        if (alpha[i] > c_i) {
          alpha[i] = c_i;
          alpha[j] = c_i - diff;
        }
      } else if (alpha[j] > c_j) {
        alpha[j] = c_j;
        alpha[i] = c_j + diff;
      }
    } else {
      double quad = Q(i, i) + Q(j, j) - 2.0 * Q(i, j);
      if (quad <= 0.0) quad = kTau;
      const double delta = (gradient[i] - gradient[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c_i) {
        if (alpha[i] > c_i) {
          alpha[i] = c_i;
          alpha[j] = sum - c_i;
        }
      } else if (alpha[j] < 0.0) {
        alpha[j] = 0.0;
        alpha[i] = sum;
      }
      if (sum > c_j) {
        if (alpha[j] > c_j) {
          alpha[j] = c_j;
          alpha[i] = sum - c_j;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = sum;
      }
    }
    const double delta_i = alpha[i] - old_i;
    const double delta_j = alpha[j] - old_j;
    for (std::size_t t = 0; t < n; ++t) {
      gradient[t] += Q(t, i) * delta_i + Q(t, j) * delta_j;
    }
  }
  solution.iterations = iter;

  // Bias: average over free vectors, else the midpoint of the feasible
  // interval.
  double upper_bound = std::numeric_limits<double>::infinity();
  double lower_bound = -std::numeric_limits<double>::infinity();
  double free_sum = 0.0;
  std::size_t free_count = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = signs[t] * gradient[t];
    if (AtUpper(alpha[t], upper[t])) {
      if (signs[t] == -1) {
        upper_bound = std::min(upper_bound, yg);
      } else {
        lower_bound = std::max(lower_bound, yg);
      }
    } else if (AtLower(alpha[t])) {
      if (signs[t] == 1) {
        upper_bound = std::min(upper_bound, yg);
      } else {
        lower_bound = std::max(lower_bound, yg);
      }
    } else {
      ++free_count;
      free_sum += yg;
    }
  }
  const double rho = free_count > 0
                         ? free_sum / static_cast<double>(free_count)
                         : 0.5 * (upper_bound + lower_bound);
  solution.bias = -rho;
  return solution;
}

PlattScaling FitPlatt(std::span<const double> decision_values,
                      std::span<const int> signs) {
  const std::size_t n = decision_values.size();
  double prior1 = 0.0, prior0 = 0.0;
  for (int s : signs) (s > 0 ? prior1 : prior0) += 1.0;
  constexpr int kMaxIterations = 100;
  constexpr double kMinStep = 1e-10;
  constexpr double kSigma = 1e-12;
  constexpr double kEps = 1e-5;
  const double hi_target = (prior1 + 1.0) / (prior1 + 2.0);
  const double lo_target = 1.0 / (prior0 + 2.0);
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = signs[i] > 0 ? hi_target : lo_target;
  }
  double a = 0.0;
  double b = std::log((prior0 + 1.0) / (prior1 + 1.0));
  auto objective = [&](double aa, double bb) {
    double f = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double fapb = decision_values[i] * aa + bb;
      if (fapb >= 0) {
        f += t[i] * fapb + std::log1p(std::exp(-fapb));
      } else {
        f += (t[i] - 1.0) * fapb + std::log1p(std::exp(fapb));
      }
    }
    return f;
  };
  double fval = objective(a, b);
  for (int iter = 0; iter < kMaxIterations; ++iter) {
    double h11 = kSigma, h22 = kSigma, h21 = 0.0, g1 = 0.0, g2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double fapb = decision_values[i] * a + b;
      double p, q;
      if (fapb >= 0) {
        p = std::exp(-fapb) / (1.0 + std::exp(-fapb));
        q = 1.0 / (1.0 + std::exp(-fapb));
      } else {
        p = 1.0 / (1.0 + std::exp(fapb));
        q = std::exp(fapb) / (1.0 + std::exp(fapb));
      }
      const double d2 = p * q;
      h11 += decision_values[i] * decision_values[i] * d2;
      h22 += d2;
      h21 += decision_values[i] * d2;
      const double d1 = t[i] - p;
      g1 += decision_values[i] * d1;
      g2 += d1;
    }
    if (std::abs(g1) < kEps && std::abs(g2) < kEps) break;
    const double det = h11 * h22 - h21 * h21;
    const double da = -(h22 * g1 - h21 * g2) / det;
    const double db = -(-h21 * g1 + h11 * g2) / det;
    const double gd = g1 * da + g2 * db;
    double step = 1.0;
    while (step >= kMinStep) {
      const double new_a = a + step * da;
      const double new_b = b + step * db;
      const double new_f = objective(new_a, new_b);
      if (new_f < fval + 0.0001 * step * gd) {
        a = new_a;
        b = new_b;
        fval = new_f;
        break;
      }
      step /= 2.0;
    }
    if (step < kMinStep) break;
  }
  return {a, b};
}

double PlattProbability(const PlattScaling& platt, double decision_value) {
  const double fapb = decision_value * platt.a + platt.b;
  if (fapb >= 0) return std::exp(-fapb) / (1.0 + std::exp(-fapb));
  return 1.0 / (1.0 + std::exp(fapb));
}

SvmState FitSvm(const FeatureMatrix& matrix, std::span<const int> targets,
                std::span<const double> weights, const SvmParams& params) {
  if (!(params.cost > 0.0) || !(params.gamma > 0.0) ||
      !(params.tolerance > 0.0) || params.max_passes < 1) {
    throw ConfigError("SVM needs cost > 0, gamma > 0, tolerance > 0 and "
                      "max_passes >= 1");
  }
  SvmState state;
  state.gamma = params.gamma;
  state.encoder = Encoder::Fit(matrix, weights, Encoder::Style::kOneHot);
  const std::size_t n = matrix.rows;
  std::vector<std::vector<double>> points(n);
  std::vector<int> signs(n);
  std::vector<double> upper(n);
  for (std::size_t r = 0; r < n; ++r) {
    points[r] = state.encoder.Transform(matrix.Row(r));
    signs[r] = targets[r] == 1 ? 1 : -1;
    upper[r] = params.cost * weights[r];
  }
  const SmoSolution solution = SolveSmo(
      points, signs, upper, params.gamma, params.tolerance,
      static_cast<std::size_t>(params.max_passes) * std::max<std::size_t>(n, 1));
  state.bias = solution.bias;
  state.converged = solution.converged;
  state.iterations = solution.iterations;
  for (std::size_t r = 0; r < n; ++r) {
    if (solution.alpha[r] > 0.0) {
      state.support_vectors.push_back(points[r]);
      state.coefficients.push_back(solution.alpha[r] * signs[r]);
    }
  }
  std::vector<double> decision(n);
  for (std::size_t r = 0; r < n; ++r) {
    double f = state.bias;
    for (std::size_t s = 0; s < state.support_vectors.size(); ++s) {
      f += state.coefficients[s] *
           RbfKernel(state.support_vectors[s], points[r], state.gamma);
    }
    decision[r] = f;
  }
  state.platt = FitPlatt(decision, signs);
  return state;
}

double SvmDecision(const SvmState& state, std::span<const double> row) {
  const auto x = state.encoder.Transform(row);
  double f = state.bias;
  for (std::size_t s = 0; s < state.support_vectors.size(); ++s) {
    f += state.coefficients[s] * RbfKernel(state.support_vectors[s], x,
                                           state.gamma);
  }
  return f;
}

double SvmProbability(const SvmState& state, std::span<const double> row) {
  return PlattProbability(state.platt, SvmDecision(state, row));
}

nlohmann::json SvmToJson(const SvmState& state) {
  return {{"encoder", state.encoder.ToJson()},
          {"gamma", state.gamma},
          {"support_vectors", state.support_vectors},
          {"coefficients", state.coefficients},
          {"bias", state.bias},
          {"platt", {{"a", state.platt.a}, {"b", state.platt.b}}},
          {"converged", state.converged},
          {"iterations", state.iterations}};
}

SvmState SvmFromJson(const nlohmann::json& json) {
  SvmState state;
  state.encoder = Encoder::FromJson(json.at("encoder"));
  state.gamma = json.at("gamma").get<double>();
  state.support_vectors =
      json.at("support_vectors").get<std::vector<std::vector<double>>>();
  state.coefficients = json.at("coefficients").get<std::vector<double>>();
  state.bias = json.at("bias").get<double>();
  state.platt = {json.at("platt").at("a").get<double>(),
                 json.at("platt").at("b").get<double>()};
  state.converged = json.at("converged").get<bool>();
  state.iterations = json.at("iterations").get<std::size_t>();
  return state;
}

}  // namespace turnover
