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

#include "test_util.h"

#include <stdlib.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "turnover/balance.h"
#include "turnover/svm.h"
#include "turnover/synthgen.h"

namespace turnover::testing {

EmployeeRecord MakeRow(std::string id, std::vector<double> values,
                       Label label, int year) {
  EmployeeRecord r;
  r.id = std::move(id);
  r.values = std::move(values);
  r.label = label;
  r.year = year;
  return r;
}

std::string MakeTempDir(const std::string& prefix) {
  std::string pattern =
      (std::filesystem::temp_directory_path() / (prefix + "-XXXXXX")).string();
  if (mkdtemp(pattern.data()) == nullptr) {
    throw std::runtime_error("mkdtemp failed for " + pattern);
  }
  return pattern;
}

std::string Slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void WriteText(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  out << contents;
}

double ReferenceMutualInformation(
    const std::vector<std::vector<std::uint64_t>>& counts) {
  long double total = 0;
  std::vector<long double> px(counts.size(), 0), py;
  for (std::size_t x = 0; x < counts.size(); ++x) {
    if (py.size() < counts[x].size()) py.resize(counts[x].size(), 0);
    for (std::size_t y = 0; y < counts[x].size(); ++y) {
      px[x] += counts[x][y];
      py[y] += counts[x][y];
      total += counts[x][y];
    }
  }
  long double mi = 0;
  for (std::size_t x = 0; x < counts.size(); ++x) {
    for (std::size_t y = 0; y < counts[x].size(); ++y) {
      if (counts[x][y] == 0) continue;
      const long double pxy = counts[x][y] / total;
      mi += pxy * std::log(pxy / ((px[x] / total) * (py[y] / total)));
    }
  }
  return static_cast<double>(mi);
}

double ReferenceEntropy(const std::vector<std::uint64_t>& counts) {
  long double total = 0;
  for (auto c : counts) total += c;
  long double h = 0;
  for (auto c : counts) {
    if (c > 0) h -= (c / total) * std::log(c / total);
  }
  return static_cast<double>(h);
}

double PairCountAuc(const std::vector<double>& scores,
                    const std::vector<Label>& labels) {
  std::uint64_t twice = 0, pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != Label::kTerminated) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != Label::kActive) continue;
      ++pairs;
      if (scores[i] > scores[j]) twice += 2;
      if (scores[i] == scores[j]) twice += 1;
    }
  }
  return static_cast<double>(twice) / (2.0 * static_cast<double>(pairs));
}

std::vector<std::vector<std::uint64_t>> RandomCounts(Rng& rng,
                                                     std::size_t max_rows,
                                                     std::uint64_t max_count) {
  const std::size_t rows = 1 + rng.Index(max_rows);
  std::vector<std::vector<std::uint64_t>> counts(rows,
                                                 std::vector<std::uint64_t>(2));
  std::uint64_t total = 0;
  for (auto& row : counts) {
    for (auto& c : row) {
      // Zero cells are common in real tables; draw them often.
      c = rng.Uniform() < 0.2 ? 0 : rng.Index(max_count + 1);
      total += c;
    }
  }
  if (total == 0) counts[0][0] = 1;
  return counts;
}

ContingencyTable TableFromCounts(
    const std::vector<std::vector<std::uint64_t>>& counts) {
  ContingencyTable t;
  t.feature = "x";
  for (std::size_t i = 0; i < counts.size(); ++i) {
    t.x_levels.push_back("l" + std::to_string(i));
  }
  t.counts = counts;
  return t;
}

double MaxKktViolation(const std::vector<std::vector<double>>& points,
                       const std::vector<int>& signs,
                       const std::vector<double>& upper, double gamma,
                       const std::vector<double>& alpha, double bias,
                       double bound_eps) {
  const std::size_t n = points.size();
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double f = bias;
    for (std::size_t j = 0; j < n; ++j) {
      double d2 = 0.0;
      for (std::size_t c = 0; c < points[i].size(); ++c) {
        const double d = points[i][c] - points[j][c];
        d2 += d * d;
      }
      f += alpha[j] * signs[j] * std::exp(-gamma * d2);
    }
    const double margin = signs[i] * f;
    double violation = 0.0;
    if (alpha[i] <= bound_eps) {
      violation = 1.0 - margin;
    } else if (alpha[i] >= upper[i] - bound_eps) {
      violation = margin - 1.0;
    } else {
      violation = std::abs(margin - 1.0);
    }
    worst = std::max(worst, violation);
  }
  return worst;
}

bool OnNeighbourSegment(const Schema& schema,
                        const std::vector<EmployeeRecord>& minority, int k,
                        const EmployeeRecord& point, double tolerance) {
  const std::size_t m = minority.size();
  const std::size_t p = schema.num_features();
  std::vector<double> scale(p, 0.0);
  for (std::size_t f = 0; f < p; ++f) {
    if (schema.feature(f).IsDiscrete()) continue;
    long double sum = 0, sum2 = 0;
    for (const auto& r : minority) {
      sum += r.values[f];
      sum2 += static_cast<long double>(r.values[f]) * r.values[f];
    }
    const long double mean = sum / m;
    const long double var = sum2 / m - mean * mean;
    scale[f] = var > 1e-24L ? static_cast<double>(1.0L / std::sqrt(var)) : 0.0;
  }
  auto distance = [&](const EmployeeRecord& a, const EmployeeRecord& b) {
    double d = 0.0;
    for (std::size_t f = 0; f < p; ++f) {
      if (schema.feature(f).IsDiscrete()) {
        d += a.values[f] != b.values[f];
      } else {
        const double z = (a.values[f] - b.values[f]) * scale[f];
        d += z * z;
      }
    }
    return d;
  };
  for (std::size_t a = 0; a < m; ++a) {
    bool discrete_match = true;
    for (std::size_t f = 0; f < p; ++f) {
      if (schema.feature(f).IsDiscrete() &&
          minority[a].values[f] != point.values[f]) {
        discrete_match = false;
      }
    }
    if (!discrete_match) continue;
    std::vector<double> d;
    for (std::size_t b = 0; b < m; ++b) {
      if (b != a) d.push_back(distance(minority[a], minority[b]));
    }
    std::vector<double> sorted = d;
    std::sort(sorted.begin(), sorted.end());
    const double kth = sorted[static_cast<std::size_t>(k) - 1];
    for (std::size_t b = 0; b < m; ++b) {
      if (b == a) continue;
      const double dist = d[b < a ? b : b - 1];
      // Relative slack absorbs rounding in the two distance computations.
      if (dist > kth * (1.0 + 1e-9) + 1e-12) continue;
      double num = 0.0, den = 0.0;
      for (std::size_t f = 0; f < p; ++f) {
        if (schema.feature(f).IsDiscrete()) continue;
        const double seg = minority[b].values[f] - minority[a].values[f];
        num += (point.values[f] - minority[a].values[f]) * seg;
        den += seg * seg;
      }
      const double t = den > 0.0 ? std::clamp(num / den, 0.0, 1.0) : 0.0;
      bool close = true;
      for (std::size_t f = 0; f < p && close; ++f) {
        if (schema.feature(f).IsDiscrete()) continue;
        const double on_segment =
            minority[a].values[f] +
            t * (minority[b].values[f] - minority[a].values[f]);
        close = std::abs(point.values[f] - on_segment) <= tolerance;
      }
      if (close) return true;
    }
  }
  return false;
}

PlantedSplit PreparePlanted(std::uint64_t seed) {
  GeneratorConfig config = DefaultTurnoverScenario();
  config.seed = seed;
  const Dataset data = GeneratePopulation(config).dataset;
  auto [train, test] = SplitStratified(data, 0.5, seed);
  std::vector<BinningRule> rules;
  for (const auto& spec : train.schema().features()) {
    if (!spec.IsDiscrete()) {
      rules.push_back(BinningRule::EqualFrequency(spec.name, 4));
    }
  }
  PlantedSplit out;
  out.selected = RankAndFilter(Discretize(train, rules).dataset, 0.6).selected;
  out.train = std::move(train);
  out.test = std::move(test);
  return out;
}

PlantedRun TrainPlantedForest(std::uint64_t seed,
                              std::size_t prediction_rows) {
  const PlantedSplit planted = PreparePlanted(seed);
  GeneratorConfig config = DefaultTurnoverScenario();
  config.seed = DeriveSeed(seed, 6);
  config.n = prediction_rows;
  config.unlabeled = true;
  config.id_prefix = "p";
  return {Fit(Rebalance(planted.train, ResamplingMethod::Up().WithSeed(seed)),
              ForestParams{.n_trees = 100, .mtry = 3}, planted.selected, seed),
          GeneratePopulation(config).dataset};
}

std::string StrongestPlantedDriver() {
  // Recomputes the planted log-odds of a large population from the scenario
  // weights and measures, per feature, the variance of its conditional mean.
  GeneratorConfig config = DefaultTurnoverScenario();
  config.n = 20000;
  config.seed = 12345;
  const Dataset data = GeneratePopulation(config).dataset;
  const Schema& schema = data.schema();
  const auto& effects = config.effect_weights;
  std::vector<double> logit(data.size(), 0.0);
  for (std::size_t r = 0; r < data.size(); ++r) {
    const auto& row = data.row(r);
    for (const auto& [name, weights] : effects.levels) {
      const std::size_t f = schema.RequireIndex(name);
      const auto it = weights.find(schema.feature(f).levels[row.Level(f)]);
      if (it != weights.end()) logit[r] += it->second;
    }
    for (const auto& term : effects.interactions) {
      bool holds = true;
      for (const auto& [name, levels] : term.when) {
        const std::size_t f = schema.RequireIndex(name);
        const std::string& level = schema.feature(f).levels[row.Level(f)];
        holds = holds &&
                std::find(levels.begin(), levels.end(), level) != levels.end();
      }
      if (holds) logit[r] += term.weight;
    }
  }
  double mean = 0.0;
  for (double z : logit) mean += z;
  mean /= static_cast<double>(logit.size());
  std::string best;
  double best_variance = -1.0;
  for (std::size_t f = 0; f < schema.num_features(); ++f) {
    if (!schema.feature(f).IsDiscrete()) continue;
    std::map<std::size_t, std::pair<double, double>> by_level;
    for (std::size_t r = 0; r < data.size(); ++r) {
      auto& [sum, count] = by_level[data.row(r).Level(f)];
      sum += logit[r];
      count += 1.0;
    }
    double variance = 0.0;
    for (const auto& [level, sc] : by_level) {
      const double d = sc.first / sc.second - mean;
      variance += sc.second * d * d;
    }
    variance /= static_cast<double>(data.size());
    if (variance > best_variance) {
      best_variance = variance;
      best = schema.feature(f).name;
    }
  }
  return best;
}

}  // namespace turnover::testing
