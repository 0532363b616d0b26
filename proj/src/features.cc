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

#include "turnover/features.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "turnover/error.h"
#include "turnover/parallel.h"

namespace turnover {
namespace {

double Entropy(const std::vector<std::uint64_t>& marginal, double total) {
  double h = 0.0;
  for (std::uint64_t c : marginal) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / total;
    h -= p * std::log(p);
  }
  return h;
}

std::vector<std::uint64_t> RowMarginal(const ContingencyTable& t) {
  std::vector<std::uint64_t> out(t.counts.size(), 0);
  for (std::size_t x = 0; x < t.counts.size(); ++x) {
    for (std::uint64_t c : t.counts[x]) out[x] += c;
  }
  return out;
}

std::vector<std::uint64_t> ColumnMarginal(const ContingencyTable& t) {
  std::vector<std::uint64_t> out(t.y_levels.size(), 0);
  for (const auto& row : t.counts) {
    for (std::size_t y = 0; y < row.size(); ++y) out[y] += row[y];
  }
  return out;
}

std::string BinLabel(const std::vector<double>& edges, std::size_t bin) {
  if (bin == 0) return "<" + FormatNumber(edges.front());
  if (bin == edges.size()) return ">=" + FormatNumber(edges.back());
  return "[" + FormatNumber(edges[bin - 1]) + "," + FormatNumber(edges[bin]) +
         ")";
}

}  // namespace

std::uint64_t ContingencyTable::Total() const {
  std::uint64_t total = 0;
  for (const auto& row : counts) {
    for (std::uint64_t c : row) total += c;
  }
  return total;
}

ContingencyTable ContingencyTable::Transposed() const {
  ContingencyTable t;
  t.feature = feature;
  t.x_levels = y_levels;
  t.y_levels = x_levels;
  t.counts.assign(y_levels.size(),
                  std::vector<std::uint64_t>(x_levels.size(), 0));
  for (std::size_t x = 0; x < counts.size(); ++x) {
    for (std::size_t y = 0; y < counts[x].size(); ++y) {
      t.counts[y][x] = counts[x][y];
    }
  }
  return t;
}

void ValidateTable(const ContingencyTable& table) {
  if (table.counts.size() != table.x_levels.size()) {
    throw DataError("contingency table rows do not match x levels");
  }
  for (const auto& row : table.counts) {
    if (row.size() != table.y_levels.size()) {
      throw DataError("contingency table columns do not match y levels");
    }
  }
  if (table.Total() == 0) throw DataError("empty contingency table");
}

FeatureScore MutualInformation(const ContingencyTable& table) {
  ValidateTable(table);
  const double total = static_cast<double>(table.Total());
  const auto px = RowMarginal(table);
  const auto py = ColumnMarginal(table);
  double mi = 0.0;
  for (std::size_t x = 0; x < table.counts.size(); ++x) {
    for (std::size_t y = 0; y < table.counts[x].size(); ++y) {
      const std::uint64_t c = table.counts[x][y];
      if (c == 0) continue;
      const double pxy = static_cast<double>(c) / total;
      const double marginal_product = (static_cast<double>(px[x]) / total) *
                                      (static_cast<double>(py[y]) / total);
      mi += pxy * std::log(pxy / marginal_product);
    }
  }
  // Rounding can leave -1e-17 for independent tables.
  return {table.feature, std::max(0.0, mi)};
}

double EntropyX(const ContingencyTable& table) {
  ValidateTable(table);
  return Entropy(RowMarginal(table), static_cast<double>(table.Total()));
}

double EntropyY(const ContingencyTable& table) {
  ValidateTable(table);
  return Entropy(ColumnMarginal(table), static_cast<double>(table.Total()));
}

ContingencyTable BuildContingencyTable(const Dataset& dataset,
                                       std::size_t feature) {
  const auto& spec = dataset.schema().feature(feature);
  if (!spec.IsDiscrete()) {
    throw ConfigError("feature \"" + spec.name +
                      "\" must be discretized before scoring");
  }
  ContingencyTable table;
  table.feature = spec.name;
  table.x_levels = spec.levels;
  table.counts.assign(spec.levels.size(), std::vector<std::uint64_t>(2, 0));
  for (std::size_t r = 0; r < dataset.size(); ++r) {
    const auto& row = dataset.row(r);
    if (row.label == Label::kUnknown) {
      throw DataError("Unknown label cannot be scored", r + 1,
                      dataset.schema().label_name());
    }
    ++table.counts[row.Level(feature)][row.label == Label::kTerminated ? 1 : 0];
  }
  return table;
}

BinningRule BinningRule::DeclaredBands(std::string feature) {
  return {std::move(feature), Strategy::kDeclaredBands, 0};
}

BinningRule BinningRule::EqualFrequency(std::string feature, int bins) {
  if (bins < 2) throw ConfigError("equal-frequency binning needs k >= 2");
  return {std::move(feature), Strategy::kEqualFrequency, bins};
}

Dataset DiscretizationPlan::Apply(const Dataset& dataset) const {
  Schema schema = dataset.schema();
  std::vector<EmployeeRecord> rows = dataset.rows();
  for (const auto& [name, edges] : cut_points) {
    const std::size_t f = schema.RequireIndex(name);
    const auto& spec = schema.feature(f);
    if (spec.IsDiscrete()) {
      throw ConfigError("feature \"" + name + "\" is already discrete");
    }
    std::vector<std::string> labels;
    for (std::size_t b = 0; b <= edges.size(); ++b) {
      labels.push_back(BinLabel(edges, b));
    }
    FeatureSpec band = FeatureSpec::OrdinalBand(name, labels, edges,
                                                spec.actionable);
    for (auto& row : rows) {
      row.values[f] = static_cast<double>(band.BandOf(row.values[f]));
    }
    schema = schema.WithFeature(f, std::move(band));
  }
  return Dataset(std::move(schema), std::move(rows));
}

Discretized Discretize(const Dataset& dataset,
                       const std::vector<BinningRule>& rules) {
  const Schema& schema = dataset.schema();
  std::map<std::string, const BinningRule*> by_feature;
  for (const auto& rule : rules) {
    schema.RequireIndex(rule.feature);
    by_feature[rule.feature] = &rule;
  }
  DiscretizationPlan plan;
  for (std::size_t f = 0; f < schema.num_features(); ++f) {
    const auto& spec = schema.feature(f);
    if (spec.IsDiscrete()) continue;
    const auto it = by_feature.find(spec.name);
    if (it == by_feature.end()) {
      throw ConfigError("numeric feature \"" + spec.name +
                        "\" has no binning rule");
    }
    const BinningRule& rule = *it->second;
    if (rule.strategy == BinningRule::Strategy::kDeclaredBands) {
      throw ConfigError("numeric feature \"" + spec.name +
                        "\" has no declared bands; use equal_frequency");
    }
    std::vector<double> values;
    values.reserve(dataset.size());
    for (const auto& row : dataset.rows()) values.push_back(row.values[f]);
    std::sort(values.begin(), values.end());
    std::set<double> unique_values(values.begin(), values.end());
    const auto k = static_cast<std::size_t>(rule.bins);
    if (unique_values.size() < k) {
      throw ConfigError("feature \"" + spec.name + "\" has " +
                        std::to_string(unique_values.size()) +
                        " distinct values, fewer than " + std::to_string(k) +
                        " bins");
    }
    std::vector<double> edges;
    const std::size_t n = values.size();
    for (std::size_t b = 1; b < k; ++b) {
      const std::size_t pos = b * n / k;
      if (pos == 0 || pos >= n || values[pos - 1] == values[pos]) {
        // Quantile falls inside a run of ties: cut at the next value change.
        auto next = std::upper_bound(values.begin(), values.end(),
                                     values[std::min(pos, n - 1)]);
        if (next == values.end()) continue;
        const double edge = 0.5 * (*(next - 1) + *next);
        if (edges.empty() || edge > edges.back()) edges.push_back(edge);
        continue;
      }
      const double edge = 0.5 * (values[pos - 1] + values[pos]);
      if (edges.empty() || edge > edges.back()) edges.push_back(edge);
    }
    if (edges.empty()) {
      throw ConfigError("feature \"" + spec.name + "\" cannot be binned");
    }
    plan.cut_points[spec.name] = std::move(edges);
  }
  for (const auto& [name, rule] : by_feature) {
    if (rule->strategy == BinningRule::Strategy::kDeclaredBands &&
        !schema.feature(schema.RequireIndex(name)).IsDiscrete()) {
      throw ConfigError("numeric feature \"" + name + "\" has no bands");
    }
  }
  return {plan.Apply(dataset), plan};
}

FeatureRanking RankAndFilter(const Dataset& dataset, double keep_fraction) {
  if (!(keep_fraction > 0.0 && keep_fraction <= 1.0)) {
    throw ConfigError("keep_fraction must lie in (0, 1]");
  }
  const Schema& schema = dataset.schema();
  if (dataset.Count(Label::kUnknown) > 0) {
    throw DataError("feature ranking requires known labels");
  }
  const std::size_t p = schema.num_features();
  std::vector<FeatureScore> scores(p);
  ParallelFor(p, [&](std::size_t f) {
    scores[f] = MutualInformation(BuildContingencyTable(dataset, f));
  });
  std::sort(scores.begin(), scores.end(),
            [](const FeatureScore& a, const FeatureScore& b) {
              if (a.mi_nats != b.mi_nats) return a.mi_nats > b.mi_nats;
              return a.feature < b.feature;
            });
  const auto keep = static_cast<std::size_t>(
      std::ceil(keep_fraction * static_cast<double>(p) - 1e-9));
  FeatureRanking ranking;
  ranking.scores = std::move(scores);
  for (std::size_t i = 0; i < std::min(keep, p); ++i) {
    ranking.selected.push_back(ranking.scores[i].feature);
  }
  return ranking;
}

nlohmann::json FeatureRankingToJson(const FeatureRanking& ranking) {
  nlohmann::json rows = nlohmann::json::array();
  const std::set<std::string> selected(ranking.selected.begin(),
                                       ranking.selected.end());
  for (const auto& s : ranking.scores) {
    rows.push_back({{"feature", s.feature},
                    {"mi_nats", s.mi_nats},
                    {"selected", selected.contains(s.feature)}});
  }
  return {{"schema_version", 1}, {"unit", "nats"}, {"scores", rows}};
}

std::string FeatureRankingTable(const FeatureRanking& ranking) {
  const std::set<std::string> selected(ranking.selected.begin(),
                                       ranking.selected.end());
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-32s %12s  %s\n", "Feature", "MI (nats)",
                "Kept");
  out << line;
  for (const auto& s : ranking.scores) {
    std::snprintf(line, sizeof(line), "%-32s %12.6f  %s\n", s.feature.c_str(),
                  s.mi_nats, selected.contains(s.feature) ? "yes" : "no");
    out << line;
  }
  return out.str();
}

}  // namespace turnover
