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

#include "turnover/balance.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "turnover/error.h"
#include "turnover/random.h"

namespace turnover {
namespace {

struct ClassSplit {
  std::vector<std::size_t> minority;
  std::vector<std::size_t> majority;
};

ClassSplit SplitClasses(const Dataset& dataset) {
  std::vector<std::size_t> active, terminated;
  for (std::size_t r = 0; r < dataset.size(); ++r) {
    switch (dataset.row(r).label) {
      case Label::kActive:
        active.push_back(r);
        break;
      case Label::kTerminated:
        terminated.push_back(r);
        break;
      case Label::kUnknown:
        throw DataError("cannot rebalance Unknown labels", r + 1,
                        dataset.schema().label_name());
    }
  }
  if (active.empty() || terminated.empty()) {
    throw DataError("rebalancing needs both classes");
  }
  if (terminated.size() <= active.size()) {
    return {std::move(terminated), std::move(active)};
  }
  return {std::move(active), std::move(terminated)};
}

std::vector<std::size_t> NumericColumns(const Schema& schema) {
  std::vector<std::size_t> out;
  for (std::size_t f = 0; f < schema.num_features(); ++f) {
    if (!schema.feature(f).IsDiscrete()) out.push_back(f);
  }
  return out;
}

// Population standard deviation of column f over the given rows.
double ColumnSd(const Dataset& dataset, std::span<const std::size_t> rows,
                std::size_t f) {
  double mean = 0.0;
  for (std::size_t r : rows) mean += dataset.row(r).values[f];
  mean /= static_cast<double>(rows.size());
  double var = 0.0;
  for (std::size_t r : rows) {
    const double d = dataset.row(r).values[f] - mean;
    var += d * d;
  }
  return std::sqrt(var / static_cast<double>(rows.size()));
}

WeightedDataset Assemble(const Dataset& dataset,
                         std::vector<EmployeeRecord> rows,
                         std::vector<std::string> provenance) {
  WeightedDataset out;
  out.weights.assign(rows.size(), 1.0);
  out.provenance = std::move(provenance);
  out.dataset = Dataset(dataset.schema(), std::move(rows));
  return out;
}

}  // namespace

ResamplingMethod ResamplingMethod::Smote(int k_neighbors) {
  ResamplingMethod m{Kind::kSmote};
  m.k_neighbors = k_neighbors;
  return m;
}

ResamplingMethod ResamplingMethod::Rose(double shrink) {
  ResamplingMethod m{Kind::kRose};
  m.shrink = shrink;
  return m;
}

ResamplingMethod ResamplingMethod::WithSeed(std::uint64_t s) const {
  ResamplingMethod m = *this;
  m.seed = s;
  return m;
}

std::string ResamplingMethod::Name() const {
  switch (kind) {
    case Kind::kNone:
      return "none";
    case Kind::kDown:
      return "down";
    case Kind::kUp:
      return "up";
    case Kind::kWeights:
      return "weights";
    case Kind::kSmote:
      return "smote";
    case Kind::kRose:
      return "rose";
  }
  return "none";
}

void ResamplingMethod::Validate() const {
  if (kind == Kind::kSmote && k_neighbors < 1) {
    throw ConfigError("SMOTE needs k_neighbors >= 1");
  }
  if (kind == Kind::kRose && !(shrink > 0.0 && std::isfinite(shrink))) {
    throw ConfigError("ROSE needs shrink > 0");
  }
}

nlohmann::json ResamplingToJson(const ResamplingMethod& method) {
  nlohmann::json out = {{"method", method.Name()}};
  if (method.kind == ResamplingMethod::Kind::kSmote) {
    out["k_neighbors"] = method.k_neighbors;
  }
  if (method.kind == ResamplingMethod::Kind::kRose) {
    out["shrink"] = method.shrink;
  }
  return out;
}

ResamplingMethod ResamplingFromJson(const nlohmann::json& json) {
  const std::string name = json.is_string()
                               ? json.get<std::string>()
                               : json.at("method").get<std::string>();
  ResamplingMethod m;
  if (name == "none") {
    m = ResamplingMethod::None();
  } else if (name == "down") {
    m = ResamplingMethod::Down();
  } else if (name == "up") {
    m = ResamplingMethod::Up();
  } else if (name == "weights") {
    m = ResamplingMethod::Weights();
  } else if (name == "smote") {
    m = ResamplingMethod::Smote(json.is_object() ? json.value("k_neighbors", 5)
                                                 : 5);
  } else if (name == "rose") {
    m = ResamplingMethod::Rose(json.is_object() ? json.value("shrink", 1.0)
                                                : 1.0);
  } else {
    throw ConfigError("unknown resampling method \"" + name + "\"");
  }
  m.Validate();
  return m;
}

WeightedDataset WeightedDataset::Uniform(Dataset dataset) {
  WeightedDataset out;
  out.weights.assign(dataset.size(), 1.0);
  for (const auto& row : dataset.rows()) out.provenance.push_back(row.id);
  out.dataset = std::move(dataset);
  return out;
}

std::vector<EmployeeRecord> SmoteSynthesize(
    const Schema& schema, std::span<const EmployeeRecord> minority, int k,
    std::size_t count, std::uint64_t seed,
    std::vector<std::size_t>* seed_rows) {
  if (k < 1) throw ConfigError("SMOTE needs k >= 1");
  const std::size_t m = minority.size();
  if (m <= static_cast<std::size_t>(k)) {
    throw ConfigError("SMOTE needs more than k = " + std::to_string(k) +
                      " minority rows, got " + std::to_string(m));
  }
  const std::size_t p = schema.num_features();
  // Standardization scales over the minority rows.
  std::vector<double> inv_sd(p, 0.0);
  for (std::size_t f = 0; f < p; ++f) {
    if (schema.feature(f).IsDiscrete()) continue;
    double mean = 0.0;
    for (const auto& r : minority) mean += r.values[f];
    mean /= static_cast<double>(m);
    double var = 0.0;
    for (const auto& r : minority) {
      var += (r.values[f] - mean) * (r.values[f] - mean);
    }
    const double sd = std::sqrt(var / static_cast<double>(m));
    inv_sd[f] = sd > 0.0 ? 1.0 / sd : 0.0;
  }
  auto distance2 = [&](const EmployeeRecord& a, const EmployeeRecord& b) {
    double d2 = 0.0;
    for (std::size_t f = 0; f < p; ++f) {
      if (schema.feature(f).IsDiscrete()) {
        d2 += a.values[f] != b.values[f] ? 1.0 : 0.0;
      } else {
        const double z = (a.values[f] - b.values[f]) * inv_sd[f];
        d2 += z * z;
      }
    }
    return d2;
  };
  const auto kk = static_cast<std::size_t>(k);
  std::vector<std::vector<std::size_t>> neighbors(m);
  std::vector<std::pair<double, std::size_t>> candidates;
  for (std::size_t i = 0; i < m; ++i) {
    candidates.clear();
    for (std::size_t j = 0; j < m; ++j) {
      if (j != i) candidates.emplace_back(distance2(minority[i], minority[j]), j);
    }
    std::partial_sort(candidates.begin(), candidates.begin() + kk,
                      candidates.end());
    for (std::size_t t = 0; t < kk; ++t) {
      neighbors[i].push_back(candidates[t].second);
    }
  }

  Rng rng(seed);
  std::vector<EmployeeRecord> out;
  out.reserve(count);
  if (seed_rows) seed_rows->clear();
  for (std::size_t s = 0; s < count; ++s) {
    const std::size_t a = rng.Index(m);
    const std::size_t b = neighbors[a][rng.Index(kk)];
    const double gap = rng.Uniform();
    EmployeeRecord record = minority[a];
    record.id = "~smote-" + std::to_string(s + 1);
    for (std::size_t f = 0; f < p; ++f) {
      if (schema.feature(f).IsDiscrete()) continue;
      const double from = minority[a].values[f];
      const double to = minority[b].values[f];
      record.values[f] = from + gap * (to - from);
    }
    out.push_back(std::move(record));
    if (seed_rows) seed_rows->push_back(a);
  }
  return out;
}

WeightedDataset Rebalance(const Dataset& dataset,
                          const ResamplingMethod& method) {
  method.Validate();
  const ClassSplit classes = SplitClasses(dataset);
  const std::size_t n_min = classes.minority.size();
  const std::size_t n_maj = classes.majority.size();
  Rng rng(method.seed);

  switch (method.kind) {
    case ResamplingMethod::Kind::kNone:
      return WeightedDataset::Uniform(dataset);

    case ResamplingMethod::Kind::kWeights: {
      WeightedDataset out = WeightedDataset::Uniform(dataset);
      const double n = static_cast<double>(dataset.size());
      const double w_min = n / (2.0 * static_cast<double>(n_min));
      const double w_maj = n / (2.0 * static_cast<double>(n_maj));
      const Label minority_label = dataset.row(classes.minority[0]).label;
      for (std::size_t r = 0; r < dataset.size(); ++r) {
        out.weights[r] = dataset.row(r).label == minority_label ? w_min : w_maj;
      }
      return out;
    }

    case ResamplingMethod::Kind::kDown: {
      std::vector<std::size_t> majority = classes.majority;
      rng.Shuffle(majority);
      majority.resize(n_min);
      std::vector<std::size_t> keep = classes.minority;
      keep.insert(keep.end(), majority.begin(), majority.end());
      std::sort(keep.begin(), keep.end());
      return WeightedDataset::Uniform(dataset.Subset(keep));
    }

    case ResamplingMethod::Kind::kUp: {
      std::vector<EmployeeRecord> rows = dataset.rows();
      std::vector<std::string> provenance;
      for (const auto& row : rows) provenance.push_back(row.id);
      for (std::size_t i = 0; i < n_maj - n_min; ++i) {
        EmployeeRecord copy =
            dataset.row(classes.minority[rng.Index(n_min)]);
        provenance.push_back(copy.id);
        copy.id += "~up" + std::to_string(i + 1);
        rows.push_back(std::move(copy));
      }
      return Assemble(dataset, std::move(rows), std::move(provenance));
    }

    case ResamplingMethod::Kind::kSmote: {
      std::vector<EmployeeRecord> minority_rows;
      for (std::size_t r : classes.minority) {
        minority_rows.push_back(dataset.row(r));
      }
      std::vector<std::size_t> seeds;
      auto synthetic =
          SmoteSynthesize(dataset.schema(), minority_rows, method.k_neighbors,
                          n_maj - n_min, DeriveSeed(method.seed, 1), &seeds);
      // The majority is sampled down to the same target count, which is its
      // own size here.
      std::vector<std::size_t> majority = classes.majority;
      rng.Shuffle(majority);
      majority.resize(n_maj);
      std::sort(majority.begin(), majority.end());
      std::vector<std::size_t> keep = classes.minority;
      keep.insert(keep.end(), majority.begin(), majority.end());
      std::sort(keep.begin(), keep.end());
      std::vector<EmployeeRecord> rows;
      std::vector<std::string> provenance;
      for (std::size_t r : keep) {
        rows.push_back(dataset.row(r));
        provenance.push_back(dataset.row(r).id);
      }
      for (std::size_t i = 0; i < synthetic.size(); ++i) {
        provenance.push_back(minority_rows[seeds[i]].id);
        rows.push_back(std::move(synthetic[i]));
      }
      return Assemble(dataset, std::move(rows), std::move(provenance));
    }

    case ResamplingMethod::Kind::kRose: {
      const Schema& schema = dataset.schema();
      const auto numeric = NumericColumns(schema);
      const double d = static_cast<double>(numeric.size());
      const std::size_t n = dataset.size();
      std::vector<std::size_t> active, terminated;
      for (std::size_t r = 0; r < n; ++r) {
        (dataset.row(r).label == Label::kTerminated ? terminated : active)
            .push_back(r);
      }
      // Half per class; an odd row goes to Active.
      const std::size_t n_terminated = n / 2;
      const std::size_t n_active = n - n_terminated;
      std::vector<EmployeeRecord> rows;
      std::vector<std::string> provenance;
      rows.reserve(n);
      std::size_t next_id = 1;
      for (const auto* members : {&active, &terminated}) {
        const std::size_t target =
            members == &active ? n_active : n_terminated;
        const double class_size = static_cast<double>(members->size());
        const double factor =
            method.shrink * std::pow(class_size, -1.0 / (d + 4.0));
        std::vector<double> bandwidth(schema.num_features(), 0.0);
        for (std::size_t f : numeric) {
          bandwidth[f] = factor * ColumnSd(dataset, *members, f);
        }
        for (std::size_t i = 0; i < target; ++i) {
          const auto& source = dataset.row((*members)[rng.Index(members->size())]);
          EmployeeRecord record = source;
          record.id = "~rose-" + std::to_string(next_id++);
          for (std::size_t f : numeric) {
            record.values[f] += bandwidth[f] * rng.Normal();
          }
          provenance.push_back(source.id);
          rows.push_back(std::move(record));
        }
      }
      return Assemble(dataset, std::move(rows), std::move(provenance));
    }
  }
  throw ConfigError("unknown resampling method");
}

}  // namespace turnover
