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

#include "turnover/design.h"

#include <cmath>

#include "turnover/error.h"

namespace turnover {

std::vector<FeatureSpec> SelectSpecs(const Schema& schema,
                                     const std::vector<std::string>& names) {
  std::vector<FeatureSpec> specs;
  specs.reserve(names.size());
  for (const auto& name : names) {
    specs.push_back(schema.feature(schema.RequireIndex(name)));
  }
  return specs;
}

FeatureMatrix ExtractFeatures(const Dataset& dataset,
                              const std::vector<FeatureSpec>& specs) {
  std::vector<std::size_t> columns;
  for (const auto& spec : specs) {
    const auto index = dataset.schema().IndexOf(spec.name);
    if (!index) {
      throw FingerprintMismatch("dataset lacks feature \"" + spec.name + "\"");
    }
    const auto& actual = dataset.schema().feature(*index);
    if (actual.kind != spec.kind || actual.levels != spec.levels) {
      throw FingerprintMismatch("feature \"" + spec.name +
                                "\" differs in kind or levels");
    }
    columns.push_back(*index);
  }
  FeatureMatrix matrix;
  matrix.specs = specs;
  matrix.rows = dataset.size();
  matrix.values.resize(matrix.rows * specs.size());
  for (std::size_t r = 0; r < dataset.size(); ++r) {
    const auto& values = dataset.row(r).values;
    for (std::size_t c = 0; c < columns.size(); ++c) {
      matrix.values[r * specs.size() + c] = values[columns[c]];
    }
  }
  return matrix;
}

std::vector<int> BinaryTargets(const Dataset& dataset) {
  std::vector<int> y;
  y.reserve(dataset.size());
  for (std::size_t r = 0; r < dataset.size(); ++r) {
    switch (dataset.row(r).label) {
      case Label::kActive:
        y.push_back(0);
        break;
      case Label::kTerminated:
        y.push_back(1);
        break;
      case Label::kUnknown:
        throw DataError("training rows need known labels", r + 1,
                        dataset.schema().label_name());
    }
  }
  return y;
}

Encoder Encoder::Fit(const FeatureMatrix& matrix,
                     std::span<const double> weights, Style style) {
  Encoder encoder;
  double total_weight = 0.0;
  for (double w : weights) total_weight += w;
  for (std::size_t f = 0; f < matrix.cols(); ++f) {
    const auto& spec = matrix.specs[f];
    if (spec.kind == FeatureKind::kCategorical) {
      const std::size_t first = style == Style::kDropFirst ? 1 : 0;
      for (std::size_t level = first; level < spec.levels.size(); ++level) {
        encoder.columns_.push_back({f, true, level, 0.0, 1.0});
      }
      continue;
    }
    double mean = 0.0;
    for (std::size_t r = 0; r < matrix.rows; ++r) {
      mean += weights[r] * matrix.at(r, f);
    }
    mean /= total_weight;
    double var = 0.0;
    for (std::size_t r = 0; r < matrix.rows; ++r) {
      const double d = matrix.at(r, f) - mean;
      var += weights[r] * d * d;
    }
    const double sd = std::sqrt(var / total_weight);
    encoder.columns_.push_back({f, false, 0, mean, sd > 0.0 ? sd : 1.0});
  }
  return encoder;
}

std::vector<double> Encoder::Transform(std::span<const double> row) const {
  std::vector<double> out(columns_.size());
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    const Column& col = columns_[c];
    if (col.indicator) {
      out[c] = static_cast<std::size_t>(row[col.feature]) == col.level ? 1.0
                                                                       : 0.0;
    } else {
      out[c] = (row[col.feature] - col.center) / col.scale;
    }
  }
  return out;
}

nlohmann::json Encoder::ToJson() const {
  nlohmann::json columns = nlohmann::json::array();
  for (const auto& c : columns_) {
    columns.push_back({{"feature", c.feature},
                       {"indicator", c.indicator},
                       {"level", c.level},
                       {"center", c.center},
                       {"scale", c.scale}});
  }
  return columns;
}

Encoder Encoder::FromJson(const nlohmann::json& json) {
  Encoder encoder;
  for (const auto& c : json) {
    encoder.columns_.push_back({c.at("feature").get<std::size_t>(),
                                c.at("indicator").get<bool>(),
                                c.at("level").get<std::size_t>(),
                                c.at("center").get<double>(),
                                c.at("scale").get<double>()});
  }
  return encoder;
}

}  // namespace turnover
