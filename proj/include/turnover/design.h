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

// Dense views of the selected features of a dataset, and the numeric
// encoding used by the linear and kernel classifiers.

#ifndef TURNOVER_DESIGN_H_
#define TURNOVER_DESIGN_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "turnover/dataset.h"

namespace turnover {

// Row-major matrix of raw feature codes (level index or number).
struct FeatureMatrix {
  std::vector<FeatureSpec> specs;
  std::size_t rows = 0;
  std::vector<double> values;

  std::size_t cols() const { return specs.size(); }
  double at(std::size_t r, std::size_t f) const {
    return values[r * specs.size() + f];
  }
  std::span<const double> Row(std::size_t r) const {
    return {values.data() + r * specs.size(), specs.size()};
  }
};

// Specs of the named features, in the given order. Throws ConfigError for
// names absent from the schema.
std::vector<FeatureSpec> SelectSpecs(const Schema& schema,
                                     const std::vector<std::string>& names);

// Extracts the columns matching `specs` by name.
FeatureMatrix ExtractFeatures(const Dataset& dataset,
                              const std::vector<FeatureSpec>& specs);

// 1 for Terminated, 0 for Active. Throws DataError on Unknown.
std::vector<int> BinaryTargets(const Dataset& dataset);

// Numeric and band features become one weighted-standardized column each;
// categorical features become level indicators.
class Encoder {
 public:
  enum class Style { kOneHot, kDropFirst };

  struct Column {
    std::size_t feature = 0;
    bool indicator = false;
    std::size_t level = 0;
    double center = 0.0;
    double scale = 1.0;
  };

  static Encoder Fit(const FeatureMatrix& matrix,
                     std::span<const double> weights, Style style);

  std::size_t width() const { return columns_.size(); }
  const std::vector<Column>& columns() const { return columns_; }
  std::vector<double> Transform(std::span<const double> row) const;

  nlohmann::json ToJson() const;
  static Encoder FromJson(const nlohmann::json& json);

 private:
  std::vector<Column> columns_;
};

}  // namespace turnover

#endif  // TURNOVER_DESIGN_H_
