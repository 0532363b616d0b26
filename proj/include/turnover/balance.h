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

// Class-imbalance correction for training partitions.

#ifndef TURNOVER_BALANCE_H_
#define TURNOVER_BALANCE_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "turnover/dataset.h"

namespace turnover {

struct ResamplingMethod {
  enum class Kind { kNone, kDown, kUp, kWeights, kSmote, kRose };

  Kind kind = Kind::kNone;
  int k_neighbors = 5;  // SMOTE
  double shrink = 1.0;  // ROSE
  std::uint64_t seed = 0;

  static ResamplingMethod None() { return {Kind::kNone}; }
  static ResamplingMethod Down() { return {Kind::kDown}; }
  static ResamplingMethod Up() { return {Kind::kUp}; }
  static ResamplingMethod Weights() { return {Kind::kWeights}; }
  static ResamplingMethod Smote(int k_neighbors = 5);
  static ResamplingMethod Rose(double shrink = 1.0);

  ResamplingMethod WithSeed(std::uint64_t s) const;
  // "none", "down", "up", "weights", "smote", "rose".
  std::string Name() const;
  void Validate() const;

  bool operator==(const ResamplingMethod&) const = default;
};

nlohmann::json ResamplingToJson(const ResamplingMethod& method);
// Accepts a name string or {"method": name, "k_neighbors"|"shrink": ...}.
ResamplingMethod ResamplingFromJson(const nlohmann::json& json);

struct WeightedDataset {
  Dataset dataset;
  // One strictly positive weight per row.
  std::vector<double> weights;
  // Id of the input row each output row was copied or synthesized from
  // (the seed row for SMOTE and ROSE).
  std::vector<std::string> provenance;

  static WeightedDataset Uniform(Dataset dataset);
};

// Down: majority sampled without replacement to the minority count.
// Up: minority rows plus draws with replacement up to the majority count.
// Weights: rows unchanged, each class weighted N / (2 * class count) so the
// mean weight is 1.
// Smote: minority augmented with synthetic rows up to the majority count;
// the majority keeps that same count.
// Rose: N rows drawn half per class by smoothed bootstrap; numeric values
// get Gaussian jitter with bandwidth
// shrink * class sd * class_size^(-1/(d+4)), d = number of numeric features.
// Throws DataError for Unknown labels or a single class, ConfigError for
// SMOTE with minority count <= k.
WeightedDataset Rebalance(const Dataset& dataset,
                          const ResamplingMethod& method);

// Builds `count` synthetic rows. Each picks a random seed row and one of its
// k nearest minority neighbours (standardized Euclidean distance on numeric
// features plus one unit per mismatching discrete feature), interpolates
// numeric values at a uniform point of the segment and copies discrete
// values from the seed row. Ids are "~smote-<i>". When `seed_rows` is
// given it receives the index of each synthetic row's seed.
std::vector<EmployeeRecord> SmoteSynthesize(
    const Schema& schema, std::span<const EmployeeRecord> minority, int k,
    std::size_t count, std::uint64_t seed,
    std::vector<std::size_t>* seed_rows = nullptr);

}  // namespace turnover

#endif  // TURNOVER_BALANCE_H_
