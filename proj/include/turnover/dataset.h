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

// Employee population schema, records and datasets: CSV ingestion,
// validation, scope curation and stratified splitting.

#ifndef TURNOVER_DATASET_H_
#define TURNOVER_DATASET_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

namespace turnover {

enum class FeatureKind { kCategorical, kNumeric, kOrdinalBand };

std::string_view FeatureKindName(FeatureKind kind);
FeatureKind ParseFeatureKind(std::string_view name);

struct FeatureSpec {
  std::string name;
  FeatureKind kind = FeatureKind::kCategorical;
  // Category levels or ordered band labels. Empty for numeric features.
  std::vector<std::string> levels;
  // Numeric unit label.
  std::string unit;
  // Optional cut points of an ordinal band feature: a raw number v is mapped
  // to the first band i with v < cut_points[i], or to the last band.
  // levels.size() == cut_points.size() + 1 when present.
  std::vector<double> cut_points;
  // Whether retention policies may rewrite this feature.
  bool actionable = false;

  static FeatureSpec Categorical(std::string name,
                                 std::vector<std::string> levels,
                                 bool actionable = false);
  static FeatureSpec Numeric(std::string name, std::string unit = {},
                             bool actionable = false);
  static FeatureSpec OrdinalBand(std::string name,
                                 std::vector<std::string> bands,
                                 std::vector<double> cut_points = {},
                                 bool actionable = false);

  bool IsDiscrete() const { return kind != FeatureKind::kNumeric; }
  std::optional<std::size_t> LevelIndex(std::string_view level) const;
  // Band index of a raw value using cut_points. Requires cut points.
  std::size_t BandOf(double value) const;

  bool operator==(const FeatureSpec&) const = default;
};

// Ordered feature list plus the label column name. The CSV layout also
// carries an "id" column, a "year" column and optional free-text metadata
// columns (e.g. an exit reason consumed by CurateScope).
class Schema {
 public:
  static constexpr std::string_view kIdColumn = "id";
  static constexpr std::string_view kYearColumn = "year";

  Schema() = default;
  // Throws ConfigError when invariants do not hold.
  Schema(std::vector<FeatureSpec> features, std::string label_name = "label",
         std::vector<std::string> metadata_columns = {});

  const std::vector<FeatureSpec>& features() const { return features_; }
  const FeatureSpec& feature(std::size_t i) const { return features_[i]; }
  std::size_t num_features() const { return features_.size(); }
  const std::string& label_name() const { return label_name_; }
  const std::vector<std::string>& metadata_columns() const {
    return metadata_columns_;
  }

  std::optional<std::size_t> IndexOf(std::string_view name) const;
  // Throws ConfigError if absent.
  std::size_t RequireIndex(std::string_view name) const;

  // Copy with the metadata columns dropped.
  Schema WithoutMetadata() const;
  // Copy with feature i replaced.
  Schema WithFeature(std::size_t i, FeatureSpec spec) const;

  bool operator==(const Schema&) const = default;

 private:
  std::vector<FeatureSpec> features_;
  std::string label_name_ = "label";
  std::vector<std::string> metadata_columns_;
};

nlohmann::json SchemaToJson(const Schema& schema);
Schema SchemaFromJson(const nlohmann::json& json);

enum class Label { kActive, kTerminated, kUnknown };

std::string_view LabelName(Label label);
// Accepts "Active", "Terminated" and "Unknown".
std::optional<Label> ParseLabel(std::string_view text);

struct EmployeeRecord {
  std::string id;
  // One value per schema feature: the level index for categorical and band
  // features, the raw value for numeric features.
  std::vector<double> values;
  Label label = Label::kUnknown;
  int year = 1;
  // One entry per schema metadata column.
  std::vector<std::string> metadata;

  std::size_t Level(std::size_t feature) const {
    return static_cast<std::size_t>(values[feature]);
  }

  bool operator==(const EmployeeRecord&) const = default;
};

// Immutable, validated collection of records.
class Dataset {
 public:
  Dataset() = default;
  // Validates every row; throws DataError naming the row and column.
  Dataset(Schema schema, std::vector<EmployeeRecord> rows);

  const Schema& schema() const { return schema_; }
  const std::vector<EmployeeRecord>& rows() const { return rows_; }
  const EmployeeRecord& row(std::size_t i) const { return rows_[i]; }
  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }

  std::size_t Count(Label label) const;
  std::vector<Label> Labels() const;
  // Human-readable value of a cell (level name or number).
  std::string TextValue(std::size_t row, std::size_t feature) const;
  std::optional<std::size_t> FindId(std::string_view id) const;

  Dataset Subset(std::span<const std::size_t> indices) const;

  bool operator==(const Dataset&) const = default;

 private:
  Schema schema_;
  std::vector<EmployeeRecord> rows_;
};

// Parses header-bearing comma-delimited text. The header must contain
// exactly the id column, every feature, the label column, the year column
// and the schema's metadata columns, in any order. Band features accept
// either a band label or, when cut points are declared, a raw number.
Dataset LoadDataset(std::istream& source, const Schema& schema);
Dataset LoadDatasetFile(const std::string& path, const Schema& schema);

// Writes the columns in canonical order: id, features, label, year,
// metadata. Numbers use the shortest round-trip representation.
void WriteDataset(std::ostream& out, const Dataset& dataset);
std::string FormatNumber(double value);

// Keeps voluntary exits (labelled Terminated) and stayers (Active); drops
// involuntary exits and retirements. The exit reason column must be one of
// the schema metadata columns with values in {voluntary, involuntary,
// retirement, none}. Feature values are never modified.
Dataset CurateScope(const Dataset& dataset, std::string_view exit_reason_column);

// Splits into two partitions stratified by (label, year). Strata are
// visited in (label, year) order and the first partition receives
// round(fraction * cumulative size) rows cumulatively, so each stratum
// contributes floor or ceil of fraction * stratum size and the total is
// round(fraction * n).
std::pair<Dataset, Dataset> SplitStratified(const Dataset& dataset,
                                            double fraction,
                                            std::uint64_t seed);

}  // namespace turnover

#endif  // TURNOVER_DATASET_H_
