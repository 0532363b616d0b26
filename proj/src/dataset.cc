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

#include "turnover/dataset.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <tuple>

#include "turnover/error.h"
#include "turnover/random.h"

namespace turnover {
namespace {

void CheckLevels(const FeatureSpec& spec) {
  if (spec.levels.empty()) {
    throw ConfigError("feature \"" + spec.name + "\" declares no levels");
  }
  std::set<std::string> seen;
  for (const auto& level : spec.levels) {
    if (!seen.insert(level).second) {
      throw ConfigError("feature \"" + spec.name + "\" repeats level \"" +
                        level + "\"");
    }
  }
}

void ValidateSpec(const FeatureSpec& spec) {
  if (spec.name.empty()) throw ConfigError("feature with empty name");
  switch (spec.kind) {
    case FeatureKind::kNumeric:
      if (!spec.levels.empty() || !spec.cut_points.empty()) {
        throw ConfigError("numeric feature \"" + spec.name +
                          "\" cannot declare levels");
      }
      break;
    case FeatureKind::kCategorical:
      CheckLevels(spec);
      if (!spec.cut_points.empty()) {
        throw ConfigError("categorical feature \"" + spec.name +
                          "\" cannot declare cut points");
      }
      break;
    case FeatureKind::kOrdinalBand:
      CheckLevels(spec);
      if (!spec.cut_points.empty()) {
        if (spec.cut_points.size() + 1 != spec.levels.size()) {
          throw ConfigError("feature \"" + spec.name +
                            "\" needs one cut point fewer than bands");
        }
        if (!std::is_sorted(spec.cut_points.begin(), spec.cut_points.end(),
                            std::less_equal<>())) {
          throw ConfigError("feature \"" + spec.name +
                            "\" cut points must be strictly increasing");
        }
      }
      break;
  }
}

// Splits one CSV line. Supports double-quoted fields with "" escapes.
std::vector<std::string> SplitCsvLine(std::string_view line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else {
      current += c;
    }
  }
  fields.push_back(std::move(current));
  return fields;
}

std::string QuoteCsv(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::optional<double> ParseDouble(std::string_view text) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = text.data() + text.size();
  if (begin != end && *begin == '+') ++begin;
  const auto result = std::from_chars(begin, end, value);
  if (result.ec != std::errc() || result.ptr != end) return std::nullopt;
  return value;
}

std::optional<int> ParseInt(std::string_view text) {
  int value = 0;
  const auto result =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (result.ec != std::errc() || result.ptr != text.data() + text.size()) {
    return std::nullopt;
  }
  return value;
}

}  // namespace

std::string_view FeatureKindName(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::kCategorical:
      return "categorical";
    case FeatureKind::kNumeric:
      return "numeric";
    case FeatureKind::kOrdinalBand:
      return "ordinal_band";
  }
  return "categorical";
}

FeatureKind ParseFeatureKind(std::string_view name) {
  if (name == "categorical") return FeatureKind::kCategorical;
  if (name == "numeric") return FeatureKind::kNumeric;
  if (name == "ordinal_band") return FeatureKind::kOrdinalBand;
  throw ConfigError("unknown feature kind \"" + std::string(name) + "\"");
}

FeatureSpec FeatureSpec::Categorical(std::string name,
                                     std::vector<std::string> levels,
                                     bool actionable) {
  FeatureSpec spec;
  spec.name = std::move(name);
  spec.kind = FeatureKind::kCategorical;
  spec.levels = std::move(levels);
  spec.actionable = actionable;
  return spec;
}

FeatureSpec FeatureSpec::Numeric(std::string name, std::string unit,
                                 bool actionable) {
  FeatureSpec spec;
  spec.name = std::move(name);
  spec.kind = FeatureKind::kNumeric;
  spec.unit = std::move(unit);
  spec.actionable = actionable;
  return spec;
}

FeatureSpec FeatureSpec::OrdinalBand(std::string name,
                                     std::vector<std::string> bands,
                                     std::vector<double> cut_points,
                                     bool actionable) {
  FeatureSpec spec;
  spec.name = std::move(name);
  spec.kind = FeatureKind::kOrdinalBand;
  spec.levels = std::move(bands);
  spec.cut_points = std::move(cut_points);
  spec.actionable = actionable;
  return spec;
}

std::optional<std::size_t> FeatureSpec::LevelIndex(
    std::string_view level) const {
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i] == level) return i;
  }
  return std::nullopt;
}

std::size_t FeatureSpec::BandOf(double value) const {
  for (std::size_t i = 0; i < cut_points.size(); ++i) {
    if (value < cut_points[i]) return i;
  }
  return cut_points.size();
}

Schema::Schema(std::vector<FeatureSpec> features, std::string label_name,
               std::vector<std::string> metadata_columns)
    : features_(std::move(features)),
      label_name_(std::move(label_name)),
      metadata_columns_(std::move(metadata_columns)) {
  if (features_.empty()) throw ConfigError("schema has no features");
  if (label_name_.empty()) throw ConfigError("schema has empty label name");
  std::set<std::string> names = {std::string(kIdColumn),
                                 std::string(kYearColumn), label_name_};
  if (names.size() != 3) {
    throw ConfigError("label column cannot be named id or year");
  }
  for (const auto& spec : features_) {
    ValidateSpec(spec);
    if (!names.insert(spec.name).second) {
      throw ConfigError("column name \"" + spec.name +
                        "\" is used twice (or collides with id/label/year)");
    }
  }
  for (const auto& column : metadata_columns_) {
    if (!names.insert(column).second) {
      throw ConfigError("metadata column \"" + column +
                        "\" collides with another column");
    }
  }
}

std::optional<std::size_t> Schema::IndexOf(std::string_view name) const {
  for (std::size_t i = 0; i < features_.size(); ++i) {
    if (features_[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t Schema::RequireIndex(std::string_view name) const {
  const auto index = IndexOf(name);
  if (!index) {
    throw ConfigError("unknown feature \"" + std::string(name) + "\"");
  }
  return *index;
}

Schema Schema::WithoutMetadata() const {
  return Schema(features_, label_name_, {});
}

Schema Schema::WithFeature(std::size_t i, FeatureSpec spec) const {
  auto features = features_;
  features.at(i) = std::move(spec);
  return Schema(std::move(features), label_name_, metadata_columns_);
}

nlohmann::json SchemaToJson(const Schema& schema) {
  nlohmann::json features = nlohmann::json::array();
  for (const auto& spec : schema.features()) {
    nlohmann::json f;
    f["name"] = spec.name;
    f["kind"] = FeatureKindName(spec.kind);
    if (spec.kind == FeatureKind::kNumeric) {
      f["unit"] = spec.unit;
    } else {
      f["levels"] = spec.levels;
    }
    if (!spec.cut_points.empty()) f["cut_points"] = spec.cut_points;
    f["actionable"] = spec.actionable;
    features.push_back(std::move(f));
  }
  nlohmann::json out;
  out["label"] = schema.label_name();
  out["features"] = std::move(features);
  out["metadata_columns"] = schema.metadata_columns();
  return out;
}

Schema SchemaFromJson(const nlohmann::json& json) {
  try {
    std::vector<FeatureSpec> features;
    for (const auto& f : json.at("features")) {
      FeatureSpec spec;
      spec.name = f.at("name").get<std::string>();
      spec.kind = ParseFeatureKind(f.at("kind").get<std::string>());
      if (f.contains("levels")) {
        spec.levels = f.at("levels").get<std::vector<std::string>>();
      }
      if (f.contains("unit")) spec.unit = f.at("unit").get<std::string>();
      if (f.contains("cut_points")) {
        spec.cut_points = f.at("cut_points").get<std::vector<double>>();
      }
      spec.actionable = f.value("actionable", false);
      features.push_back(std::move(spec));
    }
    return Schema(std::move(features), json.value("label", "label"),
                  json.value("metadata_columns", std::vector<std::string>{}));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed schema document: ") + e.what());
  }
}

std::string_view LabelName(Label label) {
  switch (label) {
    case Label::kActive:
      return "Active";
    case Label::kTerminated:
      return "Terminated";
    case Label::kUnknown:
      return "Unknown";
  }
  return "Unknown";
}

std::optional<Label> ParseLabel(std::string_view text) {
  if (text == "Active") return Label::kActive;
  if (text == "Terminated") return Label::kTerminated;
  if (text == "Unknown") return Label::kUnknown;
  return std::nullopt;
}

Dataset::Dataset(Schema schema, std::vector<EmployeeRecord> rows)
    : schema_(std::move(schema)), rows_(std::move(rows)) {
  std::set<std::string_view> ids;
  const std::size_t p = schema_.num_features();
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    const auto& row = rows_[r];
    const std::size_t row_number = r + 1;
    if (row.id.empty()) {
      throw DataError("empty id", row_number, std::string(Schema::kIdColumn));
    }
    if (!ids.insert(row.id).second) {
      throw DataError("duplicate id \"" + row.id + "\"", row_number,
                      std::string(Schema::kIdColumn));
    }
    if (row.values.size() != p) {
      throw DataError("expected " + std::to_string(p) + " feature values, got " +
                          std::to_string(row.values.size()),
                      row_number);
    }
    if (row.metadata.size() != schema_.metadata_columns().size()) {
      throw DataError("metadata column count mismatch", row_number);
    }
    for (std::size_t f = 0; f < p; ++f) {
      const auto& spec = schema_.feature(f);
      const double v = row.values[f];
      if (!std::isfinite(v)) {
        throw DataError("non-finite value", row_number, spec.name);
      }
      if (spec.IsDiscrete()) {
        if (v < 0 || v != std::floor(v) ||
            v >= static_cast<double>(spec.levels.size())) {
          throw DataError("level index out of range", row_number, spec.name);
        }
      }
    }
  }
}

std::size_t Dataset::Count(Label label) const {
  return static_cast<std::size_t>(
      std::count_if(rows_.begin(), rows_.end(),
                    [label](const auto& r) { return r.label == label; }));
}

std::vector<Label> Dataset::Labels() const {
  std::vector<Label> labels;
  labels.reserve(rows_.size());
  for (const auto& r : rows_) labels.push_back(r.label);
  return labels;
}

std::string Dataset::TextValue(std::size_t row, std::size_t feature) const {
  const auto& spec = schema_.feature(feature);
  const double v = rows_[row].values[feature];
  if (spec.IsDiscrete()) return spec.levels[static_cast<std::size_t>(v)];
  return FormatNumber(v);
}

std::optional<std::size_t> Dataset::FindId(std::string_view id) const {
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (rows_[i].id == id) return i;
  }
  return std::nullopt;
}

Dataset Dataset::Subset(std::span<const std::size_t> indices) const {
  std::vector<EmployeeRecord> rows;
  rows.reserve(indices.size());
  for (std::size_t i : indices) rows.push_back(rows_.at(i));
  return Dataset(schema_, std::move(rows));
}

Dataset LoadDataset(std::istream& source, const Schema& schema) {
  std::string line;
  if (!std::getline(source, line)) {
    throw DataError("missing header row");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  // Strip a UTF-8 byte order mark.
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
  const auto header = SplitCsvLine(line);

  // Expected columns and the slot each one fills.
  enum class Slot { kId, kFeature, kLabel, kYear, kMetadata };
  std::map<std::string, std::pair<Slot, std::size_t>> expected;
  expected[std::string(Schema::kIdColumn)] = {Slot::kId, 0};
  expected[std::string(Schema::kYearColumn)] = {Slot::kYear, 0};
  expected[schema.label_name()] = {Slot::kLabel, 0};
  for (std::size_t f = 0; f < schema.num_features(); ++f) {
    expected[schema.feature(f).name] = {Slot::kFeature, f};
  }
  for (std::size_t m = 0; m < schema.metadata_columns().size(); ++m) {
    expected[schema.metadata_columns()[m]] = {Slot::kMetadata, m};
  }
  std::vector<std::pair<Slot, std::size_t>> layout;
  std::set<std::string> seen;
  for (const auto& name : header) {
    const auto it = expected.find(name);
    if (it == expected.end()) {
      throw DataError("header mismatch: unexpected column", 0, name);
    }
    if (!seen.insert(name).second) {
      throw DataError("header mismatch: duplicated column", 0, name);
    }
    layout.push_back(it->second);
  }
  for (const auto& [name, slot] : expected) {
    if (!seen.contains(name)) {
      throw DataError("header mismatch: missing column", 0, name);
    }
  }

  std::vector<EmployeeRecord> rows;
  std::set<std::string> ids;
  std::size_t row_number = 0;
  while (std::getline(source, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row_number;
    const auto fields = SplitCsvLine(line);
    if (fields.size() != header.size()) {
      throw DataError("expected " + std::to_string(header.size()) +
                          " fields, got " + std::to_string(fields.size()),
                      row_number);
    }
    EmployeeRecord record;
    record.values.assign(schema.num_features(), 0.0);
    record.metadata.assign(schema.metadata_columns().size(), {});
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const std::string& text = fields[c];
      const auto [slot, index] = layout[c];
      if (text.empty()) {
        throw DataError("missing value", row_number, header[c]);
      }
      switch (slot) {
        case Slot::kId:
          if (!ids.insert(text).second) {
            throw DataError("duplicate id \"" + text + "\"", row_number,
                            header[c]);
          }
          record.id = text;
          break;
        case Slot::kLabel: {
          const auto label = ParseLabel(text);
          if (!label) {
            throw DataError("unknown label \"" + text + "\"", row_number,
                            header[c]);
          }
          record.label = *label;
          break;
        }
        case Slot::kYear: {
          const auto year = ParseInt(text);
          if (!year) {
            throw DataError("year is not an integer: \"" + text + "\"",
                            row_number, header[c]);
          }
          record.year = *year;
          break;
        }
        case Slot::kMetadata:
          record.metadata[index] = text;
          break;
        case Slot::kFeature: {
          const auto& spec = schema.feature(index);
          if (spec.kind == FeatureKind::kNumeric) {
            const auto value = ParseDouble(text);
            if (!value || !std::isfinite(*value)) {
              throw DataError("non-numeric value \"" + text + "\"", row_number,
                              header[c]);
            }
            record.values[index] = *value;
          } else if (const auto level = spec.LevelIndex(text)) {
            record.values[index] = static_cast<double>(*level);
          } else if (const auto raw = ParseDouble(text);
                     raw && !spec.cut_points.empty() && std::isfinite(*raw)) {
            record.values[index] = static_cast<double>(spec.BandOf(*raw));
          } else {
            throw DataError("unknown level \"" + text + "\"", row_number,
                            header[c]);
          }
          break;
        }
      }
    }
    rows.push_back(std::move(record));
  }
  return Dataset(schema, std::move(rows));
}

Dataset LoadDatasetFile(const std::string& path, const Schema& schema) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset file " + path);
  return LoadDataset(in, schema);
}

std::string FormatNumber(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

void WriteDataset(std::ostream& out, const Dataset& dataset) {
  const Schema& schema = dataset.schema();
  out << Schema::kIdColumn;
  for (const auto& spec : schema.features()) out << ',' << QuoteCsv(spec.name);
  out << ',' << QuoteCsv(schema.label_name()) << ',' << Schema::kYearColumn;
  for (const auto& column : schema.metadata_columns()) {
    out << ',' << QuoteCsv(column);
  }
  out << '\n';
  for (std::size_t r = 0; r < dataset.size(); ++r) {
    const auto& row = dataset.row(r);
    out << QuoteCsv(row.id);
    for (std::size_t f = 0; f < schema.num_features(); ++f) {
      out << ',' << QuoteCsv(dataset.TextValue(r, f));
    }
    out << ',' << LabelName(row.label) << ',' << row.year;
    for (const auto& m : row.metadata) out << ',' << QuoteCsv(m);
    out << '\n';
  }
}

Dataset CurateScope(const Dataset& dataset,
                    std::string_view exit_reason_column) {
  const auto& columns = dataset.schema().metadata_columns();
  const auto it = std::find(columns.begin(), columns.end(), exit_reason_column);
  if (it == columns.end()) {
    throw DataError("exit reason column is not a metadata column", 0,
                    std::string(exit_reason_column));
  }
  const auto column = static_cast<std::size_t>(it - columns.begin());
  std::vector<EmployeeRecord> kept;
  for (std::size_t r = 0; r < dataset.size(); ++r) {
    const auto& row = dataset.row(r);
    const std::string& reason = row.metadata[column];
    if (reason == "involuntary" || reason == "retirement") continue;
    EmployeeRecord record = row;
    if (reason == "voluntary") {
      record.label = Label::kTerminated;
    } else if (reason == "none") {
      record.label = Label::kActive;
    } else {
      throw DataError("unrecognized exit reason \"" + reason + "\"", r + 1,
                      std::string(exit_reason_column));
    }
    kept.push_back(std::move(record));
  }
  return Dataset(dataset.schema(), std::move(kept));
}

std::pair<Dataset, Dataset> SplitStratified(const Dataset& dataset,
                                            double fraction,
                                            std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw ConfigError("split fraction must lie in (0, 1)");
  }
  std::map<std::pair<Label, int>, std::vector<std::size_t>> strata;
  std::set<Label> labels;
  std::set<int> years;
  for (std::size_t r = 0; r < dataset.size(); ++r) {
    const auto& row = dataset.row(r);
    strata[{row.label, row.year}].push_back(r);
    labels.insert(row.label);
    years.insert(row.year);
  }
  for (Label label : labels) {
    for (int year : years) {
      if (!strata.contains({label, year})) {
        throw DataError("empty stratum: label " +
                        std::string(LabelName(label)) + ", year " +
                        std::to_string(year));
      }
    }
  }
  Rng rng(seed);
  std::vector<std::size_t> first, second;
  std::size_t cumulative = 0;
  std::size_t assigned = 0;
  for (auto& [key, members] : strata) {
    rng.Shuffle(members);
    cumulative += members.size();
    const auto target = static_cast<std::size_t>(
        std::llround(fraction * static_cast<double>(cumulative)));
    const std::size_t take = target - assigned;
    assigned = target;
    first.insert(first.end(), members.begin(), members.begin() + take);
    second.insert(second.end(), members.begin() + take, members.end());
  }
  std::sort(first.begin(), first.end());
  std::sort(second.begin(), second.end());
  return {dataset.Subset(first), dataset.Subset(second)};
}

}  // namespace turnover
