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

#ifndef TURNOVER_POLICY_H_
#define TURNOVER_POLICY_H_

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "turnover/dataset.h"
#include "turnover/error.h"
#include "turnover/model.h"

namespace turnover {

// Discrete features match on `levels`; numeric features on min <= v < max.
struct MatchClause {
  std::string feature;
  std::vector<std::string> levels;
  std::optional<double> min;
  std::optional<double> max;
  bool operator==(const MatchClause&) const = default;
};

struct Assignment {
  std::string feature;
  // Level or band label for discrete features.
  std::string level;
  // Raw value for numeric features.
  std::optional<double> value;
  bool operator==(const Assignment&) const = default;
};

// All clauses must hold (an empty match selects every row).
struct FeatureRewrite {
  std::vector<MatchClause> match;
  std::vector<Assignment> assign;
  bool operator==(const FeatureRewrite&) const = default;
};

struct Policy {
  std::string name;
  std::string description;
  std::vector<FeatureRewrite> rewrites;
  // When non-empty, rows satisfying every clause are counted as stayers
  // instead of being re-scored.
  std::vector<MatchClause> hard_hold;
  bool operator==(const Policy&) const = default;
};

struct PolicyIssue {
  // Path into the policy document, such as "rewrites[0].assign[1].feature".
  std::string field;
  std::string message;
};

class InvalidPolicy : public ConfigError {
 public:
  explicit InvalidPolicy(std::vector<PolicyIssue> issues);
  const std::vector<PolicyIssue>& issues() const { return issues_; }

 private:
  std::vector<PolicyIssue> issues_;
};

// Throws InvalidPolicy on structural problems.
Policy PolicyFromJson(const nlohmann::json& json);
nlohmann::json PolicyToJson(const Policy& policy);
nlohmann::json PolicyIssuesToJson(const std::vector<PolicyIssue>& issues);

std::vector<PolicyIssue> ValidatePolicy(const Policy& policy,
                                        const Schema& schema);
// Also rejects duplicate names.
std::vector<PolicyIssue> ValidateMenu(const std::vector<Policy>& menu,
                                      const Schema& schema);
void RequireValidMenu(const std::vector<Policy>& menu, const Schema& schema);

// P1..P5. Programs whose features or levels the schema lacks are omitted and
// reported through `warnings`.
std::vector<Policy> BuiltinPrograms(const Schema& schema,
                                    std::vector<std::string>* warnings = nullptr);
// P5 read as forcibly retaining flagged employees in the first
// time-in-position band.
std::optional<Policy> HardHoldProgram(const Schema& schema);

struct PolicyApplication {
  Dataset dataset;
  // Rows in which at least one value changed.
  std::size_t rows_touched = 0;
};

PolicyApplication ApplyPolicy(const Dataset& dataset, const Policy& policy);
bool Matches(const std::vector<MatchClause>& clauses, const Schema& schema,
             const EmployeeRecord& row);

struct PolicyImpactReport {
  std::string policy;
  std::string description;
  std::size_t population = 0;
  double baseline_leaver_share = 0.0;
  double post_leaver_share = 0.0;
  std::size_t rows_touched = 0;
  double threshold = 0.5;
};

PolicyImpactReport SimulateMass(const TrainedModel& model,
                                const Dataset& prediction_set,
                                const Policy& policy);

struct ProgramShare {
  // Empty for the None row.
  std::string program;
  std::size_t count = 0;
  double population_share = 0.0;
  double leaver_share = 0.0;
};

struct TargetedAssignment {
  std::string id;
  double baseline_probability = 0.0;
  std::optional<std::string> program;
  // Equals the baseline when no program is assigned.
  double post_probability = 0.0;
};

struct TargetedReport {
  std::size_t population = 0;
  std::size_t flagged = 0;
  double threshold = 0.5;
  double baseline_leaver_share = 0.0;
  double unflagged_share = 0.0;
  // Menu order, then the None row.
  std::vector<ProgramShare> programs;
  double residual_leaver_share = 0.0;
  // Flagged employees in prediction-set order.
  std::vector<TargetedAssignment> assignments;
};

TargetedReport SimulateTargeted(const TrainedModel& model,
                                const Dataset& prediction_set,
                                const std::vector<Policy>& menu);

struct ProgramRisk {
  std::string program;
  double probability = 0.0;
  bool flips = false;
};

struct EmployeeRisk {
  std::string id;
  double baseline_probability = 0.0;
  bool flagged = false;
  std::vector<ProgramRisk> programs;
  std::optional<std::string> assigned;
};

EmployeeRisk CounterfactualRisk(const TrainedModel& model,
                                const Dataset& prediction_set, std::size_t row,
                                const std::vector<Policy>& menu);

nlohmann::json PolicyImpactReportToJson(const PolicyImpactReport& report);
// Mass-simulation rows sharing one baseline.
nlohmann::json PolicyImpactToJson(const std::vector<PolicyImpactReport>& rows);
std::string PolicyImpactTable(const std::vector<PolicyImpactReport>& rows);
nlohmann::json TargetedReportToJson(const TargetedReport& report);
std::string TargetedReportTable(const TargetedReport& report);
nlohmann::json EmployeeRiskToJson(const EmployeeRisk& risk);

}  // namespace turnover

#endif  // TURNOVER_POLICY_H_
