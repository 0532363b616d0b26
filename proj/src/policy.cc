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

#include "turnover/policy.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

namespace turnover {
namespace {

constexpr int kReportSchemaVersion = 1;

std::string At(const std::string& prefix, std::size_t i) {
  return prefix + "[" + std::to_string(i) + "]";
}

std::string Percent(double share) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f%%", 100.0 * share);
  return buf;
}

double Share(std::size_t count, std::size_t total) {
  return total == 0 ? 0.0
                    : static_cast<double>(count) / static_cast<double>(total);
}

MatchClause ClauseFromJson(const nlohmann::json& j, const std::string& field,
                           std::vector<PolicyIssue>& issues) {
  MatchClause clause;
  if (!j.is_object()) {
    issues.push_back({field, "must be an object"});
    return clause;
  }
  if (!j.contains("feature") || !j["feature"].is_string()) {
    issues.push_back({field + ".feature", "must be a string"});
  } else {
    clause.feature = j["feature"].get<std::string>();
  }
  if (j.contains("levels")) {
    const auto& levels = j["levels"];
    if (!levels.is_array() || levels.empty()) {
      issues.push_back({field + ".levels", "must be a non-empty array"});
    } else {
      for (std::size_t i = 0; i < levels.size(); ++i) {
        if (!levels[i].is_string()) {
          issues.push_back({At(field + ".levels", i), "must be a string"});
        } else {
          clause.levels.push_back(levels[i].get<std::string>());
        }
      }
    }
  }
  for (const char* bound : {"min", "max"}) {
    if (!j.contains(bound)) continue;
    if (!j[bound].is_number()) {
      issues.push_back({field + "." + bound, "must be a number"});
    } else {
      (std::string(bound) == "min" ? clause.min : clause.max) =
          j[bound].get<double>();
    }
  }
  if (!j.contains("levels") && !j.contains("min") && !j.contains("max")) {
    issues.push_back({field, "needs levels or a numeric range"});
  }
  return clause;
}

nlohmann::json ClauseToJson(const MatchClause& clause) {
  nlohmann::json j = {{"feature", clause.feature}};
  if (!clause.levels.empty()) j["levels"] = clause.levels;
  if (clause.min) j["min"] = *clause.min;
  if (clause.max) j["max"] = *clause.max;
  return j;
}

void ValidateClause(const MatchClause& clause, const Schema& schema,
                    const std::string& field,
                    std::vector<PolicyIssue>& issues) {
  const auto index = schema.IndexOf(clause.feature);
  if (!index) {
    issues.push_back({field + ".feature",
                      "unknown feature \"" + clause.feature + "\""});
    return;
  }
  const FeatureSpec& spec = schema.feature(*index);
  if (spec.IsDiscrete()) {
    if (clause.levels.empty()) {
      issues.push_back(
          {field + ".levels", "discrete feature \"" + spec.name +
                                  "\" must be matched by levels"});
    }
    for (std::size_t i = 0; i < clause.levels.size(); ++i) {
      if (!spec.LevelIndex(clause.levels[i])) {
        issues.push_back({At(field + ".levels", i),
                          "\"" + clause.levels[i] + "\" is not a level of \"" +
                              spec.name + "\""});
      }
    }
    if (clause.min || clause.max) {
      issues.push_back({field, "numeric range on discrete feature \"" +
                                   spec.name + "\""});
    }
  } else {
    if (!clause.levels.empty()) {
      issues.push_back({field + ".levels", "numeric feature \"" + spec.name +
                                               "\" must be matched by range"});
    }
    if (clause.min && clause.max && !(*clause.min < *clause.max)) {
      issues.push_back({field, "min must be below max"});
    }
  }
}

bool ClauseHolds(const MatchClause& clause, const Schema& schema,
                 const EmployeeRecord& row) {
  const std::size_t f = schema.RequireIndex(clause.feature);
  const FeatureSpec& spec = schema.feature(f);
  const double v = row.values[f];
  if (spec.IsDiscrete()) {
    const std::string& level = spec.levels[static_cast<std::size_t>(v)];
    return std::find(clause.levels.begin(), clause.levels.end(), level) !=
           clause.levels.end();
  }
  return (!clause.min || v >= *clause.min) && (!clause.max || v < *clause.max);
}

double AssignedValue(const Assignment& a, const FeatureSpec& spec) {
  if (!spec.IsDiscrete()) return *a.value;
  return static_cast<double>(*spec.LevelIndex(a.level));
}

// Probability of Terminated for every row, with hard-hold rows at zero.
std::vector<double> ScoreUnderPolicy(const TrainedModel& model,
                                     const Dataset& dataset,
                                     const Policy& policy,
                                     std::size_t* rows_touched) {
  const PolicyApplication applied = ApplyPolicy(dataset, policy);
  if (rows_touched) *rows_touched = applied.rows_touched;
  std::vector<double> scores = PredictProba(model, applied.dataset);
  if (!policy.hard_hold.empty()) {
    std::size_t held = 0;
    for (std::size_t r = 0; r < dataset.size(); ++r) {
      if (Matches(policy.hard_hold, dataset.schema(), dataset.row(r))) {
        scores[r] = 0.0;
        ++held;
      }
    }
    if (rows_touched) *rows_touched = std::max(*rows_touched, held);
  }
  return scores;
}

std::size_t CountFlagged(const std::vector<double>& scores, double threshold) {
  return static_cast<std::size_t>(std::count_if(
      scores.begin(), scores.end(), [&](double p) { return p >= threshold; }));
}

}  // namespace

InvalidPolicy::InvalidPolicy(std::vector<PolicyIssue> issues)
    : ConfigError(issues.empty()
                      ? std::string("invalid policy")
                      : "invalid policy: " + issues.front().field + ": " +
                            issues.front().message),
      issues_(std::move(issues)) {}

Policy PolicyFromJson(const nlohmann::json& j) {
  std::vector<PolicyIssue> issues;
  Policy policy;
  if (!j.is_object()) throw InvalidPolicy(std::vector<PolicyIssue>{{"", "policy must be an object"}});
  if (!j.contains("name") || !j["name"].is_string() ||
      j["name"].get<std::string>().empty()) {
    issues.push_back({"name", "must be a non-empty string"});
  } else {
    policy.name = j["name"].get<std::string>();
  }
  if (j.contains("description")) {
    if (!j["description"].is_string()) {
      issues.push_back({"description", "must be a string"});
    } else {
      policy.description = j["description"].get<std::string>();
    }
  }
  if (j.contains("rewrites")) {
    const auto& rewrites = j["rewrites"];
    if (!rewrites.is_array()) {
      issues.push_back({"rewrites", "must be an array"});
    } else {
      for (std::size_t r = 0; r < rewrites.size(); ++r) {
        const std::string field = At("rewrites", r);
        const auto& rj = rewrites[r];
        FeatureRewrite rewrite;
        if (!rj.is_object()) {
          issues.push_back({field, "must be an object"});
          continue;
        }
        if (rj.contains("match")) {
          if (!rj["match"].is_array()) {
            issues.push_back({field + ".match", "must be an array"});
          } else {
            for (std::size_t c = 0; c < rj["match"].size(); ++c) {
              rewrite.match.push_back(ClauseFromJson(
                  rj["match"][c], At(field + ".match", c), issues));
            }
          }
        }
        if (!rj.contains("assign") || !rj["assign"].is_array() ||
            rj["assign"].empty()) {
          issues.push_back({field + ".assign", "must be a non-empty array"});
        } else {
          for (std::size_t a = 0; a < rj["assign"].size(); ++a) {
            const std::string afield = At(field + ".assign", a);
            const auto& aj = rj["assign"][a];
            Assignment assignment;
            if (!aj.is_object()) {
              issues.push_back({afield, "must be an object"});
              continue;
            }
            if (!aj.contains("feature") || !aj["feature"].is_string()) {
              issues.push_back({afield + ".feature", "must be a string"});
            } else {
              assignment.feature = aj["feature"].get<std::string>();
            }
            if (!aj.contains("value")) {
              issues.push_back({afield + ".value", "is required"});
            } else if (aj["value"].is_string()) {
              assignment.level = aj["value"].get<std::string>();
            } else if (aj["value"].is_number()) {
              assignment.value = aj["value"].get<double>();
            } else {
              issues.push_back(
                  {afield + ".value", "must be a level name or a number"});
            }
            rewrite.assign.push_back(std::move(assignment));
          }
        }
        policy.rewrites.push_back(std::move(rewrite));
      }
    }
  }
  if (j.contains("hard_hold")) {
    if (!j["hard_hold"].is_array()) {
      issues.push_back({"hard_hold", "must be an array"});
    } else {
      for (std::size_t c = 0; c < j["hard_hold"].size(); ++c) {
        policy.hard_hold.push_back(
            ClauseFromJson(j["hard_hold"][c], At("hard_hold", c), issues));
      }
    }
  }
  if (!issues.empty()) throw InvalidPolicy(std::move(issues));
  return policy;
}

nlohmann::json PolicyToJson(const Policy& policy) {
  nlohmann::json rewrites = nlohmann::json::array();
  for (const auto& rewrite : policy.rewrites) {
    nlohmann::json match = nlohmann::json::array();
    for (const auto& clause : rewrite.match) match.push_back(ClauseToJson(clause));
    nlohmann::json assign = nlohmann::json::array();
    for (const auto& a : rewrite.assign) {
      assign.push_back({{"feature", a.feature},
                        {"value", a.value ? nlohmann::json(*a.value)
                                          : nlohmann::json(a.level)}});
    }
    rewrites.push_back({{"match", std::move(match)},
                        {"assign", std::move(assign)}});
  }
  nlohmann::json j = {{"name", policy.name},
                      {"description", policy.description},
                      {"rewrites", std::move(rewrites)}};
  if (!policy.hard_hold.empty()) {
    nlohmann::json hold = nlohmann::json::array();
    for (const auto& clause : policy.hard_hold) hold.push_back(ClauseToJson(clause));
    j["hard_hold"] = std::move(hold);
  }
  return j;
}

nlohmann::json PolicyIssuesToJson(const std::vector<PolicyIssue>& issues) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& issue : issues) {
    out.push_back({{"field", issue.field}, {"message", issue.message}});
  }
  return out;
}

std::vector<PolicyIssue> ValidatePolicy(const Policy& policy,
                                        const Schema& schema) {
  std::vector<PolicyIssue> issues;
  if (policy.name.empty()) issues.push_back({"name", "must be non-empty"});
  for (std::size_t r = 0; r < policy.rewrites.size(); ++r) {
    const std::string field = At("rewrites", r);
    const FeatureRewrite& rewrite = policy.rewrites[r];
    for (std::size_t c = 0; c < rewrite.match.size(); ++c) {
      ValidateClause(rewrite.match[c], schema, At(field + ".match", c), issues);
    }
    if (rewrite.assign.empty()) {
      issues.push_back({field + ".assign", "must assign at least one feature"});
    }
    for (std::size_t a = 0; a < rewrite.assign.size(); ++a) {
      const std::string afield = At(field + ".assign", a);
      const Assignment& assignment = rewrite.assign[a];
      const auto index = schema.IndexOf(assignment.feature);
      if (!index) {
        issues.push_back({afield + ".feature",
                          "unknown feature \"" + assignment.feature + "\""});
        continue;
      }
      const FeatureSpec& spec = schema.feature(*index);
      if (!spec.actionable) {
        issues.push_back({afield + ".feature",
                          "feature \"" + spec.name + "\" is not actionable"});
      }
      if (spec.IsDiscrete()) {
        if (assignment.value || !spec.LevelIndex(assignment.level)) {
          issues.push_back({afield + ".value",
                            "not a level of \"" + spec.name + "\""});
        }
      } else if (!assignment.value || !std::isfinite(*assignment.value)) {
        issues.push_back({afield + ".value",
                          "numeric feature \"" + spec.name +
                              "\" needs a finite number"});
      }
    }
  }
  for (std::size_t c = 0; c < policy.hard_hold.size(); ++c) {
    ValidateClause(policy.hard_hold[c], schema, At("hard_hold", c), issues);
  }
  return issues;
}

std::vector<PolicyIssue> ValidateMenu(const std::vector<Policy>& menu,
                                      const Schema& schema) {
  std::vector<PolicyIssue> issues;
  std::set<std::string> names;
  for (std::size_t i = 0; i < menu.size(); ++i) {
    const std::string prefix = At("menu", i) + ".";
    for (auto& issue : ValidatePolicy(menu[i], schema)) {
      issues.push_back({prefix + issue.field, issue.message});
    }
    if (!names.insert(menu[i].name).second) {
      issues.push_back({prefix + "name",
                        "duplicate policy name \"" + menu[i].name + "\""});
    }
  }
  return issues;
}

void RequireValidMenu(const std::vector<Policy>& menu, const Schema& schema) {
  auto issues = ValidateMenu(menu, schema);
  if (!issues.empty()) throw InvalidPolicy(std::move(issues));
}

std::vector<Policy> BuiltinPrograms(const Schema& schema,
                                    std::vector<std::string>* warnings) {
  std::vector<Policy> menu;
  auto warn = [&](const std::string& message) {
    if (warnings) warnings->push_back(message);
  };
  auto levels_of = [&](const std::string& feature)
      -> const std::vector<std::string>* {
    const auto index = schema.IndexOf(feature);
    if (!index || !schema.feature(*index).IsDiscrete()) return nullptr;
    return &schema.feature(*index).levels;
  };
  auto has = [](const std::vector<std::string>* levels,
                std::initializer_list<const char*> names) {
    if (levels == nullptr) return false;
    for (const char* name : names) {
      if (std::find(levels->begin(), levels->end(), name) == levels->end()) {
        return false;
      }
    }
    return true;
  };

  const auto* location = levels_of("location");
  for (const auto& [name, from, text] :
       {std::tuple{"P1", "Remote", "Remote jobs reassigned to Location1"},
        std::tuple{"P2", "Location3", "Location3 jobs reassigned to Location1"}}) {
    if (!has(location, {from, "Location1"})) {
      warn(std::string(name) + " omitted: schema lacks location levels " +
           from + "/Location1");
      continue;
    }
    menu.push_back({name,
                    text,
                    {{{{"location", {from}, {}, {}}},
                      {{"location", "Location1", {}}}}},
                    {}});
  }

  // Band programs work on band positions so relabelled bands still apply.
  const auto* manager_tenure = levels_of("manager_tenure_band");
  if (manager_tenure && manager_tenure->size() >= 2) {
    menu.push_back({"P3",
                    "Managers get internal experience first: manager tenure " +
                        (*manager_tenure)[0] + " becomes " +
                        (*manager_tenure)[1],
                    {{{{"manager_tenure_band", {(*manager_tenure)[0]}, {}, {}}},
                      {{"manager_tenure_band", (*manager_tenure)[1], {}}}}},
                    {}});
  } else {
    warn("P3 omitted: schema lacks manager_tenure_band");
  }

  const auto* manager_tip = levels_of("manager_time_in_position_band");
  if (manager_tip && manager_tip->size() >= 2) {
    std::vector<std::string> later(manager_tip->begin() + 1,
                                   manager_tip->end());
    menu.push_back({"P4",
                    "Managers rotate teams: manager time in position kept at " +
                        (*manager_tip)[0],
                    {{{{"manager_time_in_position_band", later, {}, {}}},
                      {{"manager_time_in_position_band", (*manager_tip)[0],
                        {}}}}},
                    {}});
  } else {
    warn("P4 omitted: schema lacks manager_time_in_position_band");
  }

  const auto* tip = levels_of("time_in_position_band");
  if (tip && tip->size() >= 2) {
    menu.push_back({"P5",
                    "Employees bound for their first years: time in position " +
                        (*tip)[0] + " advanced to " + (*tip)[1],
                    {{{{"time_in_position_band", {(*tip)[0]}, {}, {}}},
                      {{"time_in_position_band", (*tip)[1], {}}}}},
                    {}});
  } else {
    warn("P5 omitted: schema lacks time_in_position_band");
  }
  return menu;
}

std::optional<Policy> HardHoldProgram(const Schema& schema) {
  const auto index = schema.IndexOf("time_in_position_band");
  if (!index || !schema.feature(*index).IsDiscrete()) return std::nullopt;
  const auto& first = schema.feature(*index).levels.front();
  return Policy{"P5-hold",
                "Employees in time in position " + first +
                    " counted as retained",
                {},
                {{"time_in_position_band", {first}, {}, {}}}};
}

bool Matches(const std::vector<MatchClause>& clauses, const Schema& schema,
             const EmployeeRecord& row) {
  for (const auto& clause : clauses) {
    if (!ClauseHolds(clause, schema, row)) return false;
  }
  return true;
}

PolicyApplication ApplyPolicy(const Dataset& dataset, const Policy& policy) {
  const Schema& schema = dataset.schema();
  auto issues = ValidatePolicy(policy, schema);
  if (!issues.empty()) throw InvalidPolicy(std::move(issues));

  std::vector<EmployeeRecord> rows = dataset.rows();
  std::size_t touched = 0;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    EmployeeRecord& row = rows[r];
    for (const auto& rewrite : policy.rewrites) {
      if (!Matches(rewrite.match, schema, row)) continue;
      for (const auto& a : rewrite.assign) {
        const std::size_t f = schema.RequireIndex(a.feature);
        row.values[f] = AssignedValue(a, schema.feature(f));
      }
    }
    if (row.values != dataset.row(r).values) ++touched;
  }
  return {Dataset(schema, std::move(rows)), touched};
}

PolicyImpactReport SimulateMass(const TrainedModel& model,
                                const Dataset& prediction_set,
                                const Policy& policy) {
  const double threshold = model.threshold.value();
  const std::vector<double> baseline = PredictProba(model, prediction_set);
  PolicyImpactReport report;
  report.policy = policy.name;
  report.description = policy.description;
  report.population = prediction_set.size();
  report.threshold = threshold;
  const std::vector<double> post =
      ScoreUnderPolicy(model, prediction_set, policy, &report.rows_touched);
  report.baseline_leaver_share =
      Share(CountFlagged(baseline, threshold), baseline.size());
  report.post_leaver_share = Share(CountFlagged(post, threshold), post.size());
  return report;
}

TargetedReport SimulateTargeted(const TrainedModel& model,
                                const Dataset& prediction_set,
                                const std::vector<Policy>& menu) {
  RequireValidMenu(menu, prediction_set.schema());
  const double threshold = model.threshold.value();
  const std::size_t n = prediction_set.size();
  const std::vector<double> baseline = PredictProba(model, prediction_set);

  // A rewrite acts on each row independently, so scoring the rewritten
  // population equals rewriting and scoring each flagged row alone.
  std::vector<std::vector<double>> post(menu.size());
  for (std::size_t p = 0; p < menu.size(); ++p) {
    post[p] = ScoreUnderPolicy(model, prediction_set, menu[p], nullptr);
  }

  TargetedReport report;
  report.population = n;
  report.threshold = threshold;
  std::vector<std::size_t> counts(menu.size() + 1, 0);
  for (std::size_t r = 0; r < n; ++r) {
    if (baseline[r] < threshold) continue;
    ++report.flagged;
    TargetedAssignment assignment{prediction_set.row(r).id, baseline[r],
                                  std::nullopt, baseline[r]};
    std::size_t chosen = menu.size();
    for (std::size_t p = 0; p < menu.size(); ++p) {
      const double q = post[p][r];
      if (q >= threshold) continue;
      if (chosen == menu.size() || q < assignment.post_probability) {
        chosen = p;
        assignment.post_probability = q;
      }
    }
    if (chosen < menu.size()) assignment.program = menu[chosen].name;
    ++counts[chosen];
    report.assignments.push_back(std::move(assignment));
  }
  for (std::size_t p = 0; p <= menu.size(); ++p) {
    report.programs.push_back({p < menu.size() ? menu[p].name : std::string(),
                               counts[p], Share(counts[p], n),
                               Share(counts[p], report.flagged)});
  }
  report.baseline_leaver_share = Share(report.flagged, n);
  report.unflagged_share = Share(n - report.flagged, n);
  report.residual_leaver_share = Share(counts[menu.size()], n);
  return report;
}

EmployeeRisk CounterfactualRisk(const TrainedModel& model,
                                const Dataset& prediction_set, std::size_t row,
                                const std::vector<Policy>& menu) {
  RequireValidMenu(menu, prediction_set.schema());
  const std::size_t index[] = {row};
  const Dataset single = prediction_set.Subset(index);
  const double threshold = model.threshold.value();
  EmployeeRisk risk;
  risk.id = single.row(0).id;
  risk.baseline_probability = PredictProba(model, single)[0];
  risk.flagged = risk.baseline_probability >= threshold;
  double best = 0.0;
  for (const auto& policy : menu) {
    const double q = ScoreUnderPolicy(model, single, policy, nullptr)[0];
    const bool flips = risk.flagged && q < threshold;
    risk.programs.push_back({policy.name, q, flips});
    if (flips && (!risk.assigned || q < best)) {
      risk.assigned = policy.name;
      best = q;
    }
  }
  return risk;
}

nlohmann::json PolicyImpactReportToJson(const PolicyImpactReport& report) {
  return {{"policy", report.policy},
          {"description", report.description},
          {"population", report.population},
          {"baseline_leaver_share", report.baseline_leaver_share},
          {"post_leaver_share", report.post_leaver_share},
          {"rows_touched", report.rows_touched},
          {"threshold", report.threshold}};
}

nlohmann::json PolicyImpactToJson(const std::vector<PolicyImpactReport>& rows) {
  nlohmann::json out = {{"schema_version", kReportSchemaVersion}};
  nlohmann::json list = nlohmann::json::array();
  for (const auto& row : rows) list.push_back(PolicyImpactReportToJson(row));
  if (!rows.empty()) {
    out["baseline_leaver_share"] = rows.front().baseline_leaver_share;
    out["threshold"] = rows.front().threshold;
    out["population"] = rows.front().population;
  }
  out["policies"] = std::move(list);
  return out;
}

std::string PolicyImpactTable(const std::vector<PolicyImpactReport>& rows) {
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-8s %-60s %10s %8s\n", "Program",
                "Description", "Leavers", "Touched");
  out << buf;
  if (!rows.empty()) {
    std::snprintf(buf, sizeof(buf), "%-8s %-60s %10s %8s\n", "None",
                  "No Retention Policy",
                  Percent(rows.front().baseline_leaver_share).c_str(), "-");
    out << buf;
  }
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof(buf), "%-8s %-60s %10s %8zu\n",
                  row.policy.c_str(), row.description.c_str(),
                  Percent(row.post_leaver_share).c_str(), row.rows_touched);
    out << buf;
  }
  return out.str();
}

nlohmann::json TargetedReportToJson(const TargetedReport& report) {
  nlohmann::json programs = nlohmann::json::array();
  for (const auto& p : report.programs) {
    programs.push_back(
        {{"program", p.program.empty() ? nlohmann::json(nullptr)
                                       : nlohmann::json(p.program)},
         {"count", p.count},
         {"population_share", p.population_share},
         {"leaver_share", p.leaver_share}});
  }
  nlohmann::json assignments = nlohmann::json::array();
  for (const auto& a : report.assignments) {
    assignments.push_back(
        {{"id", a.id},
         {"baseline_probability", a.baseline_probability},
         {"program", a.program ? nlohmann::json(*a.program)
                               : nlohmann::json(nullptr)},
         {"post_probability", a.post_probability}});
  }
  return {{"schema_version", kReportSchemaVersion},
          {"population", report.population},
          {"flagged", report.flagged},
          {"threshold", report.threshold},
          {"baseline_leaver_share", report.baseline_leaver_share},
          {"unflagged_share", report.unflagged_share},
          {"programs", std::move(programs)},
          {"residual_leaver_share", report.residual_leaver_share},
          {"assignments", std::move(assignments)}};
}

std::string TargetedReportTable(const TargetedReport& report) {
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-10s %14s %14s\n", "Program",
                "% Population", "% Leavers");
  out << buf;
  // None first, as in the usual summary layout.
  const ProgramShare& none = report.programs.back();
  std::snprintf(buf, sizeof(buf), "%-10s %14s %14s\n", "None",
                Percent(none.population_share).c_str(),
                Percent(none.leaver_share).c_str());
  out << buf;
  for (std::size_t i = 0; i + 1 < report.programs.size(); ++i) {
    const ProgramShare& p = report.programs[i];
    std::snprintf(buf, sizeof(buf), "%-10s %14s %14s\n", p.program.c_str(),
                  Percent(p.population_share).c_str(),
                  Percent(p.leaver_share).c_str());
    out << buf;
  }
  std::snprintf(buf, sizeof(buf),
                "flagged %zu of %zu (%s); residual leavers %s\n",
                report.flagged, report.population,
                Percent(report.baseline_leaver_share).c_str(),
                Percent(report.residual_leaver_share).c_str());
  out << buf;
  return out.str();
}

nlohmann::json EmployeeRiskToJson(const EmployeeRisk& risk) {
  nlohmann::json programs = nlohmann::json::array();
  for (const auto& p : risk.programs) {
    programs.push_back({{"program", p.program},
                        {"probability", p.probability},
                        {"flips", p.flips}});
  }
  return {{"id", risk.id},
          {"baseline_probability", risk.baseline_probability},
          {"flagged", risk.flagged},
          {"programs", std::move(programs)},
          {"assigned", risk.assigned ? nlohmann::json(*risk.assigned)
                                     : nlohmann::json(nullptr)}};
}

}  // namespace turnover
