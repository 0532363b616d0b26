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
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "json.hpp"
#include "test_util.h"
#include "turnover/balance.h"
#include "turnover/dataset.h"
#include "turnover/error.h"
#include "turnover/model.h"
#include "turnover/random.h"
#include "turnover/synthgen.h"

namespace turnover {
namespace {

using ::turnover::testing::MakeRow;

// location, tenure_band, manager_tenure_band, time_in_position_band.
Schema SmallSchema() {
  return Schema({FeatureSpec::Categorical(
                     "location",
                     {"Location1", "Location2", "Location3", "Remote"}, true),
                 FeatureSpec::OrdinalBand("tenure_band", {"0-2", "3-7", "8+"}),
                 FeatureSpec::OrdinalBand("manager_tenure_band",
                                          {"0-2", "3-7", "8+"}, {}, true),
                 FeatureSpec::OrdinalBand("time_in_position_band",
                                          {"0-2", "2-4", "4+"}, {}, true)});
}

Policy Named(const std::vector<Policy>& menu, const std::string& name) {
  for (const auto& p : menu) {
    if (p.name == name) return p;
  }
  ADD_FAILURE() << "missing " << name;
  return {};
}

TEST(ApplyPolicyTest, RemoteMovesToLocation1) {
  const Dataset data(SmallSchema(),
                     {MakeRow("a", {3, 0, 0, 0}, Label::kUnknown),
                      MakeRow("b", {1, 0, 0, 0}, Label::kUnknown)});
  const auto applied =
      ApplyPolicy(data, Named(BuiltinPrograms(data.schema()), "P1"));
  EXPECT_EQ(applied.dataset.row(0).values[0], 0.0);
  EXPECT_EQ(applied.dataset.row(1).values[0], 1.0);
  EXPECT_EQ(applied.rows_touched, 1u);
}

TEST(ApplyPolicyTest, ManagerProgramLeavesLaterBandAlone) {
  const Dataset data(SmallSchema(), {MakeRow("a", {0, 0, 1, 0}, Label::kUnknown)});
  const auto applied =
      ApplyPolicy(data, Named(BuiltinPrograms(data.schema()), "P3"));
  EXPECT_EQ(applied.dataset, data);
  EXPECT_EQ(applied.rows_touched, 0u);
}

TEST(ApplyPolicyTest, IdentityPolicyKeepsDataset) {
  const Dataset data(SmallSchema(),
                     {MakeRow("a", {3, 2, 0, 1}, Label::kActive),
                      MakeRow("b", {2, 1, 2, 0}, Label::kTerminated)});
  const auto applied = ApplyPolicy(data, Policy{"identity", "", {}, {}});
  EXPECT_EQ(applied.dataset, data);
  EXPECT_EQ(applied.rows_touched, 0u);
}

TEST(ApplyPolicyTest, NoMatchingRowsTouchesNothing) {
  const Dataset data(SmallSchema(),
                     {MakeRow("a", {0, 0, 0, 0}, Label::kUnknown),
                      MakeRow("b", {3, 0, 0, 0}, Label::kUnknown)});
  const auto applied =
      ApplyPolicy(data, Named(BuiltinPrograms(data.schema()), "P2"));
  EXPECT_EQ(applied.rows_touched, 0u);
  EXPECT_EQ(applied.dataset, data);
}

TEST(ApplyPolicyTest, RewritesApplyInOrder) {
  const Policy chained{
      "chain",
      "",
      {{{{"location", {"Remote"}, {}, {}}}, {{"location", "Location2", {}}}},
       {{{"location", {"Location2"}, {}, {}}}, {{"location", "Location1", {}}}}},
      {}};
  const Dataset data(SmallSchema(), {MakeRow("a", {3, 0, 0, 0}, Label::kUnknown)});
  EXPECT_EQ(ApplyPolicy(data, chained).dataset.row(0).values[0], 0.0);
}

TEST(ApplyPolicyTest, InvalidPolicyThrows) {
  const Dataset data(SmallSchema(), {MakeRow("a", {3, 0, 0, 0}, Label::kUnknown)});
  const Policy bad{"bad", "", {{{}, {{"tenure_band", "8+", {}}}}}, {}};
  EXPECT_THROW(ApplyPolicy(data, bad), InvalidPolicy);
}

TEST(ValidatePolicyTest, NonActionableFeatureNamed) {
  const Policy bad{"bad", "", {{{}, {{"tenure_band", "8+", {}}}}}, {}};
  const auto issues = ValidatePolicy(bad, SmallSchema());
  ASSERT_EQ(issues.size(), 1u);
  EXPECT_EQ(issues[0].field, "rewrites[0].assign[0].feature");
  EXPECT_NE(issues[0].message.find("tenure_band"), std::string::npos);
  EXPECT_NE(issues[0].message.find("not actionable"), std::string::npos);
}

TEST(ValidatePolicyTest, UnknownLevelAndFeature) {
  const Policy bad{"bad",
                   "",
                   {{{{"location", {"Mars"}, {}, {}}},
                     {{"location", "Moon", {}}, {"salary", "high", {}}}}},
                   {}};
  const auto issues = ValidatePolicy(bad, SmallSchema());
  std::vector<std::string> fields;
  for (const auto& issue : issues) fields.push_back(issue.field);
  EXPECT_NE(std::find(fields.begin(), fields.end(), "rewrites[0].match[0].levels[0]"),
            fields.end());
  EXPECT_NE(std::find(fields.begin(), fields.end(), "rewrites[0].assign[0].value"),
            fields.end());
  EXPECT_NE(std::find(fields.begin(), fields.end(), "rewrites[0].assign[1].feature"),
            fields.end());
}

TEST(ValidatePolicyTest, DuplicateMenuNames) {
  const Policy p{"same", "", {}, {}};
  const auto issues = ValidateMenu({p, p}, SmallSchema());
  ASSERT_EQ(issues.size(), 1u);
  EXPECT_EQ(issues[0].field, "menu[1].name");
  EXPECT_THROW(RequireValidMenu({p, p}, SmallSchema()), InvalidPolicy);
}

TEST(PolicyJsonTest, RoundTrip) {
  for (const auto& p : BuiltinPrograms(DefaultEmployeeSchema())) {
    EXPECT_EQ(PolicyFromJson(PolicyToJson(p)), p);
  }
  const Policy hold = *HardHoldProgram(DefaultEmployeeSchema());
  EXPECT_EQ(PolicyFromJson(PolicyToJson(hold)), hold);
}

TEST(PolicyJsonTest, NumericAssignment) {
  const auto json = nlohmann::json::parse(R"({
    "name": "smaller_teams",
    "rewrites": [{"match": [{"feature": "team_size", "min": 12}],
                  "assign": [{"feature": "team_size", "value": 11}]}]})");
  const Policy p = PolicyFromJson(json);
  ASSERT_EQ(p.rewrites.size(), 1u);
  EXPECT_EQ(p.rewrites[0].match[0].min, 12.0);
  EXPECT_EQ(p.rewrites[0].assign[0].value, 11.0);
}

TEST(PolicyJsonTest, StructuralErrorsCarryFieldPaths) {
  const auto json = nlohmann::json::parse(
      R"({"name": "x", "rewrites": [{"match": [], "assign": [{"value": "a"}]}]})");
  try {
    PolicyFromJson(json);
    FAIL() << "expected InvalidPolicy";
  } catch (const InvalidPolicy& e) {
    ASSERT_FALSE(e.issues().empty());
    EXPECT_EQ(e.issues()[0].field.rfind("rewrites[0].assign[0]", 0), 0u);
  }
  EXPECT_THROW(PolicyFromJson(nlohmann::json::array()), InvalidPolicy);
}

TEST(BuiltinProgramsTest, FullSchemaHasFivePrograms) {
  std::vector<std::string> warnings;
  const auto menu = BuiltinPrograms(DefaultEmployeeSchema(), &warnings);
  ASSERT_EQ(menu.size(), 5u);
  for (std::size_t i = 0; i < menu.size(); ++i) {
    EXPECT_EQ(menu[i].name, "P" + std::to_string(i + 1));
  }
  EXPECT_TRUE(warnings.empty());
  EXPECT_TRUE(ValidateMenu(menu, DefaultEmployeeSchema()).empty());
}

TEST(BuiltinProgramsTest, MissingFeaturesAreReported) {
  const Schema schema({FeatureSpec::Categorical("location", {"Remote", "Location1"}, true)});
  std::vector<std::string> warnings;
  const auto menu = BuiltinPrograms(schema, &warnings);
  ASSERT_EQ(menu.size(), 1u);
  EXPECT_EQ(menu[0].name, "P1");
  EXPECT_EQ(warnings.size(), 4u);
  EXPECT_FALSE(HardHoldProgram(schema).has_value());
}

// Tree that flags Remote employees only.
TrainedModel RemoteTree() {
  std::vector<EmployeeRecord> rows;
  for (int i = 0; i < 8; ++i) {
    rows.push_back(MakeRow("t" + std::to_string(i), {double(i % 4), 0, 0, 0},
                           i % 4 == 3 ? Label::kTerminated : Label::kActive));
  }
  return Fit(WeightedDataset::Uniform(Dataset(SmallSchema(), rows)),
             TreeParams{}, {"location"}, 1);
}

TEST(SimulateMassTest, IdentityEqualsBaseline) {
  const TrainedModel model = RemoteTree();
  const Dataset data(SmallSchema(),
                     {MakeRow("a", {3, 0, 0, 0}, Label::kUnknown),
                      MakeRow("b", {0, 0, 0, 0}, Label::kUnknown)});
  const auto report = SimulateMass(model, data, Policy{"identity", "", {}, {}});
  EXPECT_EQ(report.post_leaver_share, report.baseline_leaver_share);
  EXPECT_EQ(report.baseline_leaver_share, 0.5);
  EXPECT_EQ(report.population, 2u);
}

TEST(SimulateMassTest, HardHoldCountsHeldRowsAsStayers) {
  const TrainedModel model = RemoteTree();
  const Dataset data(SmallSchema(),
                     {MakeRow("a", {3, 0, 0, 0}, Label::kUnknown),
                      MakeRow("b", {3, 0, 0, 1}, Label::kUnknown)});
  const auto report = SimulateMass(model, data, *HardHoldProgram(data.schema()));
  EXPECT_EQ(report.baseline_leaver_share, 1.0);
  EXPECT_EQ(report.post_leaver_share, 0.5);
  EXPECT_EQ(report.rows_touched, 1u);
}

TEST(SimulateTargetedTest, EmptyMenuLeavesEveryoneUnassigned) {
  const TrainedModel model = RemoteTree();
  const Dataset data(SmallSchema(),
                     {MakeRow("a", {3, 0, 0, 0}, Label::kUnknown),
                      MakeRow("b", {0, 0, 0, 0}, Label::kUnknown),
                      MakeRow("c", {3, 1, 0, 0}, Label::kUnknown)});
  const auto report = SimulateTargeted(model, data, {});
  EXPECT_EQ(report.flagged, 2u);
  EXPECT_EQ(report.residual_leaver_share, report.baseline_leaver_share);
  ASSERT_EQ(report.programs.size(), 1u);
  EXPECT_EQ(report.programs[0].count, 2u);
  for (const auto& a : report.assignments) {
    EXPECT_FALSE(a.program.has_value());
    EXPECT_EQ(a.post_probability, a.baseline_probability);
  }
}

TEST(SimulateTargetedTest, SingleFlaggedRowFlips) {
  const TrainedModel model = RemoteTree();
  const Dataset data(SmallSchema(), {MakeRow("a", {3, 0, 0, 0}, Label::kUnknown)});
  const auto menu = BuiltinPrograms(data.schema());
  const auto report = SimulateTargeted(model, data, menu);
  EXPECT_EQ(report.baseline_leaver_share, 1.0);
  EXPECT_EQ(report.residual_leaver_share, 0.0);
  ASSERT_EQ(report.assignments.size(), 1u);
  EXPECT_EQ(report.assignments[0].program, "P1");

  const EmployeeRisk risk = CounterfactualRisk(model, data, 0, menu);
  EXPECT_TRUE(risk.flagged);
  ASSERT_EQ(risk.programs.size(), menu.size());
  EXPECT_TRUE(risk.programs[0].flips);
  for (std::size_t i = 1; i < menu.size(); ++i) {
    EXPECT_FALSE(risk.programs[i].flips) << menu[i].name;
  }
  EXPECT_EQ(risk.assigned, "P1");
  const auto json = EmployeeRiskToJson(risk);
  EXPECT_EQ(json["programs"].size(), menu.size());
}

TEST(SimulateTargetedTest, TiesGoToMenuOrder) {
  const TrainedModel model = RemoteTree();
  const Dataset data(SmallSchema(), {MakeRow("a", {3, 0, 0, 0}, Label::kUnknown)});
  const Policy to1{"to1", "", {{{}, {{"location", "Location1", {}}}}}, {}};
  const Policy to2{"to2", "", {{{}, {{"location", "Location2", {}}}}}, {}};
  EXPECT_EQ(SimulateTargeted(model, data, {to2, to1}).assignments[0].program,
            "to2");
  EXPECT_EQ(SimulateTargeted(model, data, {to1, to2}).assignments[0].program,
            "to1");
}

TEST(SimulateTargetedTest, InvalidMenuRejected) {
  const TrainedModel model = RemoteTree();
  const Dataset data(SmallSchema(), {MakeRow("a", {3, 0, 0, 0}, Label::kUnknown)});
  const Policy p{"p", "", {}, {}};
  EXPECT_THROW(SimulateTargeted(model, data, {p, p}), InvalidPolicy);
}

class PlantedPolicyTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    run_ = new testing::PlantedRun(testing::TrainPlantedForest(3));
  }
  static void TearDownTestSuite() {
    delete run_;
    run_ = nullptr;
  }
  static testing::PlantedRun* run_;
};
testing::PlantedRun* PlantedPolicyTest::run_ = nullptr;

TEST_F(PlantedPolicyTest, AdvancingFirstPositionBandLowersShare) {
  const auto menu = BuiltinPrograms(run_->prediction_set.schema());
  const auto report =
      SimulateMass(run_->model, run_->prediction_set, Named(menu, "P5"));
  EXPECT_LT(report.post_leaver_share, report.baseline_leaver_share);
  EXPECT_GT(report.rows_touched, 0u);
}

TEST_F(PlantedPolicyTest, IdentityIsExact) {
  const auto report = SimulateMass(run_->model, run_->prediction_set,
                                   Policy{"identity", "", {}, {}});
  EXPECT_EQ(report.post_leaver_share, report.baseline_leaver_share);
}

TEST_F(PlantedPolicyTest, TargetedInvariantsOverRandomMenus) {
  const Dataset& data = run_->prediction_set;
  std::vector<Policy> full = BuiltinPrograms(data.schema());
  full.push_back(*HardHoldProgram(data.schema()));
  const auto complete = SimulateTargeted(run_->model, data, full);
  Rng rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Policy> menu;
    for (const auto& p : full) {
      if (rng.Uniform() < 0.5) menu.push_back(p);
    }
    rng.Shuffle(menu);
    const auto report = SimulateTargeted(run_->model, data, menu);
    EXPECT_LE(report.residual_leaver_share, report.baseline_leaver_share);
    EXPECT_GE(report.residual_leaver_share, complete.residual_leaver_share);
    std::size_t assigned = 0;
    double share = report.unflagged_share;
    for (const auto& p : report.programs) {
      assigned += p.count;
      share += p.population_share;
    }
    EXPECT_EQ(assigned, report.flagged);
    EXPECT_NEAR(share, 1.0, 1e-12);
    for (const auto& a : report.assignments) {
      EXPECT_GE(a.baseline_probability, report.threshold);
      if (a.program) {
        EXPECT_LT(a.post_probability, report.threshold);
      } else {
        EXPECT_EQ(a.post_probability, a.baseline_probability);
      }
    }
  }
}

TEST_F(PlantedPolicyTest, TargetedJsonAndTable) {
  const auto menu = BuiltinPrograms(run_->prediction_set.schema());
  const auto report = SimulateTargeted(run_->model, run_->prediction_set, menu);
  const auto json = TargetedReportToJson(report);
  EXPECT_EQ(json["programs"].size(), menu.size() + 1);
  EXPECT_TRUE(json["programs"].back()["program"].is_null());
  EXPECT_EQ(json["assignments"].size(), report.flagged);
  EXPECT_EQ(json["population"], run_->prediction_set.size());
  EXPECT_FALSE(TargetedReportTable(report).empty());

  std::vector<PolicyImpactReport> rows;
  for (const auto& p : menu) {
    rows.push_back(SimulateMass(run_->model, run_->prediction_set, p));
  }
  EXPECT_NE(PolicyImpactTable(rows).find("No Retention Policy"),
            std::string::npos);
  EXPECT_EQ(PolicyImpactToJson(rows)["policies"].size(), menu.size());
}

}  // namespace
}  // namespace turnover
