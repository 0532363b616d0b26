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

#include "turnover/pipeline.h"

#include <filesystem>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "json.hpp"
#include "test_util.h"
#include "turnover/error.h"
#include "turnover/policy.h"

namespace turnover {
namespace {

using ::turnover::testing::MakeTempDir;
using ::turnover::testing::Slurp;

RunConfig SmallRun(const std::string& dir) {
  RunConfig config;
  config.output_dir = dir;
  config.data = dir + "/data.csv";
  config.schema = dir + "/schema.json";
  config.seed = 7;
  config.generator.n = 400;
  config.prediction_set_size = 200;
  config.k = 3;
  config.models = nlohmann::json::array({{{"family", "NaiveBayes"}}});
  config.resampling = {ResamplingMethod::None()};
  config.importance_repetitions = 2;
  return config;
}

TEST(CmdGenerateTest, WritesRequestedRows) {
  const std::string dir = MakeTempDir("gen");
  RunConfig config;
  config.output_dir = dir;
  config.seed = 7;
  const GenerateResult result = CmdGenerate(config);
  EXPECT_EQ(result.rows, 1000u);
  EXPECT_NEAR(result.positive_share, 0.2, 0.03);
  const Dataset data =
      LoadDatasetFile(result.data_path, LoadSchemaFile(result.schema_path));
  EXPECT_EQ(data.size(), 1000u);
  EXPECT_FALSE(Slurp(dir + "/generator.json").empty());
  EXPECT_FALSE(Slurp(dir + "/prediction.csv").empty());
}

TEST(CmdGenerateTest, BadBaseRateFailsBeforeWriting) {
  const std::string dir = MakeTempDir("gen") + "/never";
  RunConfig config;
  config.output_dir = dir;
  config.generator.base_rate = 1.5;
  EXPECT_THROW(CmdGenerate(config), ConfigError);
  EXPECT_FALSE(std::filesystem::exists(dir));
}

TEST(CmdGenerateTest, RepeatIsByteIdentical) {
  const std::string a = MakeTempDir("gen");
  const std::string b = MakeTempDir("gen");
  RunConfig config = SmallRun(a);
  CmdGenerate(config);
  config.output_dir = b;
  CmdGenerate(config);
  for (const char* name :
       {"data.csv", "schema.json", "generator.json", "prediction.csv"}) {
    EXPECT_EQ(Slurp(a + "/" + name), Slurp(b + "/" + name)) << name;
  }
}

TEST(CmdTrainTest, SingleConfigGrid) {
  const std::string dir = MakeTempDir("train");
  const RunConfig config = SmallRun(dir);
  CmdGenerate(config);
  const TrainResult result = CmdTrain(config);
  ASSERT_EQ(result.cv.cells.size(), 1u);
  EXPECT_EQ(result.model.family(), ModelFamily::kNaiveBayes);
  EXPECT_GT(result.test_auc, 0.5);
  for (const char* name :
       {"model.json", "cv_report.json", "cv_report.txt", "features.json",
        "features.txt", "test_metrics.json", "roc_test.tsv",
        "importance.json", "importance.txt"}) {
    EXPECT_FALSE(Slurp(dir + "/" + name).empty()) << name;
  }
  const LoadedModel loaded = LoadModelFile(dir + "/model.json");
  EXPECT_EQ(ModelToJson(loaded.model), ModelToJson(result.model));
  EXPECT_EQ(loaded.document["run"]["seed"], 7);
}

TEST(CmdTrainTest, UnwritableOutputFailsEarly) {
  const std::string dir = MakeTempDir("train");
  const std::string blocker = dir + "/file";
  testing::WriteText(blocker, "x");
  RunConfig config = SmallRun(dir);
  config.output_dir = blocker + "/out";
  EXPECT_THROW(CmdTrain(config), ConfigError);
}

TEST(CmdTrainTest, MissingSchemaIsReported) {
  const std::string dir = MakeTempDir("train");
  EXPECT_THROW(CmdTrain(SmallRun(dir)), Error);
}

class SimulateTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new std::string(MakeTempDir("sim"));
    const RunConfig config = SmallRun(*dir_);
    CmdGenerate(config);
    CmdTrain(config);
  }
  static void TearDownTestSuite() { delete dir_; }
  static std::string* dir_;
};
std::string* SimulateTest::dir_ = nullptr;

// Reads the trained artifacts but writes reports into a subdirectory.
RunConfig SimulateInto(const std::string& dir, const std::string& sub) {
  RunConfig config = SmallRun(dir);
  config.model = dir + "/model.json";
  config.prediction_set = dir + "/prediction.csv";
  config.output_dir = dir + "/" + sub;
  return config;
}

TEST_F(SimulateTest, BuiltinMenuReportsEveryProgram) {
  const SimulateResult result = CmdSimulate(SmallRun(*dir_));
  ASSERT_EQ(result.mass.size(), 6u);
  EXPECT_EQ(result.mass.back().policy, "P5-hold");
  ASSERT_TRUE(result.targeted.has_value());
  EXPECT_EQ(result.targeted->programs.size(), 6u);
  EXPECT_LE(result.targeted->residual_leaver_share,
            result.targeted->baseline_leaver_share);
  const auto mass = nlohmann::json::parse(Slurp(*dir_ + "/mass_report.json"));
  EXPECT_EQ(mass["policies"].size(), 6u);
  EXPECT_NE(Slurp(*dir_ + "/mass_report.txt").find("No Retention Policy"),
            std::string::npos);
}

TEST_F(SimulateTest, IdentityPolicyDocument) {
  const std::string policy = *dir_ + "/identity.json";
  testing::WriteText(policy, R"({"name": "identity", "rewrites": []})");
  RunConfig config = SimulateInto(*dir_, "identity");
  config.policies = {policy};
  const SimulateResult result = CmdSimulate(config);
  ASSERT_EQ(result.mass.size(), 1u);
  EXPECT_EQ(result.mass[0].post_leaver_share,
            result.mass[0].baseline_leaver_share);
  EXPECT_EQ(result.targeted->residual_leaver_share,
            result.targeted->baseline_leaver_share);
}

TEST_F(SimulateTest, InvalidPolicyDocumentRejected) {
  const std::string policy = *dir_ + "/bad.json";
  testing::WriteText(
      policy,
      R"({"name": "bad", "rewrites": [{"match": [],
          "assign": [{"feature": "gender", "value": "Male"}]}]})");
  RunConfig config = SimulateInto(*dir_, "bad");
  config.policies = {policy};
  EXPECT_THROW(CmdSimulate(config), InvalidPolicy);
}

TEST_F(SimulateTest, DroppingAProgramNeverHelps) {
  RunConfig config = SimulateInto(*dir_, "full");
  const SimulateResult full = CmdSimulate(config);

  const std::string partial = *dir_ + "/partial.json";
  nlohmann::json menu = nlohmann::json::array();
  for (const auto& p : BuiltinPrograms(LoadSchemaFile(config.schema))) {
    if (p.name != "P4") menu.push_back(PolicyToJson(p));
  }
  testing::WriteText(partial, menu.dump());
  config.output_dir = *dir_ + "/partial";
  config.policies = {partial};
  const SimulateResult reduced = CmdSimulate(config);
  EXPECT_LE(full.targeted->residual_leaver_share,
            reduced.targeted->residual_leaver_share);
}

TEST_F(SimulateTest, MismatchedModelRejected) {
  RunConfig config = SimulateInto(*dir_, "mismatch");
  nlohmann::json schema = nlohmann::json::parse(Slurp(config.schema));
  for (auto& f : schema["features"]) {
    if (f["name"] == "performance") f["levels"] = {"Low", "High"};
  }
  config.schema = *dir_ + "/other_schema.json";
  testing::WriteText(config.schema, schema.dump());
  EXPECT_THROW(CmdSimulate(config), FingerprintMismatch);
}

TEST(RunConfigTest, JsonRoundTrip) {
  RunConfig config = SmallRun("/tmp/x");
  config.holdout_fraction = 0.2;
  config.exit_reason_column = "exit_reason";
  const nlohmann::json json = RunConfigToJson(config);
  EXPECT_EQ(RunConfigToJson(RunConfigFromJson(json)), json);
}

TEST(RunConfigTest, RejectsEmptyResampling) {
  nlohmann::json json = RunConfigToJson(RunConfig());
  json["resampling"] = nlohmann::json::array();
  EXPECT_THROW(RunConfigFromJson(json), ConfigError);
}

TEST(ResolveModelGridTest, NamesAndObjects) {
  const auto grid = ResolveModelGrid(
      nlohmann::json::array({"LDA", {{"family", "RandomForest"},
                                     {"n_trees", 5},
                                     {"mtry", "all"}}}),
      9);
  ASSERT_EQ(grid.size(), 2u);
  EXPECT_EQ(std::get<ForestParams>(grid[1]).mtry, 9);
  EXPECT_THROW(ResolveModelGrid(nlohmann::json::array({"Perceptron"}), 9),
               ConfigError);
}

}  // namespace
}  // namespace turnover
