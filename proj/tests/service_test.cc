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

#include "turnover/service.h"

#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "json.hpp"
#include "test_util.h"
#include "turnover/eval.h"
#include "turnover/model.h"
#include "turnover/policy.h"
#include "turnover/synthgen.h"

namespace turnover {
namespace {

class ServiceTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    testing::PlantedRun run = testing::TrainPlantedForest(3, 300);
    const testing::PlantedSplit planted = testing::PreparePlanted(3);
    ImportanceReport importance =
        PermutationImportance(run.model, planted.test, 1, 3);
    nlohmann::json doc = ModelToJson(run.model);
    doc["metrics"] = {{"test_auc", 0.9}};
    service_ = new TurnoverService(run.model, doc, run.prediction_set,
                                   importance);
    prediction_set_ = new Dataset(run.prediction_set);
  }
  static void TearDownTestSuite() {
    delete service_;
    delete prediction_set_;
  }

  static HttpResult Get(const std::string& path) {
    return service_->Handle("GET", path, "");
  }
  static HttpResult Post(const std::string& path, const std::string& body) {
    return service_->Handle("POST", path, body);
  }

  static TurnoverService* service_;
  static Dataset* prediction_set_;
};
TurnoverService* ServiceTest::service_ = nullptr;
Dataset* ServiceTest::prediction_set_ = nullptr;

TEST_F(ServiceTest, ModelEndpoint) {
  const HttpResult r = Get("/api/model");
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(r.body["family"], "RandomForest");
  EXPECT_EQ(r.body["metrics"]["test_auc"], 0.9);
  EXPECT_TRUE(r.body.contains("schema_version"));
  EXPECT_FALSE(r.body["features"].empty());
}

TEST_F(ServiceTest, ImportanceEndpoint) {
  const HttpResult r = Get("/api/importance");
  ASSERT_EQ(r.status, 200);
  EXPECT_FALSE(r.body.empty());
}

TEST_F(ServiceTest, PopulationSummary) {
  const HttpResult r = Get("/api/population/summary");
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(r.body["population"], prediction_set_->size());
  std::size_t total = 0;
  for (const auto& c : r.body["baseline"]["histogram"]) total += c.get<std::size_t>();
  EXPECT_EQ(total, prediction_set_->size());
  const double share = r.body["baseline"]["leaver_share"];
  EXPECT_GE(share, 0.0);
  EXPECT_LE(share, 1.0);
}

TEST_F(ServiceTest, PoliciesListBuiltinMenu) {
  const HttpResult r = Get("/api/policies");
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(r.body["policies"].size(), 5u);
  EXPECT_EQ(r.body["hard_hold"]["name"], "P5-hold");
}

TEST_F(ServiceTest, ValidateAcceptsGoodPolicy) {
  const HttpResult r = Post(
      "/api/policies/validate",
      R"({"name": "p", "rewrites": [{"match": [{"feature": "location",
          "levels": ["Remote"]}], "assign": [{"feature": "location",
          "value": "Location2"}]}]})");
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(r.body["valid"], true);
}

TEST_F(ServiceTest, ValidateNamesNonActionableFeature) {
  const HttpResult r = Post(
      "/api/policies/validate",
      R"({"policy": {"name": "p", "rewrites": [{"match": [],
          "assign": [{"feature": "gender", "value": "Male"}]}]}})");
  ASSERT_EQ(r.status, 400);
  EXPECT_EQ(r.body["error"]["code"], "invalid_policy");
  ASSERT_FALSE(r.body["error"]["fields"].empty());
  EXPECT_EQ(r.body["error"]["fields"][0]["field"],
            "rewrites[0].assign[0].feature");
  EXPECT_NE(r.body["error"]["fields"][0]["message"].get<std::string>().find(
                "gender"),
            std::string::npos);
}

TEST_F(ServiceTest, MalformedJson) {
  const HttpResult r = Post("/api/simulate/mass", "{not json");
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(r.body["error"]["code"], "malformed_json");
}

TEST_F(ServiceTest, MassIdentityMatchesBaseline) {
  const HttpResult r =
      Post("/api/simulate/mass", R"({"policy": {"name": "identity"}})");
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(r.body["post_leaver_share"], r.body["baseline_leaver_share"]);
  EXPECT_EQ(r.body["baseline_leaver_share"],
            Get("/api/population/summary").body["baseline"]["leaver_share"]);
}

TEST_F(ServiceTest, TargetedBuiltinAndCustomMenus) {
  const HttpResult builtin = Post("/api/simulate/targeted", "");
  ASSERT_EQ(builtin.status, 200);
  EXPECT_EQ(builtin.body["programs"].size(), 6u);
  EXPECT_LE(builtin.body["residual_leaver_share"].get<double>(),
            builtin.body["baseline_leaver_share"].get<double>());

  const HttpResult empty = Post("/api/simulate/targeted", R"({"menu": []})");
  ASSERT_EQ(empty.status, 200);
  EXPECT_EQ(empty.body["residual_leaver_share"],
            empty.body["baseline_leaver_share"]);

  const HttpResult bad = Post("/api/simulate/targeted", R"({"menu": 3})");
  EXPECT_EQ(bad.status, 400);
}

TEST_F(ServiceTest, EmployeeRisk) {
  const std::string id = prediction_set_->row(0).id;
  const HttpResult r = Get("/api/employees/" + id + "/risk");
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(r.body["id"], id);
  EXPECT_EQ(r.body["programs"].size(), service_->menu().size());
  EXPECT_EQ(Get("/api/employees/nobody/risk").status, 404);
  EXPECT_EQ(Get("/api/employees/nobody/risk").body["error"]["code"],
            "unknown_employee");
  EXPECT_EQ(Post("/api/employees/" + id + "/risk", "").status, 405);
}

TEST_F(ServiceTest, RoutingErrors) {
  EXPECT_EQ(Get("/api/nothing").status, 404);
  EXPECT_EQ(Post("/api/model", "").status, 405);
  EXPECT_EQ(Get("/api/simulate/mass").status, 405);
}

TEST_F(ServiceTest, IdenticalRequestsIdenticalResponses) {
  const std::string body = R"({"menu": "builtin"})";
  EXPECT_EQ(Post("/api/simulate/targeted", body).body.dump(),
            Post("/api/simulate/targeted", body).body.dump());
  EXPECT_EQ(Get("/api/population/summary").body.dump(),
            Get("/api/population/summary").body.dump());
}

TEST(ServiceMismatchTest, IncompatibleSchemaAnswers409) {
  testing::PlantedRun run = testing::TrainPlantedForest(4, 20);
  Schema schema = run.prediction_set.schema();
  std::vector<FeatureSpec> features = schema.features();
  for (auto& f : features) {
    if (f.name == "performance") f.levels.push_back("Exceptional");
  }
  const Dataset other(Schema(features), run.prediction_set.rows());
  const TurnoverService service(run.model, ModelToJson(run.model), other,
                                std::nullopt);
  EXPECT_FALSE(service.healthy());
  const HttpResult r = service.Handle("GET", "/api/model", "");
  EXPECT_EQ(r.status, 409);
  EXPECT_EQ(r.body["error"]["code"], "fingerprint_mismatch");
}

TEST(ServiceMismatchTest, MissingImportanceIs404) {
  testing::PlantedRun run = testing::TrainPlantedForest(4, 20);
  const TurnoverService service(run.model, ModelToJson(run.model),
                                run.prediction_set, std::nullopt);
  EXPECT_EQ(service.Handle("GET", "/api/importance", "").status, 404);
}

}  // namespace
}  // namespace turnover
