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

#include <algorithm>
#include <cmath>

#include "httplib.h"
#include "turnover/error.h"

namespace turnover {
namespace {

constexpr int kApiSchemaVersion = 1;
constexpr int kHistogramBins = 10;
constexpr std::string_view kEmployeesPrefix = "/api/employees/";
constexpr std::string_view kRiskSuffix = "/risk";

HttpResult Ok(nlohmann::json body) {
  body["schema_version"] = kApiSchemaVersion;
  return {200, std::move(body)};
}

// Parses a request body; an empty body reads as an empty object.
std::optional<nlohmann::json> ParseBody(std::string_view body,
                                        HttpResult* error) {
  if (body.find_first_not_of(" \t\r\n") == std::string_view::npos) {
    return nlohmann::json::object();
  }
  try {
    return nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    *error = ErrorResult(400, "malformed_json", e.what());
    return std::nullopt;
  }
}

}  // namespace

HttpResult ErrorResult(int status, std::string code, std::string message,
                       const std::vector<PolicyIssue>& fields) {
  nlohmann::json error = {{"code", std::move(code)},
                          {"message", std::move(message)}};
  if (!fields.empty()) error["fields"] = PolicyIssuesToJson(fields);
  return {status, {{"schema_version", kApiSchemaVersion},
                   {"error", std::move(error)}}};
}

TurnoverService::TurnoverService(TrainedModel model,
                                 nlohmann::json model_document,
                                 Dataset prediction_set,
                                 std::optional<ImportanceReport> importance)
    : model_(std::move(model)),
      model_document_(std::move(model_document)),
      prediction_set_(std::move(prediction_set)),
      importance_(std::move(importance)) {
  try {
    CheckCompatible(model_, prediction_set_.schema());
    menu_ = BuiltinPrograms(prediction_set_.schema());
    hard_hold_ = HardHoldProgram(prediction_set_.schema());
    baseline_ = PredictProba(model_, prediction_set_);
  } catch (const FingerprintMismatch& e) {
    startup_error_ = e.what();
  }
}

HttpResult TurnoverService::Handle(std::string_view method,
                                   std::string_view path,
                                   std::string_view body) const {
  if (!healthy()) {
    return ErrorResult(409, "fingerprint_mismatch",
                       "model and prediction set are incompatible: " +
                           startup_error_);
  }
  auto route = [&](std::string_view want_method, std::string_view want_path) {
    return path == want_path && method == want_method;
  };
  try {
    if (route("GET", "/api/model")) return GetModel();
    if (route("GET", "/api/importance")) return GetImportance();
    if (route("GET", "/api/population/summary")) return GetPopulationSummary();
    if (route("GET", "/api/policies")) return GetPolicies();
    if (route("POST", "/api/policies/validate")) {
      return ValidatePolicyDocument(body);
    }
    if (route("POST", "/api/simulate/mass")) return SimulateMassRequest(body);
    if (route("POST", "/api/simulate/targeted")) {
      return SimulateTargetedRequest(body);
    }
    if (path.starts_with(kEmployeesPrefix) && path.ends_with(kRiskSuffix) &&
        path.size() > kEmployeesPrefix.size() + kRiskSuffix.size()) {
      if (method != "GET") {
        return ErrorResult(405, "method_not_allowed", "use GET");
      }
      return EmployeeRiskRequest(path.substr(
          kEmployeesPrefix.size(),
          path.size() - kEmployeesPrefix.size() - kRiskSuffix.size()));
    }
    for (std::string_view known :
         {"/api/model", "/api/importance", "/api/population/summary",
          "/api/policies", "/api/policies/validate", "/api/simulate/mass",
          "/api/simulate/targeted"}) {
      if (path == known) {
        return ErrorResult(405, "method_not_allowed",
                           std::string(method) + " is not supported on " +
                               std::string(path));
      }
    }
    return ErrorResult(404, "not_found",
                       "no endpoint at " + std::string(path));
  } catch (const InvalidPolicy& e) {
    return ErrorResult(400, "invalid_policy", e.what(), e.issues());
  } catch (const FingerprintMismatch& e) {
    return ErrorResult(409, "fingerprint_mismatch", e.what());
  } catch (const Error& e) {
    return ErrorResult(400, "bad_request", e.what());
  } catch (const std::exception& e) {
    return ErrorResult(500, "internal", e.what());
  }
}

HttpResult TurnoverService::GetModel() const {
  nlohmann::json body = {
      {"family", FamilyName(model_.family())},
      {"hyperparameters", HyperparametersToJson(model_.hyperparameters)},
      {"threshold", model_.threshold.value()},
      {"features", model_.FeatureNames()},
      {"schema_fingerprint", model_.fingerprint},
      {"converged", model_.converged}};
  body["metrics"] = model_document_.value("metrics", nlohmann::json::object());
  if (model_document_.contains("resampling")) {
    body["resampling"] = model_document_["resampling"];
  }
  return Ok(std::move(body));
}

HttpResult TurnoverService::GetImportance() const {
  if (!importance_) {
    return ErrorResult(404, "not_found", "no importance report was loaded");
  }
  return Ok(ImportanceToJson(*importance_));
}

HttpResult TurnoverService::GetPopulationSummary() const {
  const Schema& schema = prediction_set_.schema();
  nlohmann::json features = nlohmann::json::array();
  for (std::size_t f = 0; f < schema.num_features(); ++f) {
    const FeatureSpec& spec = schema.feature(f);
    nlohmann::json entry = {{"name", spec.name},
                            {"kind", FeatureKindName(spec.kind)},
                            {"actionable", spec.actionable}};
    if (spec.IsDiscrete()) {
      std::vector<std::size_t> counts(spec.levels.size(), 0);
      for (const auto& row : prediction_set_.rows()) ++counts[row.Level(f)];
      entry["levels"] = spec.levels;
      entry["counts"] = counts;
    } else if (!prediction_set_.empty()) {
      double lo = HUGE_VAL, hi = -HUGE_VAL, sum = 0.0;
      for (const auto& row : prediction_set_.rows()) {
        lo = std::min(lo, row.values[f]);
        hi = std::max(hi, row.values[f]);
        sum += row.values[f];
      }
      entry["min"] = lo;
      entry["max"] = hi;
      entry["mean"] = sum / static_cast<double>(prediction_set_.size());
    }
    features.push_back(std::move(entry));
  }
  std::vector<std::size_t> histogram(kHistogramBins, 0);
  std::size_t flagged = 0;
  for (double p : baseline_) {
    const int bin = std::min(kHistogramBins - 1,
                             static_cast<int>(p * kHistogramBins));
    ++histogram[static_cast<std::size_t>(bin)];
    if (p >= model_.threshold.value()) ++flagged;
  }
  const double share =
      baseline_.empty() ? 0.0
                        : static_cast<double>(flagged) /
                              static_cast<double>(baseline_.size());
  return Ok({{"population", prediction_set_.size()},
             {"schema", SchemaToJson(schema)},
             {"features", std::move(features)},
             {"baseline",
              {{"threshold", model_.threshold.value()},
               {"leaver_share", share},
               {"flagged", flagged},
               {"histogram_bin_width", 1.0 / kHistogramBins},
               {"histogram", histogram}}}});
}

HttpResult TurnoverService::GetPolicies() const {
  nlohmann::json policies = nlohmann::json::array();
  for (const auto& p : menu_) policies.push_back(PolicyToJson(p));
  nlohmann::json body = {{"policies", std::move(policies)}};
  if (hard_hold_) body["hard_hold"] = PolicyToJson(*hard_hold_);
  return Ok(std::move(body));
}

HttpResult TurnoverService::ValidatePolicyDocument(
    std::string_view body) const {
  HttpResult error;
  const auto json = ParseBody(body, &error);
  if (!json) return error;
  const Policy policy = PolicyFromJson(json->contains("policy")
                                           ? json->at("policy")
                                           : *json);
  auto issues = ValidatePolicy(policy, prediction_set_.schema());
  if (!issues.empty()) throw InvalidPolicy(std::move(issues));
  return Ok({{"valid", true}, {"policy", PolicyToJson(policy)}});
}

HttpResult TurnoverService::SimulateMassRequest(std::string_view body) const {
  HttpResult error;
  const auto json = ParseBody(body, &error);
  if (!json) return error;
  const Policy policy = PolicyFromJson(json->contains("policy")
                                           ? json->at("policy")
                                           : *json);
  auto issues = ValidatePolicy(policy, prediction_set_.schema());
  if (!issues.empty()) throw InvalidPolicy(std::move(issues));
  return Ok(PolicyImpactReportToJson(
      SimulateMass(model_, prediction_set_, policy)));
}

HttpResult TurnoverService::SimulateTargetedRequest(
    std::string_view body) const {
  HttpResult error;
  const auto json = ParseBody(body, &error);
  if (!json) return error;
  std::vector<Policy> menu;
  if (!json->contains("menu") || json->at("menu") == "builtin") {
    menu = menu_;
  } else if (!json->at("menu").is_array()) {
    throw InvalidPolicy(
        std::vector<PolicyIssue>{{"menu", "must be an array or \"builtin\""}});
  } else {
    for (const auto& doc : json->at("menu")) menu.push_back(PolicyFromJson(doc));
  }
  return Ok(TargetedReportToJson(
      SimulateTargeted(model_, prediction_set_, menu)));
}

HttpResult TurnoverService::EmployeeRiskRequest(std::string_view id) const {
  const auto row = prediction_set_.FindId(id);
  if (!row) {
    return ErrorResult(404, "unknown_employee",
                       "no employee with id \"" + std::string(id) + "\"");
  }
  return Ok(EmployeeRiskToJson(
      CounterfactualRisk(model_, prediction_set_, *row, menu_)));
}

void Serve(const TurnoverService& service, const std::string& host,
           int port) {
  httplib::Server server;
  auto handler = [&service](const httplib::Request& req,
                            httplib::Response& res) {
    const HttpResult result = service.Handle(req.method, req.path, req.body);
    res.status = result.status;
    res.set_content(result.body.dump(), "application/json");
  };
  server.Get(R"(/api/.*)", handler);
  server.Post(R"(/api/.*)", handler);
  if (!server.listen(host, port)) {
    throw ConfigError("cannot listen on " + host + ":" + std::to_string(port));
  }
}

}  // namespace turnover
