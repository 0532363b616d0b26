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

#ifndef TURNOVER_SERVICE_H_
#define TURNOVER_SERVICE_H_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "turnover/dataset.h"
#include "turnover/eval.h"
#include "turnover/model.h"
#include "turnover/policy.h"

namespace turnover {

struct HttpResult {
  int status = 200;
  nlohmann::json body;
};

// Read-only JSON API over a frozen model and prediction set. Handle() is a
// pure function of the loaded artifacts and the request, so one instance
// serves concurrent requests without locking.
class TurnoverService {
 public:
  // A model whose features disagree with the prediction set puts the
  // service into a state where every request answers 409.
  TurnoverService(TrainedModel model, nlohmann::json model_document,
                  Dataset prediction_set,
                  std::optional<ImportanceReport> importance);

  HttpResult Handle(std::string_view method, std::string_view path,
                    std::string_view body) const;

  bool healthy() const { return startup_error_.empty(); }
  const std::vector<Policy>& menu() const { return menu_; }

 private:
  HttpResult GetModel() const;
  HttpResult GetImportance() const;
  HttpResult GetPopulationSummary() const;
  HttpResult GetPolicies() const;
  HttpResult ValidatePolicyDocument(std::string_view body) const;
  HttpResult SimulateMassRequest(std::string_view body) const;
  HttpResult SimulateTargetedRequest(std::string_view body) const;
  HttpResult EmployeeRiskRequest(std::string_view id) const;

  TrainedModel model_;
  nlohmann::json model_document_;
  Dataset prediction_set_;
  std::optional<ImportanceReport> importance_;
  std::vector<Policy> menu_;
  std::optional<Policy> hard_hold_;
  std::string startup_error_;
  std::vector<double> baseline_;
};

HttpResult ErrorResult(int status, std::string code, std::string message,
                       const std::vector<PolicyIssue>& fields = {});

// Blocks serving `service` on host:port until the process is stopped.
void Serve(const TurnoverService& service, const std::string& host, int port);

}  // namespace turnover

#endif  // TURNOVER_SERVICE_H_
