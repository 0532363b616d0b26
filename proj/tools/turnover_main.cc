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

// Command-line driver: generate, train, simulate, serve.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "turnover/error.h"
#include "turnover/pipeline.h"
#include "turnover/service.h"

namespace {

using turnover::RunConfig;

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void AddCommon(CLI::App* app, CommonFlags* flags) {
  app->add_option("-c,--config", flags->config, "Run config (JSON)");
  app->add_option("-s,--seed", flags->seed, "Master seed override");
  app->add_option("-o,--out", flags->out, "Output directory override");
}

RunConfig Resolve(const CommonFlags& flags) {
  RunConfig config = flags.config.empty()
                         ? RunConfig()
                         : turnover::LoadRunConfig(flags.config);
  if (flags.seed) config.seed = *flags.seed;
  if (!flags.out.empty()) config.output_dir = flags.out;
  return config;
}

std::pair<std::string, int> ParseListen(const std::string& listen) {
  const auto colon = listen.rfind(':');
  if (colon == std::string::npos) {
    throw turnover::ConfigError("listen address must be host:port");
  }
  return {listen.substr(0, colon), std::stoi(listen.substr(colon + 1))};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Employee turnover analytics"};
  app.require_subcommand(1);

  CommonFlags generate_flags;
  auto* generate = app.add_subcommand("generate", "Write a synthetic population");
  AddCommon(generate, &generate_flags);

  CommonFlags train_flags;
  std::string train_data, train_schema;
  auto* train = app.add_subcommand("train", "Select features, tune and fit");
  AddCommon(train, &train_flags);
  train->add_option("--data", train_data, "Training data CSV");
  train->add_option("--schema", train_schema, "Schema JSON");

  CommonFlags simulate_flags;
  std::string simulate_model, simulate_set, simulate_schema;
  std::vector<std::string> simulate_policies;
  bool no_targeted = false;
  auto* simulate = app.add_subcommand("simulate", "Run retention programs");
  AddCommon(simulate, &simulate_flags);
  simulate->add_option("--model", simulate_model, "Model JSON");
  simulate->add_option("--prediction-set", simulate_set, "Prediction set CSV");
  simulate->add_option("--schema", simulate_schema, "Schema JSON");
  simulate->add_option("--policy", simulate_policies,
                       "Policy JSON file, or \"builtin\" (repeatable)");
  simulate->add_flag("--no-targeted", no_targeted, "Skip targeted simulation");

  CommonFlags serve_flags;
  std::string serve_model, serve_set, serve_schema, serve_importance;
  std::string listen = "127.0.0.1:8080";
  auto* serve = app.add_subcommand("serve", "Serve the JSON API");
  AddCommon(serve, &serve_flags);
  serve->add_option("--model", serve_model, "Model JSON");
  serve->add_option("--prediction-set", serve_set, "Prediction set CSV");
  serve->add_option("--schema", serve_schema, "Schema JSON");
  serve->add_option("--importance", serve_importance, "Importance JSON");
  serve->add_option("-l,--listen", listen, "host:port");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*generate) {
      const auto result = turnover::CmdGenerate(Resolve(generate_flags));
      std::printf("wrote %zu rows (%.1f%% Terminated) to %s\n", result.rows,
                  100.0 * result.positive_share, result.data_path.c_str());
    } else if (*train) {
      RunConfig config = Resolve(train_flags);
      if (!train_data.empty()) config.data = train_data;
      if (!train_schema.empty()) config.schema = train_schema;
      const auto result = turnover::CmdTrain(config);
      std::cout << turnover::CvReportTable(result.cv) << "\n"
                << turnover::ImportanceTable(result.importance);
      std::printf("best: %s + %s (%s), test AUC %.4f\n",
                  std::string(turnover::FamilyName(result.model.family())).c_str(),
                  result.cv.BestConfig().resampling.Name().c_str(),
                  turnover::DescribeHyperparameters(
                      result.model.hyperparameters).c_str(),
                  result.test_auc);
    } else if (*simulate) {
      RunConfig config = Resolve(simulate_flags);
      if (!simulate_model.empty()) config.model = simulate_model;
      if (!simulate_set.empty()) config.prediction_set = simulate_set;
      if (!simulate_schema.empty()) config.schema = simulate_schema;
      if (!simulate_policies.empty()) config.policies = simulate_policies;
      if (no_targeted) config.targeted = false;
      const auto result = turnover::CmdSimulate(config);
      std::cout << turnover::PolicyImpactTable(result.mass);
      if (result.targeted) {
        std::cout << "\n" << turnover::TargetedReportTable(*result.targeted);
      }
    } else if (*serve) {
      RunConfig config = Resolve(serve_flags);
      if (!serve_model.empty()) config.model = serve_model;
      if (!serve_set.empty()) config.prediction_set = serve_set;
      if (!serve_schema.empty()) config.schema = serve_schema;
      const turnover::Schema schema = turnover::LoadSchemaFile(config.schema);
      auto loaded = turnover::LoadModelFile(turnover::ModelPath(config));
      auto prediction_set = turnover::LoadDatasetFile(
          turnover::PredictionSetPath(config), schema);
      if (serve_importance.empty()) {
        serve_importance =
            (std::filesystem::path(turnover::ModelPath(config)).parent_path() /
             "importance.json")
                .string();
      }
      std::optional<turnover::ImportanceReport> importance;
      if (std::filesystem::exists(serve_importance)) {
        importance = turnover::ImportanceFromJson(nlohmann::json::parse(
            turnover::ReadFile(serve_importance)));
      }
      turnover::TurnoverService service(std::move(loaded.model),
                                        std::move(loaded.document),
                                        std::move(prediction_set),
                                        std::move(importance));
      if (!service.healthy()) {
        std::fprintf(stderr,
                     "warning: model and prediction set are incompatible; "
                     "all requests will answer 409\n");
      }
      const auto [host, port] = ParseListen(listen);
      std::printf("listening on %s:%d\n", host.c_str(), port);
      std::fflush(stdout);
      turnover::Serve(service, host, port);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
