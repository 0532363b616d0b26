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

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "turnover/dataset.h"
#include "turnover/error.h"
#include "turnover/features.h"
#include "turnover/random.h"

namespace turnover {
namespace {

namespace fs = std::filesystem;

constexpr int kRunSchemaVersion = 1;

// Stream indices under the master seed.
enum SeedStream : std::uint64_t {
  kSplitStream = 1,
  kCvStream = 2,
  kRefitStream = 3,
  kRefitResampleStream = 4,
  kImportanceStream = 5,
  kPredictionSetStream = 6,
};

std::string InDir(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

// Config as embedded in artifacts. Output locations are left out so that
// identical runs into different directories produce identical reports.
nlohmann::json Provenance(const RunConfig& config) {
  nlohmann::json run = RunConfigToJson(config);
  run.erase("output_dir");
  return {{"seed", config.seed}, {"config", std::move(run)}};
}

}  // namespace

RunConfig RunConfigFromJson(const nlohmann::json& j) {
  RunConfig c;
  try {
    if (!j.is_object()) throw ConfigError("run config must be an object");
    c.data = j.value("data", c.data);
    c.schema = j.value("schema", c.schema);
    c.output_dir = j.value("output_dir", c.output_dir);
    if (j.contains("exit_reason_column") && !j["exit_reason_column"].is_null()) {
      c.exit_reason_column = j["exit_reason_column"].get<std::string>();
    }
    c.split_fraction = j.value("split_fraction", c.split_fraction);
    c.keep_fraction = j.value("keep_fraction", c.keep_fraction);
    c.bins = j.value("bins", c.bins);
    c.k = j.value("k", c.k);
    if (j.contains("holdout_fraction") && !j["holdout_fraction"].is_null()) {
      c.holdout_fraction = j["holdout_fraction"].get<double>();
    }
    if (j.contains("models")) c.models = j["models"];
    if (j.contains("resampling")) {
      c.resampling.clear();
      for (const auto& m : j["resampling"]) {
        c.resampling.push_back(ResamplingFromJson(m));
      }
    }
    c.threshold = j.value("threshold", c.threshold);
    c.seed = j.value("seed", c.seed);
    c.importance_repetitions =
        j.value("importance_repetitions", c.importance_repetitions);
    if (j.contains("generator")) {
      c.generator = GeneratorConfigFromJson(j["generator"]);
    }
    c.prediction_set_size =
        j.value("prediction_set_size", c.prediction_set_size);
    c.model = j.value("model", c.model);
    c.prediction_set = j.value("prediction_set", c.prediction_set);
    if (j.contains("policies")) {
      c.policies = j["policies"].get<std::vector<std::string>>();
    }
    c.targeted = j.value("targeted", c.targeted);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed run config: ") + e.what());
  }
  if (!(c.split_fraction > 0.0 && c.split_fraction < 1.0)) {
    throw ConfigError("split_fraction must lie in (0, 1)");
  }
  if (!(c.keep_fraction > 0.0 && c.keep_fraction <= 1.0)) {
    throw ConfigError("keep_fraction must lie in (0, 1]");
  }
  if (c.bins < 2) throw ConfigError("bins must be >= 2");
  if (c.k < 2) throw ConfigError("k must be >= 2");
  if (c.importance_repetitions < 1) {
    throw ConfigError("importance_repetitions must be >= 1");
  }
  if (!c.models.is_array() || c.models.empty()) {
    throw ConfigError("models must be a non-empty array");
  }
  if (c.resampling.empty()) throw ConfigError("resampling must not be empty");
  Threshold{c.threshold};
  return c;
}

nlohmann::json RunConfigToJson(const RunConfig& c) {
  nlohmann::json resampling = nlohmann::json::array();
  for (const auto& m : c.resampling) resampling.push_back(ResamplingToJson(m));
  return {{"schema_version", kRunSchemaVersion},
          {"data", c.data},
          {"schema", c.schema},
          {"output_dir", c.output_dir},
          {"exit_reason_column", c.exit_reason_column
                                     ? nlohmann::json(*c.exit_reason_column)
                                     : nlohmann::json(nullptr)},
          {"split_fraction", c.split_fraction},
          {"keep_fraction", c.keep_fraction},
          {"bins", c.bins},
          {"k", c.k},
          {"holdout_fraction", c.holdout_fraction
                                   ? nlohmann::json(*c.holdout_fraction)
                                   : nlohmann::json(nullptr)},
          {"models", c.models},
          {"resampling", std::move(resampling)},
          {"threshold", c.threshold},
          {"seed", c.seed},
          {"importance_repetitions", c.importance_repetitions},
          {"generator", GeneratorConfigToJson(c.generator)},
          {"prediction_set_size", c.prediction_set_size},
          {"model", c.model},
          {"prediction_set", c.prediction_set},
          {"policies", c.policies},
          {"targeted", c.targeted}};
}

RunConfig LoadRunConfig(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(ReadFile(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("cannot parse " + path + ": " + e.what());
  }
  return RunConfigFromJson(j);
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void WriteFile(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path);
  out << contents;
  if (!out) throw ConfigError("failed writing " + path);
}

void WriteJson(const std::string& path, const nlohmann::json& json) {
  WriteFile(path, json.dump(2) + "\n");
}

void EnsureWritableDirectory(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw ConfigError("output directory " + dir + " cannot be created");
  }
  const std::string probe = InDir(dir, ".write_probe");
  {
    std::ofstream out(probe);
    if (!out) throw ConfigError("output directory " + dir + " is not writable");
  }
  fs::remove(probe, ec);
}

std::vector<Hyperparameters> ResolveModelGrid(const nlohmann::json& models,
                                              std::size_t num_features) {
  std::vector<Hyperparameters> grid;
  for (const auto& entry : models) {
    if (entry.is_string()) {
      auto points = DefaultGrid(ParseFamily(entry.get<std::string>()),
                                num_features);
      grid.insert(grid.end(), points.begin(), points.end());
    } else {
      grid.push_back(HyperparametersFromJson(entry, num_features));
    }
  }
  return grid;
}

Schema LoadSchemaFile(const std::string& path) {
  try {
    return SchemaFromJson(nlohmann::json::parse(ReadFile(path)));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed schema " + path + ": " + e.what());
  }
}

std::string ModelPath(const RunConfig& config) {
  return config.model.empty() ? InDir(config.output_dir, "model.json")
                              : config.model;
}

std::string PredictionSetPath(const RunConfig& config) {
  return config.prediction_set.empty()
             ? InDir(config.output_dir, "prediction.csv")
             : config.prediction_set;
}

GenerateResult CmdGenerate(const RunConfig& config) {
  GeneratorConfig gen = config.generator;
  gen.seed = config.seed;
  ValidateGeneratorConfig(gen);
  EnsureWritableDirectory(config.output_dir);

  const GeneratedPopulation population = GeneratePopulation(gen);
  GenerateResult result;
  result.data_path = InDir(config.output_dir, "data.csv");
  result.schema_path = InDir(config.output_dir, "schema.json");
  result.rows = population.dataset.size();
  result.positive_share = population.positive_share;
  {
    std::ostringstream csv;
    WriteDataset(csv, population.dataset);
    WriteFile(result.data_path, csv.str());
  }
  WriteJson(result.schema_path, SchemaToJson(gen.schema));
  WriteJson(InDir(config.output_dir, "generator.json"),
            GeneratorMetadata(gen, population));

  if (config.prediction_set_size > 0) {
    GeneratorConfig current = gen;
    current.n = config.prediction_set_size;
    current.seed = DeriveSeed(config.seed, kPredictionSetStream);
    current.unlabeled = true;
    current.id_prefix = "p";
    std::ostringstream csv;
    WriteDataset(csv, GeneratePopulation(current).dataset);
    WriteFile(InDir(config.output_dir, "prediction.csv"), csv.str());
  }
  return result;
}

TrainResult CmdTrain(const RunConfig& config) {
  EnsureWritableDirectory(config.output_dir);
  const Schema schema = LoadSchemaFile(config.schema);
  Dataset data = LoadDatasetFile(config.data, schema);
  if (config.exit_reason_column) {
    data = CurateScope(data, *config.exit_reason_column);
  }
  auto [train, test] = SplitStratified(
      data, config.split_fraction, DeriveSeed(config.seed, kSplitStream));

  std::vector<BinningRule> rules;
  for (const auto& spec : train.schema().features()) {
    if (!spec.IsDiscrete()) {
      rules.push_back(BinningRule::EqualFrequency(spec.name, config.bins));
    }
  }
  const Discretized discretized = Discretize(train, rules);
  TrainResult result;
  result.ranking = RankAndFilter(discretized.dataset, config.keep_fraction);
  const auto& selected = result.ranking.selected;

  const auto grid = ResolveModelGrid(config.models, selected.size());
  GridSearchOptions options;
  options.k = config.k;
  options.seed = DeriveSeed(config.seed, kCvStream);
  options.holdout_fraction = config.holdout_fraction;
  options.threshold = Threshold(config.threshold);
  result.cv = GridSearch(train, selected, grid, config.resampling, options);

  const CvConfig& best = result.cv.BestConfig();
  const WeightedDataset refit_data = Rebalance(
      train,
      best.resampling.WithSeed(DeriveSeed(config.seed, kRefitResampleStream)));
  result.model = Fit(refit_data, best.hyperparameters, selected,
                     DeriveSeed(config.seed, kRefitStream),
                     Threshold(config.threshold));

  const std::vector<double> scores = PredictProba(result.model, test);
  const std::vector<Label> actual = test.Labels();
  const RocCurve roc = RocAuc(scores, actual);
  result.test_auc = roc.auc;
  result.test_confusion =
      ComputeConfusion(Classify(scores, result.model.threshold), actual);
  result.importance =
      PermutationImportance(result.model, test, config.importance_repetitions,
                            DeriveSeed(config.seed, kImportanceStream));

  const nlohmann::json run = Provenance(config);
  const std::string& dir = config.output_dir;
  nlohmann::json metrics = {
      {"cv_mean_auc", result.cv.cells[*result.cv.best].mean_auc},
      {"cv_sd_auc", result.cv.cells[*result.cv.best].sd_auc},
      {"test_auc", result.test_auc},
      {"test", ConfusionToJson(result.test_confusion)},
      {"train_rows", train.size()},
      {"test_rows", test.size()}};

  nlohmann::json model_doc = ModelToJson(result.model);
  model_doc["resampling"] = ResamplingToJson(best.resampling);
  model_doc["metrics"] = metrics;
  model_doc["run"] = run;
  WriteJson(InDir(dir, "model.json"), model_doc);

  nlohmann::json cv = CvReportToJson(result.cv);
  cv["run"] = run;
  WriteJson(InDir(dir, "cv_report.json"), cv);
  WriteFile(InDir(dir, "cv_report.txt"), CvReportTable(result.cv));

  nlohmann::json features = FeatureRankingToJson(result.ranking);
  nlohmann::json cuts = nlohmann::json::object();
  for (const auto& [name, edges] : discretized.plan.cut_points) {
    cuts[name] = edges;
  }
  features["cut_points"] = std::move(cuts);
  features["run"] = run;
  WriteJson(InDir(dir, "features.json"), features);
  WriteFile(InDir(dir, "features.txt"), FeatureRankingTable(result.ranking));

  nlohmann::json test_metrics = {{"schema_version", kRunSchemaVersion},
                                 {"metrics", metrics},
                                 {"run", run}};
  WriteJson(InDir(dir, "test_metrics.json"), test_metrics);
  WriteFile(InDir(dir, "roc_test.tsv"), RocToTsv(roc));

  nlohmann::json importance = ImportanceToJson(result.importance);
  importance["run"] = run;
  WriteJson(InDir(dir, "importance.json"), importance);
  WriteFile(InDir(dir, "importance.txt"), ImportanceTable(result.importance));
  return result;
}

LoadedModel LoadModelFile(const std::string& path) {
  LoadedModel loaded;
  try {
    loaded.document = nlohmann::json::parse(ReadFile(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("cannot parse model " + path + ": " + e.what());
  }
  loaded.model = ModelFromJson(loaded.document);
  return loaded;
}

std::vector<Policy> LoadPolicyMenu(const std::vector<std::string>& sources,
                                   const Schema& schema) {
  std::vector<Policy> menu;
  for (const auto& source : sources) {
    if (source == "builtin") {
      auto builtin = BuiltinPrograms(schema);
      menu.insert(menu.end(), builtin.begin(), builtin.end());
      continue;
    }
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(ReadFile(source));
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError("cannot parse policy " + source + ": " + e.what());
    }
    if (doc.is_array()) {
      for (const auto& p : doc) menu.push_back(PolicyFromJson(p));
    } else {
      menu.push_back(PolicyFromJson(doc));
    }
  }
  RequireValidMenu(menu, schema);
  return menu;
}

SimulateResult CmdSimulate(const RunConfig& config) {
  EnsureWritableDirectory(config.output_dir);
  const Schema schema = LoadSchemaFile(config.schema);
  const LoadedModel loaded = LoadModelFile(ModelPath(config));
  CheckCompatible(loaded.model, schema);
  const Dataset prediction_set =
      LoadDatasetFile(PredictionSetPath(config), schema);
  const std::vector<Policy> menu = LoadPolicyMenu(config.policies, schema);

  SimulateResult result;
  std::vector<Policy> mass_menu = menu;
  const bool builtin = std::find(config.policies.begin(), config.policies.end(),
                                 "builtin") != config.policies.end();
  if (builtin) {
    if (auto hold = HardHoldProgram(schema)) mass_menu.push_back(*hold);
  }
  for (const auto& policy : mass_menu) {
    result.mass.push_back(SimulateMass(loaded.model, prediction_set, policy));
  }
  const nlohmann::json run = Provenance(config);
  const std::string& dir = config.output_dir;
  nlohmann::json mass = PolicyImpactToJson(result.mass);
  mass["run"] = run;
  WriteJson(InDir(dir, "mass_report.json"), mass);
  WriteFile(InDir(dir, "mass_report.txt"), PolicyImpactTable(result.mass));

  if (config.targeted) {
    result.targeted = SimulateTargeted(loaded.model, prediction_set, menu);
    nlohmann::json targeted = TargetedReportToJson(*result.targeted);
    targeted["run"] = run;
    WriteJson(InDir(dir, "targeted_report.json"), targeted);
    WriteFile(InDir(dir, "targeted_report.txt"),
              TargetedReportTable(*result.targeted));
  }
  return result;
}

}  // namespace turnover
