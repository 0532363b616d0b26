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

#include "turnover/synthgen.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "turnover/error.h"
#include "turnover/random.h"

namespace turnover {
namespace {

constexpr double kCalibrationTolerance = 0.03;

double Sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

bool IsDerived(const TeamStructure& teams, const std::string& name) {
  return !name.empty() && (name == teams.team_size_feature ||
                           name == teams.high_performer_pct_feature ||
                           name == teams.low_performer_pct_feature);
}

double DrawNumeric(const NumericMarginal& m, Rng& rng) {
  const double x = std::clamp(m.mean + m.sd * rng.Normal(), m.min, m.max);
  return std::round(x * 100.0) / 100.0;
}

std::size_t DrawLevel(const FeatureSpec& spec,
                      const std::map<std::string, std::vector<double>>& marg,
                      Rng& rng) {
  const auto it = marg.find(spec.name);
  if (it == marg.end()) return rng.Index(spec.levels.size());
  return rng.Categorical(it->second);
}

double PositiveShare(const std::vector<double>& base_logits,
                     const std::vector<double>& uniforms, double intercept) {
  std::size_t positives = 0;
  for (std::size_t i = 0; i < base_logits.size(); ++i) {
    if (uniforms[i] < Sigmoid(intercept + base_logits[i])) ++positives;
  }
  return static_cast<double>(positives) /
         static_cast<double>(base_logits.size());
}

}  // namespace

void ValidateGeneratorConfig(const GeneratorConfig& config) {
  if (config.n == 0) throw ConfigError("population size must be positive");
  if (!(config.base_rate > 0.0 && config.base_rate < 1.0)) {
    throw ConfigError("base_rate must lie in (0, 1)");
  }
  if (!(config.noise_scale >= 0.0) || !std::isfinite(config.noise_scale)) {
    throw ConfigError("noise_scale must be a finite value >= 0");
  }
  if (config.years.empty()) throw ConfigError("at least one year is required");
  const Schema& schema = config.schema;
  if (schema.num_features() == 0) throw ConfigError("generator needs a schema");
  for (const auto& [feature, levels] : config.effect_weights.levels) {
    const auto index = schema.IndexOf(feature);
    if (!index || !schema.feature(*index).IsDiscrete()) {
      throw ConfigError("effect weight references unknown discrete feature \"" +
                        feature + "\"");
    }
    for (const auto& [level, weight] : levels) {
      if (!schema.feature(*index).LevelIndex(level)) {
        throw ConfigError("effect weight references unknown level \"" + level +
                          "\" of \"" + feature + "\"");
      }
      if (!std::isfinite(weight)) throw ConfigError("non-finite effect weight");
    }
  }
  for (const auto& interaction : config.effect_weights.interactions) {
    if (interaction.when.empty()) {
      throw ConfigError("interaction needs at least one condition");
    }
    if (!std::isfinite(interaction.weight)) {
      throw ConfigError("non-finite interaction weight");
    }
    for (const auto& [feature, levels] : interaction.when) {
      const auto index = schema.IndexOf(feature);
      if (!index || !schema.feature(*index).IsDiscrete()) {
        throw ConfigError("interaction references unknown discrete feature \"" +
                          feature + "\"");
      }
      for (const auto& level : levels) {
        if (!schema.feature(*index).LevelIndex(level)) {
          throw ConfigError("interaction references unknown level \"" +
                            level + "\" of \"" + feature + "\"");
        }
      }
    }
  }
  for (const auto& [feature, slope] : config.effect_weights.slopes) {
    const auto index = schema.IndexOf(feature);
    if (!index || schema.feature(*index).IsDiscrete()) {
      throw ConfigError("slope references unknown numeric feature \"" +
                        feature + "\"");
    }
    if (!std::isfinite(slope)) throw ConfigError("non-finite slope");
  }
  for (const auto& [feature, probs] : config.level_marginals) {
    const auto index = schema.IndexOf(feature);
    if (!index || !schema.feature(*index).IsDiscrete() ||
        probs.size() != schema.feature(*index).levels.size()) {
      throw ConfigError("marginal for \"" + feature +
                        "\" does not match its levels");
    }
    double total = 0.0;
    for (double p : probs) {
      if (!(p >= 0.0)) throw ConfigError("negative marginal probability");
      total += p;
    }
    if (!(total > 0.0)) throw ConfigError("marginal sums to zero");
  }
  for (const auto& [feature, marginal] : config.numeric_marginals) {
    const auto index = schema.IndexOf(feature);
    if (!index || schema.feature(*index).IsDiscrete()) {
      throw ConfigError("numeric marginal for unknown feature \"" + feature +
                        "\"");
    }
    if (!(marginal.sd >= 0.0) || marginal.min > marginal.max) {
      throw ConfigError("invalid numeric marginal for \"" + feature + "\"");
    }
  }
  const TeamStructure& teams = config.teams;
  if (!(teams.mean_team_size >= 1.0)) {
    throw ConfigError("mean_team_size must be >= 1");
  }
  for (const auto& name : teams.manager_features) schema.RequireIndex(name);
  for (const std::string* name :
       {&teams.team_size_feature, &teams.high_performer_pct_feature,
        &teams.low_performer_pct_feature}) {
    if (name->empty()) continue;
    if (schema.feature(schema.RequireIndex(*name)).IsDiscrete()) {
      throw ConfigError("team feature \"" + *name + "\" must be numeric");
    }
  }
  if (!teams.high_performer_pct_feature.empty() ||
      !teams.low_performer_pct_feature.empty()) {
    const auto& perf =
        schema.feature(schema.RequireIndex(teams.performance_feature));
    if (!perf.LevelIndex(teams.high_level) ||
        !perf.LevelIndex(teams.low_level)) {
      throw ConfigError("performance feature lacks the high/low levels");
    }
  }
}

GeneratedPopulation GeneratePopulation(const GeneratorConfig& config) {
  ValidateGeneratorConfig(config);
  const Schema& schema = config.schema;
  const std::size_t p = schema.num_features();
  const std::size_t n = config.n;
  const TeamStructure& teams = config.teams;

  Rng covariates(DeriveSeed(config.seed, 1));
  Rng noise_rng(DeriveSeed(config.seed, 2));
  Rng uniform_rng(DeriveSeed(config.seed, 3));

  std::set<std::size_t> manager_columns;
  for (const auto& name : teams.manager_features) {
    manager_columns.insert(schema.RequireIndex(name));
  }
  auto draw_value = [&](std::size_t f) {
    const auto& spec = schema.feature(f);
    if (spec.IsDiscrete()) {
      return static_cast<double>(
          DrawLevel(spec, config.level_marginals, covariates));
    }
    const auto it = config.numeric_marginals.find(spec.name);
    return DrawNumeric(
        it == config.numeric_marginals.end() ? NumericMarginal{} : it->second,
        covariates);
  };

  const auto num_managers = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(
             static_cast<double>(n) / teams.mean_team_size)));
  std::vector<std::vector<double>> managers(num_managers,
                                            std::vector<double>(p, 0.0));
  for (auto& manager : managers) {
    for (std::size_t f : manager_columns) manager[f] = draw_value(f);
  }

  std::vector<EmployeeRecord> rows(n);
  std::vector<std::size_t> manager_of(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& row = rows[i];
    row.id = config.id_prefix + std::to_string(i + 1);
    row.values.assign(p, 0.0);
    manager_of[i] = covariates.Index(num_managers);
    for (std::size_t f = 0; f < p; ++f) {
      if (manager_columns.contains(f)) {
        row.values[f] = managers[manager_of[i]][f];
      } else if (!IsDerived(teams, schema.feature(f).name)) {
        row.values[f] = draw_value(f);
      }
    }
    row.year = config.years[covariates.Index(config.years.size())];
  }

  // Team-derived features.
  if (!teams.team_size_feature.empty() ||
      !teams.high_performer_pct_feature.empty() ||
      !teams.low_performer_pct_feature.empty()) {
    std::vector<double> size(num_managers, 0.0), high(num_managers, 0.0),
        low(num_managers, 0.0);
    std::optional<std::size_t> perf;
    double high_level = -1, low_level = -1;
    if (!teams.performance_feature.empty()) {
      perf = schema.RequireIndex(teams.performance_feature);
      high_level = static_cast<double>(
          *schema.feature(*perf).LevelIndex(teams.high_level));
      low_level = static_cast<double>(
          *schema.feature(*perf).LevelIndex(teams.low_level));
    }
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t m = manager_of[i];
      size[m] += 1.0;
      if (perf && rows[i].values[*perf] == high_level) high[m] += 1.0;
      if (perf && rows[i].values[*perf] == low_level) low[m] += 1.0;
    }
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t m = manager_of[i];
      auto set = [&](const std::string& name, double value) {
        if (!name.empty()) rows[i].values[schema.RequireIndex(name)] = value;
      };
      set(teams.team_size_feature, size[m]);
      set(teams.high_performer_pct_feature,
          std::round(100.0 * high[m] / size[m] * 100.0) / 100.0);
      set(teams.low_performer_pct_feature,
          std::round(100.0 * low[m] / size[m] * 100.0) / 100.0);
    }
  }

  // Linear predictor without intercept.
  std::vector<double> base_logits(n, 0.0);
  std::vector<std::vector<double>> level_weight(p);
  for (std::size_t f = 0; f < p; ++f) {
    const auto& spec = schema.feature(f);
    if (!spec.IsDiscrete()) continue;
    level_weight[f].assign(spec.levels.size(), 0.0);
    const auto it = config.effect_weights.levels.find(spec.name);
    if (it == config.effect_weights.levels.end()) continue;
    for (const auto& [level, weight] : it->second) {
      level_weight[f][*spec.LevelIndex(level)] = weight;
    }
  }
  // (feature index, accepted levels) per interaction.
  std::vector<std::vector<std::pair<std::size_t, std::vector<bool>>>> terms;
  for (const auto& interaction : config.effect_weights.interactions) {
    auto& term = terms.emplace_back();
    for (const auto& [feature, levels] : interaction.when) {
      const std::size_t f = schema.RequireIndex(feature);
      std::vector<bool> accept(schema.feature(f).levels.size(), false);
      for (const auto& level : levels) {
        accept[*schema.feature(f).LevelIndex(level)] = true;
      }
      term.emplace_back(f, std::move(accept));
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    double z = 0.0;
    for (std::size_t t = 0; t < terms.size(); ++t) {
      bool holds = true;
      for (const auto& [f, accept] : terms[t]) {
        holds = holds && accept[rows[i].Level(f)];
      }
      if (holds) z += config.effect_weights.interactions[t].weight;
    }
    for (std::size_t f = 0; f < p; ++f) {
      const auto& spec = schema.feature(f);
      if (spec.IsDiscrete()) {
        z += level_weight[f][rows[i].Level(f)];
      } else if (const auto it = config.effect_weights.slopes.find(spec.name);
                 it != config.effect_weights.slopes.end()) {
        z += it->second * rows[i].values[f];
      }
    }
    base_logits[i] = z + config.noise_scale * noise_rng.Normal();
  }
  std::vector<double> uniforms(n);
  for (auto& u : uniforms) u = uniform_rng.Uniform();

  double intercept = 0.0;
  if (config.intercept) {
    intercept = *config.intercept;
  } else {
    double lo = -60.0, hi = 60.0;
    for (int iter = 0; iter < 200 && hi - lo > 1e-12; ++iter) {
      const double mid = 0.5 * (lo + hi);
      if (PositiveShare(base_logits, uniforms, mid) < config.base_rate) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    const double share_lo = PositiveShare(base_logits, uniforms, lo);
    const double share_hi = PositiveShare(base_logits, uniforms, hi);
    intercept = std::abs(share_lo - config.base_rate) <=
                        std::abs(share_hi - config.base_rate)
                    ? lo
                    : hi;
    const double achieved = PositiveShare(base_logits, uniforms, intercept);
    if (std::abs(achieved - config.base_rate) > kCalibrationTolerance) {
      throw Error("intercept calibration failed: achieved positive share " +
                  std::to_string(achieved) + " for target " +
                  std::to_string(config.base_rate));
    }
  }

  std::size_t positives = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const bool leaves = uniforms[i] < Sigmoid(intercept + base_logits[i]);
    positives += leaves ? 1 : 0;
    rows[i].label = config.unlabeled
                        ? Label::kUnknown
                        : (leaves ? Label::kTerminated : Label::kActive);
  }
  GeneratedPopulation out;
  out.dataset = Dataset(schema, std::move(rows));
  out.intercept = intercept;
  out.positive_share = static_cast<double>(positives) / static_cast<double>(n);
  return out;
}

Schema DefaultEmployeeSchema() {
  const std::vector<std::string> rating = {"Low", "Medium", "High"};
  std::vector<FeatureSpec> f;
  f.push_back(FeatureSpec::Categorical(
      "location", {"Location1", "Location2", "Location3", "Remote"}, true));
  f.push_back(FeatureSpec::Categorical(
      "business_unit", {"Operations", "Engineering", "Support"}));
  f.push_back(
      FeatureSpec::OrdinalBand("tenure_band", {"0-2", "3-7", "8+"}, {3, 8}));
  f.push_back(FeatureSpec::OrdinalBand("time_in_position_band",
                                       {"0-2", "2-4", "4+"}, {2, 4}, true));
  f.push_back(
      FeatureSpec::OrdinalBand("age_band", {"<30", "30-44", "45+"}, {30, 45}));
  f.push_back(FeatureSpec::Categorical("gender", {"Female", "Male"}));
  f.push_back(FeatureSpec::OrdinalBand("performance", rating));
  f.push_back(FeatureSpec::OrdinalBand("potential", rating));
  f.push_back(FeatureSpec::OrdinalBand("grade", {"G1", "G2", "G3", "G4"}));
  f.push_back(FeatureSpec::OrdinalBand("manager_age_band",
                                       {"<40", "40-54", "55+"}, {40, 55}));
  f.push_back(FeatureSpec::Categorical("manager_gender", {"Female", "Male"}));
  f.push_back(FeatureSpec::OrdinalBand("manager_tenure_band",
                                       {"0-2", "3-7", "8+"}, {3, 8}, true));
  f.push_back(FeatureSpec::OrdinalBand("manager_time_in_position_band",
                                       {"0-2", "2-4", "4+"}, {2, 4}, true));
  f.push_back(FeatureSpec::OrdinalBand("manager_performance", rating));
  f.push_back(FeatureSpec::Numeric("manager_avg_performance_3y", "rating"));
  f.push_back(FeatureSpec::Numeric("team_size", "employees"));
  f.push_back(FeatureSpec::Numeric("team_high_performer_pct", "percent"));
  f.push_back(FeatureSpec::Numeric("team_low_performer_pct", "percent"));
  return Schema(std::move(f), "status");
}

GeneratorConfig DefaultTurnoverScenario() {
  GeneratorConfig config;
  config.n = 1000;
  config.base_rate = 0.2;
  config.schema = DefaultEmployeeSchema();
  config.noise_scale = 0.3;
  config.seed = 7;

  // Non-monotone band effects carry most of the signal, so a model that is
  // linear in band rank cannot recover them.
  auto& w = config.effect_weights.levels;
  w["performance"] = {{"Low", 3.0}, {"Medium", 0.0}, {"High", 1.5}};
  w["time_in_position_band"] = {{"0-2", 3.0}, {"2-4", 0.0}, {"4+", 3.0}};
  w["manager_time_in_position_band"] = {
      {"0-2", 0.0}, {"2-4", 1.2}, {"4+", 1.2}};
  w["manager_tenure_band"] = {{"0-2", 1.2}, {"3-7", 0.0}, {"8+", 1.0}};
  w["tenure_band"] = {{"0-2", 0.6}, {"3-7", 0.0}, {"8+", 0.0}};
  w["business_unit"] = {{"Operations", 0.3}, {"Engineering", 0.0},
                        {"Support", -0.1}};
  w["location"] = {{"Location1", 0.0}, {"Location2", 0.0},
                   {"Location3", 0.05}, {"Remote", 0.05}};

  // Conditional effects: long tenure in a role drives away strong
  // performers, established managers retain weak ones, and people who are
  // new both to the company and to their role are the most exposed.
  auto& interactions = config.effect_weights.interactions;
  interactions.push_back(
      {{{"time_in_position_band", {"4+"}}, {"performance", {"High"}}}, 3.0});
  interactions.push_back(
      {{{"performance", {"Low"}}, {"manager_tenure_band", {"3-7"}}}, -3.0});
  interactions.push_back(
      {{{"time_in_position_band", {"0-2"}}, {"tenure_band", {"0-2"}}}, 3.0});

  auto& m = config.level_marginals;
  m["location"] = {0.35, 0.25, 0.2, 0.2};
  m["business_unit"] = {0.4, 0.35, 0.25};
  m["tenure_band"] = {0.3, 0.4, 0.3};
  m["time_in_position_band"] = {0.35, 0.35, 0.3};
  m["age_band"] = {0.3, 0.45, 0.25};
  m["gender"] = {0.45, 0.55};
  m["performance"] = {0.2, 0.55, 0.25};
  m["potential"] = {0.3, 0.5, 0.2};
  m["grade"] = {0.3, 0.35, 0.25, 0.1};
  m["manager_age_band"] = {0.25, 0.5, 0.25};
  m["manager_gender"] = {0.4, 0.6};
  m["manager_tenure_band"] = {0.3, 0.4, 0.3};
  m["manager_time_in_position_band"] = {0.3, 0.35, 0.35};
  m["manager_performance"] = {0.2, 0.55, 0.25};
  config.numeric_marginals["manager_avg_performance_3y"] = {3.2, 0.6, 1.0,
                                                            5.0};

  config.teams.manager_features = {
      "manager_age_band",    "manager_gender",
      "manager_tenure_band", "manager_time_in_position_band",
      "manager_performance", "manager_avg_performance_3y"};
  config.teams.mean_team_size = 8.0;
  config.teams.team_size_feature = "team_size";
  config.teams.high_performer_pct_feature = "team_high_performer_pct";
  config.teams.low_performer_pct_feature = "team_low_performer_pct";
  config.teams.performance_feature = "performance";
  return config;
}

nlohmann::json GeneratorConfigToJson(const GeneratorConfig& config) {
  nlohmann::json out;
  out["n"] = config.n;
  out["base_rate"] = config.base_rate;
  out["schema"] = SchemaToJson(config.schema);
  nlohmann::json interactions = nlohmann::json::array();
  for (const auto& interaction : config.effect_weights.interactions) {
    interactions.push_back(
        {{"when", interaction.when}, {"weight", interaction.weight}});
  }
  out["effect_weights"] = {{"levels", config.effect_weights.levels},
                           {"slopes", config.effect_weights.slopes},
                           {"interactions", std::move(interactions)}};
  out["noise_scale"] = config.noise_scale;
  out["seed"] = config.seed;
  out["level_marginals"] = config.level_marginals;
  nlohmann::json numeric = nlohmann::json::object();
  for (const auto& [name, m] : config.numeric_marginals) {
    nlohmann::json j = {{"mean", m.mean}, {"sd", m.sd}};
    if (std::isfinite(m.min)) j["min"] = m.min;
    if (std::isfinite(m.max)) j["max"] = m.max;
    numeric[name] = j;
  }
  out["numeric_marginals"] = numeric;
  out["teams"] = {
      {"manager_features", config.teams.manager_features},
      {"mean_team_size", config.teams.mean_team_size},
      {"team_size_feature", config.teams.team_size_feature},
      {"high_performer_pct_feature", config.teams.high_performer_pct_feature},
      {"low_performer_pct_feature", config.teams.low_performer_pct_feature},
      {"performance_feature", config.teams.performance_feature},
      {"high_level", config.teams.high_level},
      {"low_level", config.teams.low_level}};
  out["years"] = config.years;
  out["intercept"] = config.intercept ? nlohmann::json(*config.intercept)
                                      : nlohmann::json(nullptr);
  out["unlabeled"] = config.unlabeled;
  out["id_prefix"] = config.id_prefix;
  return out;
}

GeneratorConfig GeneratorConfigFromJson(const nlohmann::json& json) {
  GeneratorConfig config = DefaultTurnoverScenario();
  try {
    if (json.contains("n")) config.n = json.at("n").get<std::size_t>();
    if (json.contains("base_rate")) {
      config.base_rate = json.at("base_rate").get<double>();
    }
    if (json.contains("schema")) config.schema = SchemaFromJson(json["schema"]);
    if (json.contains("effect_weights")) {
      const auto& w = json.at("effect_weights");
      config.effect_weights.levels =
          w.value("levels", decltype(config.effect_weights.levels){});
      config.effect_weights.slopes =
          w.value("slopes", decltype(config.effect_weights.slopes){});
      config.effect_weights.interactions.clear();
      if (w.contains("interactions")) {
        for (const auto& j : w.at("interactions")) {
          config.effect_weights.interactions.push_back(
              {j.at("when")
                   .get<std::map<std::string, std::vector<std::string>>>(),
               j.at("weight").get<double>()});
        }
      }
    }
    if (json.contains("noise_scale")) {
      config.noise_scale = json.at("noise_scale").get<double>();
    }
    if (json.contains("seed")) config.seed = json.at("seed").get<std::uint64_t>();
    if (json.contains("level_marginals")) {
      config.level_marginals =
          json.at("level_marginals")
              .get<std::map<std::string, std::vector<double>>>();
    }
    if (json.contains("numeric_marginals")) {
      config.numeric_marginals.clear();
      for (const auto& [name, j] : json.at("numeric_marginals").items()) {
        NumericMarginal m;
        m.mean = j.value("mean", 0.0);
        m.sd = j.value("sd", 1.0);
        if (j.contains("min")) m.min = j.at("min").get<double>();
        if (j.contains("max")) m.max = j.at("max").get<double>();
        config.numeric_marginals[name] = m;
      }
    }
    if (json.contains("teams")) {
      const auto& t = json.at("teams");
      TeamStructure teams;
      teams.manager_features =
          t.value("manager_features", std::vector<std::string>{});
      teams.mean_team_size = t.value("mean_team_size", 8.0);
      teams.team_size_feature = t.value("team_size_feature", "");
      teams.high_performer_pct_feature =
          t.value("high_performer_pct_feature", "");
      teams.low_performer_pct_feature = t.value("low_performer_pct_feature", "");
      teams.performance_feature = t.value("performance_feature", "");
      teams.high_level = t.value("high_level", "High");
      teams.low_level = t.value("low_level", "Low");
      config.teams = std::move(teams);
    }
    if (json.contains("years")) {
      config.years = json.at("years").get<std::vector<int>>();
    }
    if (json.contains("intercept") && !json.at("intercept").is_null()) {
      config.intercept = json.at("intercept").get<double>();
    }
    config.unlabeled = json.value("unlabeled", false);
    config.id_prefix = json.value("id_prefix", std::string("e"));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed generator config: ") + e.what());
  }
  return config;
}

nlohmann::json GeneratorMetadata(const GeneratorConfig& config,
                                 const GeneratedPopulation& population) {
  nlohmann::json out;
  out["schema_version"] = 1;
  out["generator"] = "logistic_planted_turnover";
  out["config"] = GeneratorConfigToJson(config);
  out["calibrated_intercept"] = population.intercept;
  out["positive_share"] = population.positive_share;
  out["rows"] = population.dataset.size();
  out["marginals_note"] =
      "marginal distributions and manager pools are assumed defaults, not "
      "measured from any real population";
  return out;
}

}  // namespace turnover
