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

#include "turnover/model.h"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "turnover/design.h"
#include "turnover/error.h"

namespace turnover {
namespace {

constexpr int kModelSchemaVersion = 1;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void ValidateTree(const TreeParams& tree) {
  if (tree.min_leaf < 1) throw ConfigError("min_leaf must be >= 1");
  if (tree.max_depth && *tree.max_depth < 1) {
    throw ConfigError("max_depth must be >= 1");
  }
}

nlohmann::json TreeParamsToJson(const TreeParams& tree) {
  nlohmann::json j;
  j["max_depth"] = tree.max_depth ? nlohmann::json(*tree.max_depth)
                                  : nlohmann::json(nullptr);
  j["min_leaf"] = tree.min_leaf;
  return j;
}

TreeParams TreeParamsFromJson(const nlohmann::json& j) {
  TreeParams tree;
  if (j.contains("max_depth") && !j.at("max_depth").is_null()) {
    tree.max_depth = j.at("max_depth").get<int>();
  }
  tree.min_leaf = j.value("min_leaf", 1);
  return tree;
}

int ResolveMtry(const nlohmann::json& j, std::size_t p) {
  if (j.is_number_integer()) return j.get<int>();
  const auto name = j.get<std::string>();
  const auto pi = static_cast<int>(p);
  if (name == "sqrt") {
    return std::max(1, static_cast<int>(std::floor(std::sqrt(double(p)))));
  }
  if (name == "third") return std::max(1, pi / 3);
  if (name == "all") return pi;
  throw ConfigError("unknown mtry rule \"" + name + "\"");
}

std::string TreeSuffix(const TreeParams& tree) {
  std::string out = ", max_depth=";
  out += tree.max_depth ? std::to_string(*tree.max_depth) : "none";
  out += ", min_leaf=" + std::to_string(tree.min_leaf);
  return out;
}

std::uint64_t Fnv1a(std::uint64_t hash, std::string_view text) {
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  // Field separator so ("ab","c") and ("a","bc") differ.
  hash ^= 0x1f;
  hash *= 0x100000001b3ULL;
  return hash;
}

}  // namespace

std::string_view FamilyName(ModelFamily family) {
  switch (family) {
    case ModelFamily::kNaiveBayes:
      return "NaiveBayes";
    case ModelFamily::kLda:
      return "LDA";
    case ModelFamily::kSvmRbf:
      return "SvmRbf";
    case ModelFamily::kTree:
      return "Tree";
    case ModelFamily::kTreeBag:
      return "TreeBag";
    case ModelFamily::kRandomForest:
      return "RandomForest";
  }
  return "";
}

ModelFamily ParseFamily(std::string_view name) {
  for (auto family :
       {ModelFamily::kNaiveBayes, ModelFamily::kLda, ModelFamily::kSvmRbf,
        ModelFamily::kTree, ModelFamily::kTreeBag,
        ModelFamily::kRandomForest}) {
    if (FamilyName(family) == name) return family;
  }
  throw ConfigError("unknown model family \"" + std::string(name) + "\"");
}

ModelFamily FamilyOf(const Hyperparameters& hp) {
  return static_cast<ModelFamily>(hp.index());
}

void ValidateHyperparameters(const Hyperparameters& hp,
                             std::size_t num_features) {
  std::visit(
      Overloaded{
          [](const NaiveBayesParams& p) {
            if (!(p.laplace_alpha >= 0.0)) {
              throw ConfigError("laplace_alpha must be >= 0");
            }
          },
          [](const LdaParams& p) {
            if (!(p.ridge >= 0.0)) throw ConfigError("ridge must be >= 0");
          },
          [](const SvmParams& p) {
            if (!(p.cost > 0.0)) throw ConfigError("cost must be > 0");
            if (!(p.gamma > 0.0)) throw ConfigError("gamma must be > 0");
            if (!(p.tolerance > 0.0)) {
              throw ConfigError("smo_tolerance must be > 0");
            }
            if (p.max_passes < 1) throw ConfigError("max_passes must be >= 1");
          },
          [](const TreeParams& p) { ValidateTree(p); },
          [](const TreeBagParams& p) {
            if (p.n_trees < 1) throw ConfigError("n_trees must be >= 1");
            ValidateTree(p.tree);
          },
          [num_features](const ForestParams& p) {
            if (p.n_trees < 1) throw ConfigError("n_trees must be >= 1");
            if (p.mtry < 1 || static_cast<std::size_t>(p.mtry) > num_features) {
              throw ConfigError("mtry must be in [1, " +
                                std::to_string(num_features) + "]");
            }
            ValidateTree(p.tree);
          },
      },
      hp);
}

nlohmann::json HyperparametersToJson(const Hyperparameters& hp) {
  nlohmann::json j;
  j["family"] = FamilyName(FamilyOf(hp));
  std::visit(Overloaded{
                 [&](const NaiveBayesParams& p) {
                   j["laplace_alpha"] = p.laplace_alpha;
                 },
                 [&](const LdaParams& p) { j["ridge"] = p.ridge; },
                 [&](const SvmParams& p) {
                   j["cost"] = p.cost;
                   j["gamma"] = p.gamma;
                   j["smo_tolerance"] = p.tolerance;
                   j["max_passes"] = p.max_passes;
                 },
                 [&](const TreeParams& p) { j.update(TreeParamsToJson(p)); },
                 [&](const TreeBagParams& p) {
                   j["n_trees"] = p.n_trees;
                   j.update(TreeParamsToJson(p.tree));
                 },
                 [&](const ForestParams& p) {
                   j["n_trees"] = p.n_trees;
                   j["mtry"] = p.mtry;
                   j.update(TreeParamsToJson(p.tree));
                 },
             },
             hp);
  return j;
}

Hyperparameters HyperparametersFromJson(const nlohmann::json& j,
                                        std::size_t num_features) {
  Hyperparameters hp;
  try {
    switch (ParseFamily(j.at("family").get<std::string>())) {
      case ModelFamily::kNaiveBayes:
        hp = NaiveBayesParams{j.value("laplace_alpha", 1.0)};
        break;
      case ModelFamily::kLda:
        hp = LdaParams{j.value("ridge", 1e-6)};
        break;
      case ModelFamily::kSvmRbf: {
        SvmParams p;
        p.cost = j.value("cost", p.cost);
        p.gamma = j.value("gamma", p.gamma);
        p.tolerance = j.value("smo_tolerance", p.tolerance);
        p.max_passes = j.value("max_passes", p.max_passes);
        hp = p;
        break;
      }
      case ModelFamily::kTree:
        hp = TreeParamsFromJson(j);
        break;
      case ModelFamily::kTreeBag:
        hp = TreeBagParams{j.value("n_trees", 100), TreeParamsFromJson(j)};
        break;
      case ModelFamily::kRandomForest: {
        ForestParams p;
        p.n_trees = j.value("n_trees", 100);
        p.mtry = j.contains("mtry") ? ResolveMtry(j.at("mtry"), num_features)
                                    : ResolveMtry("sqrt", num_features);
        p.tree = TreeParamsFromJson(j);
        hp = p;
        break;
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed hyperparameters: ") + e.what());
  }
  ValidateHyperparameters(hp, num_features);
  return hp;
}

std::string DescribeHyperparameters(const Hyperparameters& hp) {
  char buf[160];
  return std::visit(
      Overloaded{
          [&](const NaiveBayesParams& p) {
            std::snprintf(buf, sizeof(buf), "laplace_alpha=%g",
                          p.laplace_alpha);
            return std::string(buf);
          },
          [&](const LdaParams& p) {
            std::snprintf(buf, sizeof(buf), "ridge=%g", p.ridge);
            return std::string(buf);
          },
          [&](const SvmParams& p) {
            std::snprintf(buf, sizeof(buf), "C=%g, gamma=%g", p.cost,
                          p.gamma);
            return std::string(buf);
          },
          [&](const TreeParams& p) { return TreeSuffix(p).substr(2); },
          [&](const TreeBagParams& p) {
            return "n_trees=" + std::to_string(p.n_trees) + TreeSuffix(p.tree);
          },
          [&](const ForestParams& p) {
            return "n_trees=" + std::to_string(p.n_trees) +
                   ", mtry=" + std::to_string(p.mtry) + TreeSuffix(p.tree);
          },
      },
      hp);
}

std::vector<Hyperparameters> DefaultGrid(ModelFamily family,
                                         std::size_t num_features) {
  std::vector<Hyperparameters> grid;
  switch (family) {
    case ModelFamily::kNaiveBayes:
      grid.push_back(NaiveBayesParams{});
      break;
    case ModelFamily::kLda:
      grid.push_back(LdaParams{});
      break;
    case ModelFamily::kSvmRbf:
      for (double cost : {0.1, 1.0, 10.0}) {
        for (double gamma : {0.01, 0.1, 1.0}) {
          SvmParams p;
          p.cost = cost;
          p.gamma = gamma;
          grid.push_back(p);
        }
      }
      break;
    case ModelFamily::kTree:
      for (std::optional<int> depth :
           {std::optional<int>(4), std::optional<int>(8),
            std::optional<int>()}) {
        grid.push_back(TreeParams{depth, 1});
      }
      break;
    case ModelFamily::kTreeBag:
      grid.push_back(TreeBagParams{});
      break;
    case ModelFamily::kRandomForest: {
      std::vector<int> mtries;
      for (const char* rule : {"sqrt", "third", "all"}) {
        const int m = ResolveMtry(rule, num_features);
        if (std::find(mtries.begin(), mtries.end(), m) == mtries.end()) {
          mtries.push_back(m);
        }
      }
      for (int m : mtries) {
        for (int n_trees : {100, 300}) {
          ForestParams p;
          p.n_trees = n_trees;
          p.mtry = m;
          grid.push_back(p);
        }
      }
      break;
    }
  }
  return grid;
}

Threshold::Threshold(double value) : value_(value) {
  if (!(value > 0.0 && value < 1.0)) {
    throw ConfigError("threshold must lie strictly inside (0, 1)");
  }
}

std::vector<std::string> TrainedModel::FeatureNames() const {
  std::vector<std::string> names;
  for (const auto& spec : features) names.push_back(spec.name);
  return names;
}

std::string SchemaFingerprint(const std::vector<FeatureSpec>& features) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (const auto& spec : features) {
    hash = Fnv1a(hash, spec.name);
    hash = Fnv1a(hash, FeatureKindName(spec.kind));
    for (const auto& level : spec.levels) hash = Fnv1a(hash, level);
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(hash));
  return buf;
}

TrainedModel Fit(const WeightedDataset& data, const Hyperparameters& hp,
                 const std::vector<std::string>& selected, std::uint64_t seed,
                 Threshold threshold) {
  const Dataset& ds = data.dataset;
  if (selected.empty()) throw ConfigError("no features selected");
  if (data.weights.size() != ds.size()) {
    throw ConfigError("weights do not match row count");
  }
  for (double w : data.weights) {
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw ConfigError("weights must be positive and finite");
    }
  }
  if (ds.Count(Label::kUnknown) > 0) {
    throw DataError("training data contains Unknown labels");
  }
  if (ds.Count(Label::kActive) == 0 || ds.Count(Label::kTerminated) == 0) {
    throw DataError("training data must contain both classes");
  }
  ValidateHyperparameters(hp, selected.size());

  TrainedModel model{hp, SelectSpecs(ds.schema(), selected), {}, threshold,
                     {}, true};
  model.fingerprint = SchemaFingerprint(model.features);
  // Rows are visited in id order so that the fit does not depend on how the
  // training set happens to be ordered.
  std::vector<std::size_t> order(ds.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return ds.row(a).id < ds.row(b).id;
  });
  const Dataset sorted = ds.Subset(order);
  std::vector<double> sorted_weights(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    sorted_weights[i] = data.weights[order[i]];
  }
  const FeatureMatrix matrix = ExtractFeatures(sorted, model.features);
  const std::vector<int> targets = BinaryTargets(sorted);
  const std::span<const double> weights = sorted_weights;

  std::visit(
      Overloaded{
          [&](const NaiveBayesParams& p) {
            model.state = FitNaiveBayes(matrix, targets, weights, p);
          },
          [&](const LdaParams& p) {
            model.state = FitLda(matrix, targets, weights, p);
          },
          [&](const SvmParams& p) {
            SvmState state = FitSvm(matrix, targets, weights, p);
            model.converged = state.converged;
            model.state = std::move(state);
          },
          [&](const TreeParams& p) {
            std::vector<std::size_t> rows(matrix.rows);
            for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
            model.state = FitTree(matrix, targets, weights, rows, p);
          },
          [&](const TreeBagParams& p) {
            model.state = FitForest(matrix, targets, weights, p.n_trees,
                                    matrix.cols(), p.tree, seed);
          },
          [&](const ForestParams& p) {
            model.state =
                FitForest(matrix, targets, weights, p.n_trees,
                          static_cast<std::size_t>(p.mtry), p.tree, seed);
          },
      },
      hp);
  return model;
}

void CheckCompatible(const TrainedModel& model, const Schema& schema) {
  for (const auto& spec : model.features) {
    const auto index = schema.IndexOf(spec.name);
    if (!index) {
      throw FingerprintMismatch("dataset lacks model feature \"" + spec.name +
                                "\"");
    }
    const FeatureSpec& other = schema.feature(*index);
    if (other.kind != spec.kind || other.levels != spec.levels) {
      throw FingerprintMismatch("feature \"" + spec.name +
                                "\" differs from the model's definition");
    }
  }
}

double PredictRow(const TrainedModel& model, std::span<const double> row) {
  return std::visit(
      Overloaded{
          [&](const NaiveBayesState& s) {
            return NaiveBayesPosteriors(s, row)[1];
          },
          [&](const LdaState& s) { return LdaPosteriors(s, row)[1]; },
          [&](const SvmState& s) { return SvmProbability(s, row); },
          [&](const DecisionTree& s) { return s.Probability(row); },
          [&](const ForestState& s) { return ForestProbability(s, row); },
      },
      model.state);
}

std::vector<double> PredictProba(const TrainedModel& model,
                                 const FeatureMatrix& matrix) {
  std::vector<double> out(matrix.rows);
  for (std::size_t r = 0; r < matrix.rows; ++r) {
    out[r] = PredictRow(model, matrix.Row(r));
  }
  return out;
}

std::vector<double> PredictProba(const TrainedModel& model,
                                 const Dataset& dataset) {
  CheckCompatible(model, dataset.schema());
  return PredictProba(model, ExtractFeatures(dataset, model.features));
}

std::vector<std::array<double, 2>> PredictPosteriors(const TrainedModel& model,
                                                     const Dataset& dataset) {
  CheckCompatible(model, dataset.schema());
  const FeatureMatrix matrix = ExtractFeatures(dataset, model.features);
  std::vector<std::array<double, 2>> out(matrix.rows);
  for (std::size_t r = 0; r < matrix.rows; ++r) {
    if (const auto* nb = std::get_if<NaiveBayesState>(&model.state)) {
      out[r] = NaiveBayesPosteriors(*nb, matrix.Row(r));
    } else if (const auto* lda = std::get_if<LdaState>(&model.state)) {
      out[r] = LdaPosteriors(*lda, matrix.Row(r));
    } else {
      throw ConfigError("posteriors are available for NaiveBayes and LDA only");
    }
  }
  return out;
}

std::vector<Label> Classify(std::span<const double> probabilities,
                            Threshold threshold) {
  std::vector<Label> out;
  out.reserve(probabilities.size());
  for (double p : probabilities) {
    out.push_back(p >= threshold.value() ? Label::kTerminated
                                         : Label::kActive);
  }
  return out;
}

std::vector<Label> PredictClass(const TrainedModel& model,
                                const Dataset& dataset) {
  return Classify(PredictProba(model, dataset), model.threshold);
}

nlohmann::json ModelToJson(const TrainedModel& model) {
  nlohmann::json features = nlohmann::json::array();
  for (const auto& spec : model.features) {
    nlohmann::json f = {{"name", spec.name},
                        {"kind", FeatureKindName(spec.kind)}};
    if (spec.IsDiscrete()) f["levels"] = spec.levels;
    features.push_back(std::move(f));
  }
  nlohmann::json state = std::visit(
      Overloaded{
          [](const NaiveBayesState& s) { return NaiveBayesToJson(s); },
          [](const LdaState& s) { return LdaToJson(s); },
          [](const SvmState& s) { return SvmToJson(s); },
          [](const DecisionTree& s) { return TreeToJson(s); },
          [](const ForestState& s) {
            nlohmann::json trees = nlohmann::json::array();
            for (const auto& tree : s.trees) trees.push_back(TreeToJson(tree));
            return trees;
          },
      },
      model.state);
  return {{"schema_version", kModelSchemaVersion},
          {"family", FamilyName(model.family())},
          {"hyperparameters", HyperparametersToJson(model.hyperparameters)},
          {"features", std::move(features)},
          {"schema_fingerprint", model.fingerprint},
          {"threshold", model.threshold.value()},
          {"class_labels", {"Active", "Terminated"}},
          {"converged", model.converged},
          {"state", std::move(state)}};
}

TrainedModel ModelFromJson(const nlohmann::json& json) {
  try {
    if (json.at("schema_version").get<int>() != kModelSchemaVersion) {
      throw ConfigError("unsupported model schema_version");
    }
    TrainedModel model{{}, {}, {}, Threshold(json.at("threshold").get<double>()),
                       {}, json.value("converged", true)};
    for (const auto& f : json.at("features")) {
      FeatureSpec spec;
      spec.name = f.at("name").get<std::string>();
      spec.kind = ParseFeatureKind(f.at("kind").get<std::string>());
      if (f.contains("levels")) {
        spec.levels = f.at("levels").get<std::vector<std::string>>();
      }
      model.features.push_back(std::move(spec));
    }
    model.hyperparameters =
        HyperparametersFromJson(json.at("hyperparameters"), model.features.size());
    model.fingerprint = json.at("schema_fingerprint").get<std::string>();
    if (model.fingerprint != SchemaFingerprint(model.features)) {
      throw FingerprintMismatch(
          "stored fingerprint does not match the stored feature list");
    }
    const auto& state = json.at("state");
    switch (model.family()) {
      case ModelFamily::kNaiveBayes:
        model.state = NaiveBayesFromJson(state);
        break;
      case ModelFamily::kLda:
        model.state = LdaFromJson(state);
        break;
      case ModelFamily::kSvmRbf:
        model.state = SvmFromJson(state);
        break;
      case ModelFamily::kTree:
        model.state = TreeFromJson(state);
        break;
      case ModelFamily::kTreeBag:
      case ModelFamily::kRandomForest: {
        ForestState forest;
        for (const auto& tree : state) forest.trees.push_back(TreeFromJson(tree));
        model.state = std::move(forest);
        break;
      }
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed model document: ") + e.what());
  }
}

}  // namespace turnover
