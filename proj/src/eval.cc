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

#include "turnover/eval.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "turnover/design.h"
#include "turnover/error.h"
#include "turnover/parallel.h"
#include "turnover/random.h"

namespace turnover {
namespace {

constexpr int kReportSchemaVersion = 1;

nlohmann::json OptionalJson(const std::optional<double>& value) {
  return value ? nlohmann::json(*value) : nlohmann::json(nullptr);
}

std::optional<double> Ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

std::string FormatOptional(const std::optional<double>& value) {
  if (!value) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", *value);
  return buf;
}

std::optional<double> MeanOf(const std::vector<FoldMetrics>& folds,
                             std::optional<double> ConfusionMetrics::*field) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& fold : folds) {
    if (const auto& v = fold.confusion.*field) {
      sum += *v;
      ++count;
    }
  }
  if (count == 0) return std::nullopt;
  return sum / static_cast<double>(count);
}

std::size_t TreeCount(const Hyperparameters& hp) {
  if (const auto* p = std::get_if<TreeBagParams>(&hp)) return p->n_trees;
  if (const auto* p = std::get_if<ForestParams>(&hp)) return p->n_trees;
  return 0;
}

// Larger means more regularized; only compared within one family.
double Regularization(const Hyperparameters& hp) {
  if (const auto* p = std::get_if<NaiveBayesParams>(&hp)) {
    return p->laplace_alpha;
  }
  if (const auto* p = std::get_if<LdaParams>(&hp)) return p->ridge;
  if (const auto* p = std::get_if<SvmParams>(&hp)) return -p->cost;
  const TreeParams* tree = std::get_if<TreeParams>(&hp);
  if (const auto* p = std::get_if<TreeBagParams>(&hp)) tree = &p->tree;
  if (const auto* p = std::get_if<ForestParams>(&hp)) tree = &p->tree;
  if (tree == nullptr) return 0.0;
  const double depth = tree->max_depth ? *tree->max_depth : HUGE_VAL;
  return -depth;
}

// True when cell `a` should be preferred over cell `b` at equal mean AUC.
bool Simpler(const CvCell& a, const CvCell& b) {
  const auto& ha = a.config.hyperparameters;
  const auto& hb = b.config.hyperparameters;
  if (TreeCount(ha) != TreeCount(hb)) return TreeCount(ha) < TreeCount(hb);
  if (ha.index() == hb.index() && Regularization(ha) != Regularization(hb)) {
    return Regularization(ha) > Regularization(hb);
  }
  return false;
}

std::vector<Label> SubsetLabels(const Dataset& ds, const Fold& rows) {
  std::vector<Label> labels;
  labels.reserve(rows.size());
  for (std::size_t r : rows) labels.push_back(ds.row(r).label);
  return labels;
}

}  // namespace

std::vector<Fold> StratifiedKFold(std::span<const Label> labels, int k,
                                  std::uint64_t seed) {
  if (k < 2) throw ConfigError("k must be >= 2");
  std::vector<std::vector<std::size_t>> by_class(2);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == Label::kUnknown) {
      throw DataError("cannot stratify Unknown labels", i + 1);
    }
    by_class[labels[i] == Label::kTerminated ? 1 : 0].push_back(i);
  }
  for (std::size_t c = 0; c < 2; ++c) {
    if (by_class[c].size() < static_cast<std::size_t>(k)) {
      throw DataError("class " + std::string(LabelName(c ? Label::kTerminated
                                                         : Label::kActive)) +
                      " has fewer than k=" + std::to_string(k) + " rows");
    }
  }
  std::vector<Fold> folds(static_cast<std::size_t>(k));
  Rng rng(seed);
  std::size_t next = 0;
  for (auto& rows : by_class) {
    rng.Shuffle(rows);
    for (std::size_t r : rows) {
      folds[next].push_back(r);
      next = (next + 1) % folds.size();
    }
  }
  for (auto& fold : folds) std::sort(fold.begin(), fold.end());
  return folds;
}

std::vector<Fold> StratifiedKFold(const Dataset& dataset, int k,
                                  std::uint64_t seed) {
  const auto labels = dataset.Labels();
  return StratifiedKFold(labels, k, seed);
}

RocCurve RocAuc(std::span<const double> scores,
                std::span<const Label> labels) {
  if (scores.size() != labels.size()) {
    throw ConfigError("scores and labels differ in length");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::uint64_t positives = 0, negatives = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (std::isnan(scores[i])) throw DataError("score is NaN", i + 1);
    if (labels[i] == Label::kUnknown) {
      throw DataError("ROC requires known labels", i + 1);
    }
    (labels[i] == Label::kTerminated ? positives : negatives) += 1;
  }
  if (positives == 0 || negatives == 0) {
    throw DataError("ROC requires both classes");
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });

  RocCurve curve;
  curve.points.emplace_back(0.0, 0.0);
  // Twice the number of (positive, negative) pairs ranked correctly, with
  // tied pairs counting once.
  std::uint64_t twice_concordant = 0;
  std::uint64_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::uint64_t group_tp = 0, group_fp = 0;
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] == Label::kTerminated ? group_tp : group_fp) += 1;
      ++j;
    }
    twice_concordant += group_fp * (2 * tp + group_tp);
    tp += group_tp;
    fp += group_fp;
    curve.points.emplace_back(
        static_cast<double>(fp) / static_cast<double>(negatives),
        static_cast<double>(tp) / static_cast<double>(positives));
    i = j;
  }
  curve.auc = static_cast<double>(twice_concordant) /
              (2.0 * static_cast<double>(positives) *
               static_cast<double>(negatives));
  return curve;
}

ConfusionMetrics ComputeConfusion(std::span<const Label> predicted,
                                  std::span<const Label> actual) {
  if (predicted.size() != actual.size()) {
    throw ConfigError("predicted and actual labels differ in length");
  }
  ConfusionMetrics m;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    if (actual[i] == Label::kUnknown || predicted[i] == Label::kUnknown) {
      throw DataError("confusion metrics require known labels", i + 1);
    }
    const bool flagged = predicted[i] == Label::kTerminated;
    if (actual[i] == Label::kTerminated) {
      ++(flagged ? m.tp : m.fn);
    } else {
      ++(flagged ? m.fp : m.tn);
    }
  }
  m.flag_precision = Ratio(m.tp, m.tp + m.fp);
  m.stayer_selectivity = Ratio(m.tn, m.tn + m.fp);
  m.sensitivity = Ratio(m.tp, m.tp + m.fn);
  m.specificity = Ratio(m.tn, m.tn + m.fp);
  return m;
}

std::optional<double> CvCell::MeanFlagPrecision() const {
  return MeanOf(folds, &ConfusionMetrics::flag_precision);
}

std::optional<double> CvCell::MeanStayerSelectivity() const {
  return MeanOf(folds, &ConfusionMetrics::stayer_selectivity);
}

const CvConfig& CvReport::BestConfig() const {
  if (!best) throw Error("no grid cell trained successfully");
  return cells[*best].config;
}

std::vector<Fold> HoldoutFolds(const Dataset& train,
                               const GridSearchOptions& options) {
  if (!options.holdout_fraction) {
    return StratifiedKFold(train, options.k, options.seed);
  }
  const double fraction = *options.holdout_fraction;
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw ConfigError("holdout_fraction must lie in (0, 1)");
  }
  if (options.k < 1) throw ConfigError("k must be >= 1");
  std::vector<std::vector<std::size_t>> by_class(2);
  for (std::size_t i = 0; i < train.size(); ++i) {
    by_class[train.row(i).label == Label::kTerminated ? 1 : 0].push_back(i);
  }
  std::vector<Fold> folds;
  for (int f = 0; f < options.k; ++f) {
    Rng rng(DeriveSeed(options.seed, static_cast<std::uint64_t>(f)));
    Fold holdout;
    for (auto rows : by_class) {
      rng.Shuffle(rows);
      const auto take = static_cast<std::size_t>(
          std::llround(fraction * static_cast<double>(rows.size())));
      if (take == 0 || take == rows.size()) {
        throw DataError("holdout_fraction leaves a class empty on one side");
      }
      holdout.insert(holdout.end(), rows.begin(), rows.begin() + take);
    }
    std::sort(holdout.begin(), holdout.end());
    folds.push_back(std::move(holdout));
  }
  return folds;
}

WeightedDataset BuildFoldTraining(const Dataset& train, const Fold& holdout,
                                  const ResamplingMethod& method) {
  std::vector<bool> held(train.size(), false);
  for (std::size_t r : holdout) held.at(r) = true;
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < train.size(); ++r) {
    if (!held[r]) rows.push_back(r);
  }
  return Rebalance(train.Subset(rows), method);
}

CvReport GridSearch(const Dataset& train,
                    const std::vector<std::string>& selected,
                    const std::vector<Hyperparameters>& configs,
                    const std::vector<ResamplingMethod>& methods,
                    const GridSearchOptions& options) {
  if (configs.empty() || methods.empty()) {
    throw ConfigError("grid search needs at least one config and method");
  }
  for (const auto& hp : configs) ValidateHyperparameters(hp, selected.size());
  for (const auto& m : methods) m.Validate();
  if (train.Count(Label::kUnknown) > 0) {
    throw DataError("training data contains Unknown labels");
  }

  CvReport report;
  report.k = options.k;
  report.seed = options.seed;
  report.holdout_fraction = options.holdout_fraction;
  const std::vector<Fold> folds = HoldoutFolds(train, options);
  const FeatureMatrix all = ExtractFeatures(train, SelectSpecs(train.schema(), selected));

  // Resampled training sets depend only on (fold, method), so they are
  // shared across hyperparameter points.
  const std::size_t num_folds = folds.size();
  std::vector<WeightedDataset> training(num_folds * methods.size());
  std::vector<std::string> training_error(training.size());
  ParallelFor(training.size(), [&](std::size_t t) {
    const std::size_t f = t / methods.size(), m = t % methods.size();
    const std::uint64_t seed =
        DeriveSeed(DeriveSeed(options.seed, 1000 + f), m);
    try {
      training[t] = BuildFoldTraining(train, folds[f], methods[m].WithSeed(seed));
    } catch (const std::exception& e) {
      training_error[t] = e.what();
    }
  });

  report.cells.resize(configs.size() * methods.size());
  std::vector<FoldMetrics> metrics(report.cells.size() * num_folds);
  std::vector<std::string> errors(metrics.size());
  ParallelFor(metrics.size(), [&](std::size_t job) {
    const std::size_t cell = job / num_folds, f = job % num_folds;
    const std::size_t c = cell / methods.size(), m = cell % methods.size();
    const std::size_t t = f * methods.size() + m;
    if (!training_error[t].empty()) {
      errors[job] = training_error[t];
      return;
    }
    try {
      const TrainedModel model =
          Fit(training[t], configs[c], selected,
              DeriveSeed(DeriveSeed(options.seed, 2000 + f), c),
              options.threshold);
      std::vector<double> scores;
      scores.reserve(folds[f].size());
      for (std::size_t r : folds[f]) {
        scores.push_back(PredictRow(model, all.Row(r)));
      }
      const auto actual = SubsetLabels(train, folds[f]);
      const auto predicted = Classify(scores, options.threshold);
      metrics[job] = {static_cast<int>(f), RocAuc(scores, actual).auc,
                      ComputeConfusion(predicted, actual)};
    } catch (const std::exception& e) {
      errors[job] = e.what();
    }
  });

  for (std::size_t cell = 0; cell < report.cells.size(); ++cell) {
    CvCell& out = report.cells[cell];
    out.config = {configs[cell / methods.size()],
                  methods[cell % methods.size()]};
    for (std::size_t f = 0; f < num_folds; ++f) {
      const std::size_t job = cell * num_folds + f;
      if (!errors[job].empty()) {
        out.error = "fold " + std::to_string(f) + ": " + errors[job];
        break;
      }
      out.folds.push_back(metrics[job]);
    }
    if (!out.ok()) {
      out.folds.clear();
      continue;
    }
    double sum = 0.0;
    for (const auto& fm : out.folds) sum += fm.auc;
    out.mean_auc = sum / static_cast<double>(num_folds);
    double ss = 0.0;
    for (const auto& fm : out.folds) {
      ss += (fm.auc - out.mean_auc) * (fm.auc - out.mean_auc);
    }
    out.sd_auc =
        num_folds > 1 ? std::sqrt(ss / static_cast<double>(num_folds - 1))
                      : 0.0;
    if (!report.best) {
      report.best = cell;
      continue;
    }
    const CvCell& incumbent = report.cells[*report.best];
    if (out.mean_auc > incumbent.mean_auc ||
        (out.mean_auc == incumbent.mean_auc && Simpler(out, incumbent))) {
      report.best = cell;
    }
  }
  return report;
}

ImportanceReport PermutationImportance(const TrainedModel& model,
                                       const Dataset& dataset,
                                       int repetitions, std::uint64_t seed) {
  if (repetitions < 1) throw ConfigError("repetitions must be >= 1");
  CheckCompatible(model, dataset.schema());
  const auto labels = dataset.Labels();
  const FeatureMatrix matrix = ExtractFeatures(dataset, model.features);
  ImportanceReport report;
  report.repetitions = repetitions;
  report.baseline_auc = RocAuc(PredictProba(model, matrix), labels).auc;
  report.features.resize(matrix.cols());

  ParallelFor(matrix.cols(), [&](std::size_t f) {
    Rng rng(DeriveSeed(seed, f));
    FeatureMatrix permuted = matrix;
    std::vector<double> column(matrix.rows);
    std::vector<double> drops;
    for (int rep = 0; rep < repetitions; ++rep) {
      for (std::size_t r = 0; r < matrix.rows; ++r) column[r] = matrix.at(r, f);
      rng.Shuffle(column);
      for (std::size_t r = 0; r < matrix.rows; ++r) {
        permuted.values[r * matrix.cols() + f] = column[r];
      }
      drops.push_back(report.baseline_auc -
                      RocAuc(PredictProba(model, permuted), labels).auc);
    }
    const double mean =
        std::accumulate(drops.begin(), drops.end(), 0.0) / drops.size();
    double ss = 0.0;
    for (double d : drops) ss += (d - mean) * (d - mean);
    const double n = static_cast<double>(drops.size());
    report.features[f] = {matrix.specs[f].name, mean,
                          n > 1 ? std::sqrt(ss / (n - 1) / n) : 0.0};
  });
  std::sort(report.features.begin(), report.features.end(),
            [](const FeatureImportance& a, const FeatureImportance& b) {
              if (a.mean_drop != b.mean_drop) return a.mean_drop > b.mean_drop;
              return a.feature < b.feature;
            });
  return report;
}

nlohmann::json CvConfigToJson(const CvConfig& config) {
  return {{"hyperparameters", HyperparametersToJson(config.hyperparameters)},
          {"resampling", ResamplingToJson(config.resampling)}};
}

nlohmann::json ConfusionToJson(const ConfusionMetrics& m) {
  return {{"tp", m.tp},
          {"fp", m.fp},
          {"tn", m.tn},
          {"fn", m.fn},
          {"flag_precision", OptionalJson(m.flag_precision)},
          {"stayer_selectivity", OptionalJson(m.stayer_selectivity)},
          {"standard_sensitivity", OptionalJson(m.sensitivity)},
          {"standard_specificity", OptionalJson(m.specificity)}};
}

nlohmann::json CvReportToJson(const CvReport& report) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& cell : report.cells) {
    nlohmann::json c = CvConfigToJson(cell.config);
    if (!cell.ok()) {
      c["error"] = cell.error;
      cells.push_back(std::move(c));
      continue;
    }
    c["mean_auc"] = cell.mean_auc;
    c["sd_auc"] = cell.sd_auc;
    c["mean_flag_precision"] = OptionalJson(cell.MeanFlagPrecision());
    c["mean_stayer_selectivity"] = OptionalJson(cell.MeanStayerSelectivity());
    nlohmann::json folds = nlohmann::json::array();
    for (const auto& fold : cell.folds) {
      nlohmann::json f = ConfusionToJson(fold.confusion);
      f["fold"] = fold.fold;
      f["auc"] = fold.auc;
      folds.push_back(std::move(f));
    }
    c["folds"] = std::move(folds);
    cells.push_back(std::move(c));
  }
  nlohmann::json j = {{"schema_version", kReportSchemaVersion},
                      {"selection_metric", "mean_auc"},
                      {"k", report.k},
                      {"seed", report.seed},
                      {"holdout_fraction",
                       OptionalJson(report.holdout_fraction)},
                      {"cells", std::move(cells)}};
  j["best"] = report.best ? nlohmann::json(*report.best) : nlohmann::json();
  if (report.best) j["best_config"] = CvConfigToJson(report.BestConfig());
  return j;
}

std::string CvReportTable(const CvReport& report) {
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-10s %-13s %-40s %6s %6s %6s %6s\n",
                "Sampling", "Algorithm", "Hyperparameters", "ROC", "ROCsd",
                "Prec.", "Sel.");
  out << buf;
  for (std::size_t i = 0; i < report.cells.size(); ++i) {
    const CvCell& cell = report.cells[i];
    const std::string family(
        FamilyName(FamilyOf(cell.config.hyperparameters)));
    const std::string hp = DescribeHyperparameters(cell.config.hyperparameters);
    if (!cell.ok()) {
      std::snprintf(buf, sizeof(buf), "%-10s %-13s %-40s failed: %s\n",
                    cell.config.resampling.Name().c_str(), family.c_str(),
                    hp.c_str(), cell.error.c_str());
    } else {
      std::snprintf(buf, sizeof(buf), "%-10s %-13s %-40s %6.3f %6.3f %6s %6s%s\n",
                    cell.config.resampling.Name().c_str(), family.c_str(),
                    hp.c_str(), cell.mean_auc, cell.sd_auc,
                    FormatOptional(cell.MeanFlagPrecision()).c_str(),
                    FormatOptional(cell.MeanStayerSelectivity()).c_str(),
                    report.best == i ? "  *" : "");
    }
    out << buf;
  }
  return out.str();
}

nlohmann::json ImportanceToJson(const ImportanceReport& report) {
  nlohmann::json features = nlohmann::json::array();
  for (const auto& f : report.features) {
    features.push_back({{"feature", f.feature},
                        {"mean_auc_drop", f.mean_drop},
                        {"std_error", f.std_error}});
  }
  return {{"schema_version", kReportSchemaVersion},
          {"baseline_auc", report.baseline_auc},
          {"repetitions", report.repetitions},
          {"features", std::move(features)}};
}

ImportanceReport ImportanceFromJson(const nlohmann::json& json) {
  ImportanceReport report;
  report.baseline_auc = json.at("baseline_auc").get<double>();
  report.repetitions = json.at("repetitions").get<int>();
  for (const auto& f : json.at("features")) {
    report.features.push_back({f.at("feature").get<std::string>(),
                               f.at("mean_auc_drop").get<double>(),
                               f.at("std_error").get<double>()});
  }
  return report;
}

std::string ImportanceTable(const ImportanceReport& report) {
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "baseline AUC %.4f, %d repetition(s)\n",
                report.baseline_auc, report.repetitions);
  out << buf;
  std::snprintf(buf, sizeof(buf), "%-34s %10s %10s\n", "Feature", "AUC drop",
                "std err");
  out << buf;
  for (const auto& f : report.features) {
    std::snprintf(buf, sizeof(buf), "%-34s %10.4f %10.4f\n", f.feature.c_str(),
                  f.mean_drop, f.std_error);
    out << buf;
  }
  return out.str();
}

std::string RocToTsv(const RocCurve& curve) {
  std::ostringstream out;
  out << "fpr\ttpr\n";
  for (const auto& [fpr, tpr] : curve.points) {
    out << FormatNumber(fpr) << '\t' << FormatNumber(tpr) << '\n';
  }
  return out.str();
}

}  // namespace turnover
