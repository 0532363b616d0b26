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

#include "turnover/balance.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <gtest/gtest.h>

#include "test_util.h"
#include "turnover/error.h"
#include "turnover/random.h"

namespace turnover {
namespace {

using ::turnover::testing::MakeRow;

Schema MixedSchema() {
  return Schema({FeatureSpec::Numeric("a"), FeatureSpec::Numeric("b"),
                 FeatureSpec::Categorical("c", {"x", "y", "z"})},
                "status");
}

Dataset Imbalanced(std::size_t active, std::size_t terminated,
                   std::uint64_t seed) {
  Rng rng(seed);
  std::vector<EmployeeRecord> rows;
  for (std::size_t i = 0; i < active + terminated; ++i) {
    const bool leaver = i >= active;
    rows.push_back(MakeRow(
        "e" + std::to_string(i),
        {rng.Normal() + (leaver ? 1.0 : 0.0), 10.0 * rng.Uniform(),
         double(rng.Index(3))},
        leaver ? Label::kTerminated : Label::kActive));
  }
  return Dataset(MixedSchema(), rows);
}

std::size_t CountLabel(const WeightedDataset& w, Label label) {
  return w.dataset.Count(label);
}

TEST(RebalanceTest, DownMatchesMinority) {
  const WeightedDataset out =
      Rebalance(Imbalanced(800, 200, 1), ResamplingMethod::Down().WithSeed(3));
  EXPECT_EQ(CountLabel(out, Label::kActive), 200u);
  EXPECT_EQ(CountLabel(out, Label::kTerminated), 200u);
}

TEST(RebalanceTest, UpCopiesMinorityRows) {
  const Dataset in = Imbalanced(800, 200, 2);
  const WeightedDataset out =
      Rebalance(in, ResamplingMethod::Up().WithSeed(3));
  EXPECT_EQ(CountLabel(out, Label::kActive), 800u);
  EXPECT_EQ(CountLabel(out, Label::kTerminated), 800u);
  std::set<std::vector<double>> minority;
  for (const auto& r : in.rows()) {
    if (r.label == Label::kTerminated) minority.insert(r.values);
  }
  for (std::size_t i = 0; i < out.dataset.size(); ++i) {
    const auto& r = out.dataset.row(i);
    if (r.label != Label::kTerminated) continue;
    EXPECT_TRUE(minority.contains(r.values));
    const auto source = in.FindId(out.provenance[i]);
    ASSERT_TRUE(source.has_value());
    EXPECT_EQ(in.row(*source).values, r.values);
  }
}

TEST(RebalanceTest, WeightsAreInverseFrequency) {
  const WeightedDataset out =
      Rebalance(Imbalanced(800, 200, 3), ResamplingMethod::Weights());
  ASSERT_EQ(out.dataset.size(), 1000u);
  double total = 0.0;
  for (std::size_t i = 0; i < out.dataset.size(); ++i) {
    const double expected =
        out.dataset.row(i).label == Label::kActive ? 0.625 : 2.5;
    EXPECT_DOUBLE_EQ(out.weights[i], expected);
    total += out.weights[i];
  }
  EXPECT_DOUBLE_EQ(total / 1000.0, 1.0);
}

TEST(RebalanceTest, NoneIsIdentity) {
  const Dataset in = Imbalanced(30, 10, 4);
  const WeightedDataset out = Rebalance(in, ResamplingMethod::None());
  EXPECT_EQ(out.dataset, in);
  EXPECT_EQ(out.weights, std::vector<double>(40, 1.0));
}

TEST(RebalanceTest, SmoteBalancesClasses) {
  const WeightedDataset out =
      Rebalance(Imbalanced(300, 60, 5), ResamplingMethod::Smote(5).WithSeed(1));
  EXPECT_EQ(CountLabel(out, Label::kActive), 300u);
  EXPECT_EQ(CountLabel(out, Label::kTerminated), 300u);
}

TEST(RebalanceTest, SmoteNeedsMoreThanKMinorityRows) {
  EXPECT_THROW(Rebalance(Imbalanced(30, 5, 6), ResamplingMethod::Smote(5)),
               ConfigError);
}

TEST(RebalanceTest, RoseKeepsSizeLevelsAndFiniteness) {
  const Dataset in = Imbalanced(301, 60, 7);
  const WeightedDataset out =
      Rebalance(in, ResamplingMethod::Rose().WithSeed(2));
  ASSERT_EQ(out.dataset.size(), in.size());
  EXPECT_EQ(CountLabel(out, Label::kTerminated), in.size() / 2);
  for (const auto& r : out.dataset.rows()) {
    EXPECT_TRUE(std::isfinite(r.values[0]));
    EXPECT_TRUE(std::isfinite(r.values[1]));
    EXPECT_LT(r.values[2], 3.0);
  }
  // Discrete values come from the seed row of the same class.
  for (std::size_t i = 0; i < out.dataset.size(); ++i) {
    const auto& source = in.row(*in.FindId(out.provenance[i]));
    EXPECT_EQ(source.values[2], out.dataset.row(i).values[2]);
    EXPECT_EQ(source.label, out.dataset.row(i).label);
  }
}

TEST(RebalanceTest, RejectsSingleClassAndUnknownLabels) {
  Dataset one(MixedSchema(), {MakeRow("a", {0, 0, 0}, Label::kActive),
                              MakeRow("b", {1, 1, 1}, Label::kActive)});
  EXPECT_THROW(Rebalance(one, ResamplingMethod::Down()), DataError);
  Dataset unknown(MixedSchema(), {MakeRow("a", {0, 0, 0}, Label::kActive),
                                  MakeRow("b", {1, 1, 1}, Label::kUnknown)});
  EXPECT_THROW(Rebalance(unknown, ResamplingMethod::None()), DataError);
}

TEST(RebalanceProperty, DeterministicPerSeed) {
  const Dataset in = Imbalanced(120, 30, 8);
  for (const auto& method :
       {ResamplingMethod::Down(), ResamplingMethod::Up(),
        ResamplingMethod::Weights(), ResamplingMethod::Smote(),
        ResamplingMethod::Rose()}) {
    const WeightedDataset a = Rebalance(in, method.WithSeed(42));
    const WeightedDataset b = Rebalance(in, method.WithSeed(42));
    EXPECT_EQ(a.dataset, b.dataset) << method.Name();
    EXPECT_EQ(a.weights, b.weights) << method.Name();
    EXPECT_EQ(a.provenance, b.provenance) << method.Name();
  }
}

TEST(RebalanceProperty, DownAndUpNeverInventValues) {
  Rng draw(9);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t minority = 2 + draw.Index(30);
    const Dataset in = Imbalanced(minority + 1 + draw.Index(80), minority,
                                  draw.Next());
    std::set<std::pair<std::vector<double>, Label>> seen;
    for (const auto& r : in.rows()) seen.insert({r.values, r.label});
    for (const auto& method :
         {ResamplingMethod::Down(), ResamplingMethod::Up()}) {
      const WeightedDataset out = Rebalance(in, method.WithSeed(draw.Next()));
      const std::size_t target = method.kind == ResamplingMethod::Kind::kDown
                                     ? minority
                                     : in.size() - minority;
      EXPECT_EQ(CountLabel(out, Label::kActive), target);
      EXPECT_EQ(CountLabel(out, Label::kTerminated), target);
      for (const auto& r : out.dataset.rows()) {
        EXPECT_TRUE(seen.contains({r.values, r.label}));
      }
    }
  }
}

TEST(ResamplingJsonTest, RoundTripsAndAcceptsNames) {
  for (const auto& method :
       {ResamplingMethod::None(), ResamplingMethod::Down(),
        ResamplingMethod::Up(), ResamplingMethod::Weights(),
        ResamplingMethod::Smote(3), ResamplingMethod::Rose(0.5)}) {
    EXPECT_EQ(ResamplingFromJson(ResamplingToJson(method)), method);
  }
  EXPECT_EQ(ResamplingFromJson("up"), ResamplingMethod::Up());
  EXPECT_THROW(ResamplingFromJson("sideways"), ConfigError);
}

std::vector<EmployeeRecord> NumericCloud(const std::vector<double>& a,
                                         const std::vector<double>& b) {
  std::vector<EmployeeRecord> rows;
  for (std::size_t i = 0; i < a.size(); ++i) {
    rows.push_back(MakeRow("m" + std::to_string(i), {a[i], b[i], 0.0},
                           Label::kTerminated));
  }
  return rows;
}

TEST(SmoteSynthesizeTest, TwoPointsInterpolateBetweenThem) {
  const auto minority = NumericCloud({0.0, 10.0}, {1.0, 1.0});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto out = SmoteSynthesize(MixedSchema(), minority, 1, 1, seed);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_GE(out[0].values[0], 0.0);
    EXPECT_LE(out[0].values[0], 10.0);
    EXPECT_EQ(out[0].values[1], 1.0);
  }
}

TEST(SmoteSynthesizeTest, IdenticalRowsGiveIdenticalSynthetics) {
  const auto minority = NumericCloud({2.5, 2.5, 2.5, 2.5}, {-1, -1, -1, -1});
  for (const auto& r : SmoteSynthesize(MixedSchema(), minority, 2, 10, 3)) {
    EXPECT_EQ(r.values, minority[0].values);
  }
}

TEST(SmoteSynthesizeTest, SyntheticPointsLieOnNeighbourSegments) {
  Schema schema({FeatureSpec::Numeric("a"), FeatureSpec::Numeric("b")},
                "status");
  Rng rng(12);
  std::vector<EmployeeRecord> minority;
  for (int i = 0; i < 20; ++i) {
    minority.push_back(MakeRow("m" + std::to_string(i),
                               {5.0 * rng.Normal(), 0.1 * rng.Normal()},
                               Label::kTerminated));
  }
  for (const auto& r : SmoteSynthesize(schema, minority, 3, 200, 8)) {
    EXPECT_TRUE(testing::OnNeighbourSegment(schema, minority, 3, r, 1e-9));
  }
}

TEST(SmoteSynthesizeTest, CategoricalValuesCopiedFromSeedRow) {
  const Dataset in = Imbalanced(10, 30, 11);
  std::vector<EmployeeRecord> minority;
  for (const auto& r : in.rows()) {
    if (r.label == Label::kTerminated) minority.push_back(r);
  }
  std::vector<std::size_t> seeds;
  const auto out = SmoteSynthesize(in.schema(), minority, 3, 50, 5, &seeds);
  for (std::size_t i = 0; i < out.size(); ++i) {
    EXPECT_EQ(out[i].values[2], minority[seeds[i]].values[2]);
  }
}

}  // namespace
}  // namespace turnover
