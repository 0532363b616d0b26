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

// Runs the default training grid on ten planted populations and checks that
// the persisted model is a random forest in at least eight of them.
//
// Registered with WILL_FAIL: on the default scenario naive Bayes and bagged
// trees regularly tie or beat the forest (see README, "Known gaps"). A pass
// here would make ctest report the test as failed, which is the signal to
// drop WILL_FAIL.

#include <cstdio>
#include <string>

#include "test_util.h"
#include "turnover/model.h"
#include "turnover/pipeline.h"

int main() {
  using namespace turnover;
  int forest_wins = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    RunConfig config;
    config.output_dir = testing::MakeTempDir("ranking");
    config.data = config.output_dir + "/data.csv";
    config.schema = config.output_dir + "/schema.json";
    config.seed = seed;
    config.prediction_set_size = 0;
    config.importance_repetitions = 1;
    CmdGenerate(config);
    const TrainResult result = CmdTrain(config);
    const bool forest = result.model.family() == ModelFamily::kRandomForest;
    forest_wins += forest ? 1 : 0;
    std::printf("seed %2llu best %s cv_auc %.4f\n",
                static_cast<unsigned long long>(seed),
                std::string(FamilyName(result.model.family())).c_str(),
                result.cv.cells[*result.cv.best].mean_auc);
  }
  const bool pass = forest_wins >= 8;
  std::printf("%s random forest best in %d of 10 seeds (need 8)\n",
              pass ? "PASS" : "FAIL", forest_wins);
  return pass ? 0 : 1;
}
