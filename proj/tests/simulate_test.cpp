// Copyright 2026 The crqrisk Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "crqrisk/simulate.hpp"

#include <gtest/gtest.h>

#include "test_support.hpp"

namespace crqrisk {
namespace {

SimulationConfig tiny_config() {
  SimulationConfig cfg = default_simulation_config();
  cfg.months = 3;
  cfg.drift_at_month = 0;
  cfg.bootstrap_months = 1;
  cfg.records_per_month = 1500;
  cfg.batches_per_month = 2;
  cfg.prevalence = 0.05;
  cfg.service.review_m = 5;
  cfg.service.drift_min_window = 300;
  cfg.service.drift_max_window = 750;
  cfg.service.pipeline.gbdt.n_trees = 15;
  cfg.service.pipeline.gbdt.max_depth = 3;
  cfg.service.pipeline.gbdt.learning_rate = 0.3;
  return cfg;
}

TEST(Simulate, MonthlyCountsAddUp) {
  const auto r = simulate(tiny_config());
  ASSERT_EQ(r.months.size(), 3u);
  for (const auto& m : r.months) {
    EXPECT_EQ(m.n_crq, 1500u);
    EXPECT_EQ(m.n_reviewed, 10u);  // review_m per batch
    EXPECT_LE(m.n_major, m.n_risky);
    EXPECT_DOUBLE_EQ(m.majors_per_10k, 1e4 * static_cast<double>(m.n_major) / 1500.0);
    EXPECT_GE(m.retrains, 1);  // the month-end retrain
    EXPECT_FALSE(m.model_version.empty());
  }
  // The bootstrap retrain plus one per month.
  EXPECT_EQ(r.retrains.size(), 4u);
  EXPECT_EQ(r.retrains.front()["month"], 0);
}

TEST(Simulate, IsDeterministicForASeed) {
  const auto a = simulate(tiny_config());
  const auto b = simulate(tiny_config());
  EXPECT_EQ(month_series_csv(a.months), month_series_csv(b.months));
  auto other = tiny_config();
  other.seed = 8;
  EXPECT_NE(month_series_csv(simulate(other).months), month_series_csv(a.months));
}

TEST(Simulate, PlantedDriftRaisesAnAlarmAfterTheOnset) {
  auto cfg = tiny_config();
  cfg.drift_at_month = 1;
  cfg.drifts = {{"change_size", 0, DriftKind::kMeanShift, 3.0}};
  const auto r = simulate(cfg);
  EXPECT_FALSE(r.months[0].drift_alarm);
  EXPECT_TRUE(r.months[1].drift_alarm);
  EXPECT_GE(r.months[1].retrains, 2);  // drift retrain + month end
  bool drift_retrain = false;
  for (const auto& j : r.retrains) drift_retrain = drift_retrain || j["reason"] == "drift_alarm";
  EXPECT_TRUE(drift_retrain);
}

TEST(Simulate, KeepsStateInARequestedDirectory) {
  testing::TempDir dir;
  auto cfg = tiny_config();
  cfg.months = 1;
  cfg.data_dir = dir.file("state");
  simulate(cfg);
  EXPECT_TRUE(fs::exists(fs::path(cfg.data_dir) / "scores.jsonl"));
  EXPECT_TRUE(fs::exists(fs::path(cfg.data_dir) / "events.jsonl"));
}

TEST(Simulate, RejectsInvalidConfigs) {
  auto cfg = tiny_config();
  cfg.months = 0;
  EXPECT_CRQ_ERROR(simulate(cfg), ErrorCode::kInvalidConfig);
  cfg = tiny_config();
  cfg.drift_at_month = 3;
  EXPECT_CRQ_ERROR(simulate(cfg), ErrorCode::kInvalidConfig);
  cfg = tiny_config();
  cfg.records_per_month = 0;
  EXPECT_CRQ_ERROR(simulate(cfg), ErrorCode::kInvalidConfig);
}

}  // namespace
}  // namespace crqrisk
