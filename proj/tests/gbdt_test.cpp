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

#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "crqrisk/corpus.hpp"
#include "crqrisk/features.hpp"
#include "crqrisk/gbdt.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

namespace crqrisk {
namespace {

Ensemble single_leaf_ensemble(std::size_t n_trees, double leaf, double base, double eta, std::size_t width = 1) {
  Ensemble m;
  m.base_score = base;
  m.learning_rate = eta;
  m.feature_importances.assign(width, 0.0);
  for (std::size_t t = 0; t < n_trees; ++t) m.trees.push_back(Tree::leaf(leaf));
  return m;
}

Dataset interaction_dataset(std::size_t n, std::uint64_t seed) {
  GeneratorConfig cfg;
  cfg.n_records = n;
  cfg.risky_prevalence = 0.05;
  cfg.seed = seed;
  const auto c = generate(cfg);
  return make_encoder(c.records, c.labels).dataset(c.records, c.labels);
}

TEST(LogisticLoss, GradientMatchesCentralDifferences) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> f(-6, 6), w(0.1, 5);
  for (int i = 0; i < 20; ++i) {
    const double x = f(rng), wt = w(rng);
    for (double y : {0.0, 1.0}) {
      const double eps = 1e-4;
      const double num_g = (logistic_loss(x + eps, y, wt) - logistic_loss(x - eps, y, wt)) / (2 * eps);
      const auto gp = logistic_grad(x, y, wt);
      const double num_h = (logistic_grad(x + eps, y, wt).g - logistic_grad(x - eps, y, wt).g) / (2 * eps);
      EXPECT_LT(std::abs(num_g - gp.g) / std::max(std::abs(gp.g), 1e-12), 1e-4);
      EXPECT_LT(std::abs(num_h - gp.h) / std::max(std::abs(gp.h), 1e-12), 1e-4);
    }
  }
}

TEST(LogisticLoss, StableAtExtremeMargins) {
  EXPECT_NEAR(logistic_loss(800, 1), 0.0, 1e-12);
  EXPECT_NEAR(logistic_loss(-800, 0), 0.0, 1e-12);
  EXPECT_NEAR(logistic_loss(800, 0), 800.0, 1e-9);
  EXPECT_EQ(sigmoid(-1000), 0.0);
  EXPECT_EQ(sigmoid(1000), 1.0);
}

TEST(SplitSearch, MatchesBruteForceOnRandomProblems) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    const auto p = oracle::random_split_problem(rng);
    SplitParams params{trial % 3 == 0 ? 0.0 : 1.0, trial % 5 == 0 ? 0.25 : 0.0, (trial % 2) ? 1.0 : 0.0};
    const auto cols = ColumnStore::build(p.rows, p.rows.front().size());
    std::vector<int> position(p.rows.size(), 0);
    const auto greedy = find_best_splits(cols, p.grad, p.hess, position, 1, params)[0];
    const auto brute = oracle::split_brute_force(p.rows, p.grad, p.hess, params);
    ASSERT_EQ(greedy.valid, brute.valid) << "trial " << trial;
    if (!brute.valid) continue;
    EXPECT_EQ(greedy.feature, brute.feature) << "trial " << trial;
    EXPECT_EQ(greedy.threshold, brute.threshold) << "trial " << trial;
    EXPECT_EQ(greedy.default_left, brute.default_left) << "trial " << trial;
    EXPECT_EQ(greedy.gain, brute.gain) << "trial " << trial;
  }
}

TEST(SplitSearch, TiesGoToTheLowestFeatureAndThreshold) {
  // Two identical features: the split must use feature 0.
  std::vector<FeatureVector> rows;
  for (double v : {0.0, 1.0, 2.0, 3.0}) rows.push_back(make_feature_vector({v, v}));
  const std::vector<double> g = {-1, -1, 1, 1}, h = {1, 1, 1, 1};
  const auto cols = ColumnStore::build(rows, 2);
  std::vector<int> pos(4, 0);
  const auto best = find_best_splits(cols, g, h, pos, 1, SplitParams{1.0, 0.0, 0.0})[0];
  ASSERT_TRUE(best.valid);
  EXPECT_EQ(best.feature, 0);
  EXPECT_EQ(best.threshold, 1.0);
}

TEST(SplitSearch, LearnsTheMissingValueDirection) {
  // Missing rows behave like the high-x rows.
  std::vector<FeatureVector> rows;
  std::vector<double> g, h;
  for (int i = 0; i < 8; ++i) {
    auto v = make_feature_vector({static_cast<double>(i)});
    if (i >= 6) v.missing[0] = true;
    rows.push_back(v);
    g.push_back(i < 3 ? -1.0 : 1.0);
    h.push_back(1.0);
  }
  const auto cols = ColumnStore::build(rows, 1);
  std::vector<int> pos(8, 0);
  const auto best = find_best_splits(cols, g, h, pos, 1, SplitParams{})[0];
  ASSERT_TRUE(best.valid);
  EXPECT_EQ(best.threshold, 2.0);
  EXPECT_FALSE(best.default_left);
}

TEST(Train, BalancedLabelsDepthZeroLeafIsZero) {
  const auto ds = testing::make_dataset({{0}, {1}}, {1, 0});
  TrainConfig cfg;
  cfg.n_trees = 1;
  cfg.max_depth = 0;
  cfg.learning_rate = 1.0;
  cfg.base_score = 0.0;
  const auto m = train(ds, cfg);
  EXPECT_EQ(m.trees[0].nodes[0].weight, 0.0);
  EXPECT_EQ(m.predict_proba(ds.row(0)), 0.5);
}

TEST(Train, AllPositiveDepthZeroLeafWeightIsOne) {
  const auto ds = testing::make_dataset({{0}, {1}, {2}, {3}}, {1, 1, 1, 1});
  TrainConfig cfg;
  cfg.n_trees = 1;
  cfg.max_depth = 0;
  cfg.lambda = 1.0;
  cfg.base_score = 0.0;
  const auto m = train(ds, cfg);
  EXPECT_DOUBLE_EQ(m.trees[0].nodes[0].weight, 1.0);
}

TEST(Train, HugeLambdaKeepsPredictionsAtBase) {
  const auto ds = interaction_dataset(2000, 1);
  TrainConfig cfg;
  cfg.n_trees = 5;
  cfg.lambda = 1e15;
  const auto m = train(ds, cfg);
  const double base = sigmoid(m.base_score);
  for (std::size_t i = 0; i < 50; ++i) EXPECT_NEAR(m.predict_proba(ds.row(i)), base, 1e-9);
}

TEST(Train, LossIsMonotoneNonIncreasing) {
  const auto ds = interaction_dataset(4000, 2);
  TrainConfig cfg;
  cfg.n_trees = 40;
  const auto report = train_with_report(ds, cfg);
  ASSERT_EQ(report.loss_history.size(), 41u);
  for (std::size_t t = 1; t < report.loss_history.size(); ++t) {
    EXPECT_LE(report.loss_history[t], report.loss_history[t - 1] * (1 + 1e-12)) << "round " << t;
  }
  EXPECT_LT(report.loss_history.back(), report.loss_history.front());
}

TEST(Train, ImportancesAreNonNegativeSumToOneAndZeroWhenUnused) {
  auto ds = interaction_dataset(3000, 3);
  // Append a constant column that can never be split on.
  std::vector<FeatureSpec> specs = ds.schema()->features();
  specs.push_back({"constant", FeatureKind::kNumeric});
  auto schema = std::make_shared<const FeatureSchema>(specs);
  auto rows = ds.rows();
  for (auto& r : rows) {
    r.values.push_back(1.0);
    r.missing.push_back(false);
  }
  ds = Dataset(schema, rows, ds.labels(), ds.weights(), ds.timestamps(), ds.ids());
  TrainConfig cfg;
  cfg.n_trees = 20;
  const auto m = train(ds, cfg);
  double sum = 0.0;
  for (double v : m.feature_importances) {
    EXPECT_GE(v, 0.0);
    sum += v;
  }
  EXPECT_NEAR(sum, 1.0, 1e-12);
  EXPECT_EQ(m.feature_importances.back(), 0.0);
}

TEST(Train, DeterministicAndSubsampleDependsOnSeed) {
  const auto ds = interaction_dataset(2000, 4);
  TrainConfig cfg;
  cfg.n_trees = 10;
  cfg.subsample = 0.7;
  cfg.seed = 1;
  const auto a = train(ds, cfg);
  const auto b = train(ds, cfg);
  EXPECT_EQ(Json(a).dump(), Json(b).dump());
  cfg.seed = 2;
  EXPECT_NE(Json(a).dump(), Json(train(ds, cfg)).dump());
}

TEST(Train, RespectsMaxDepth) {
  const auto ds = interaction_dataset(3000, 5);
  TrainConfig cfg;
  cfg.n_trees = 5;
  cfg.max_depth = 3;
  for (const auto& t : train(ds, cfg).trees) EXPECT_LE(t.depth(), 3);
}

TEST(Train, Errors) {
  const auto ds = testing::make_dataset({{0}, {1}}, {0, 0});
  EXPECT_CRQ_ERROR(train(ds, TrainConfig{}), ErrorCode::kSingleClassDataset);
  const auto empty = Dataset(testing::numeric_schema(1), {}, {}, {}, {});
  EXPECT_CRQ_ERROR(train(empty, TrainConfig{}), ErrorCode::kEmptyDataset);
  TrainConfig bad;
  bad.learning_rate = 0.0;
  EXPECT_CRQ_ERROR(train(testing::make_dataset({{0}, {1}}, {0, 1}), bad), ErrorCode::kInvalidConfig);
}

TEST(Predict, EmptyEnsembleIsSigmoidOfBase) {
  const auto m = single_leaf_ensemble(0, 0.0, 0.0, 1.0);
  EXPECT_EQ(m.predict_proba(make_feature_vector({3.0})), 0.5);
}

TEST(Predict, SingleLeafOfOne) {
  const auto m = single_leaf_ensemble(1, 1.0, 0.0, 1.0);
  EXPECT_NEAR(m.predict_proba(make_feature_vector({0.0})), 0.7311, 1e-4);
}

TEST(Predict, PositiveLeafRaisesEveryProbability) {
  const auto ds = interaction_dataset(1000, 6);
  TrainConfig cfg;
  cfg.n_trees = 5;
  auto m = train(ds, cfg);
  const auto before = m;
  m.trees.push_back(Tree::leaf(0.3));
  for (std::size_t i = 0; i < 100; ++i) EXPECT_GT(m.predict_proba(ds.row(i)), before.predict_proba(ds.row(i)));
}

TEST(Predict, WidthMismatchIsSchemaMismatch) {
  const auto m = single_leaf_ensemble(1, 1.0, 0.0, 1.0, 3);
  EXPECT_CRQ_ERROR(m.predict_proba(make_feature_vector({1.0})), ErrorCode::kSchemaMismatch);
}

TEST(StagedProbas, SingleMemberIsTheFullPrediction) {
  const auto ds = interaction_dataset(1000, 7);
  TrainConfig cfg;
  cfg.n_trees = 7;
  const auto m = train(ds, cfg);
  EXPECT_EQ(m.staged_probas(ds.row(0), 1), std::vector<double>{m.predict_proba(ds.row(0))});
}

TEST(StagedProbas, PrefixSumsOfIdenticalTrees) {
  const auto m = single_leaf_ensemble(4, 0.5, 0.0, 1.0);
  const auto p = m.staged_probas(make_feature_vector({0.0}), 2);
  ASSERT_EQ(p.size(), 2u);
  EXPECT_NEAR(p[0], 0.7311, 1e-4);
  EXPECT_NEAR(p[1], 0.8808, 1e-4);
}

TEST(StagedProbas, ZeroWeightTreesGiveOneHalf) {
  const auto m = single_leaf_ensemble(6, 0.0, 0.0, 1.0);
  for (double p : m.staged_probas(make_feature_vector({0.0}), 3)) EXPECT_EQ(p, 0.5);
}

TEST(StagedProbas, PerTreeMode) {
  auto m = single_leaf_ensemble(2, 0.5, 0.0, 1.0);
  m.trees[1] = Tree::leaf(-0.5);
  const auto p = m.staged_probas(make_feature_vector({0.0}), 2, MemberMode::kPerTree);
  EXPECT_NEAR(p[0], sigmoid(0.5), 1e-15);
  EXPECT_NEAR(p[1], sigmoid(-0.5), 1e-15);
}

TEST(StagedProbas, TooManyMembers) {
  const auto m = single_leaf_ensemble(3, 0.5, 0.0, 1.0);
  EXPECT_CRQ_ERROR(m.staged_probas(make_feature_vector({0.0}), 4), ErrorCode::kTooManyMembers);
  EXPECT_CRQ_ERROR(m.staged_probas(make_feature_vector({0.0}), 0), ErrorCode::kTooManyMembers);
}

TEST(Serialization, RoundTripPreservesPredictionsBitExactly) {
  auto ds = interaction_dataset(3000, 8);
  TrainConfig cfg;
  cfg.n_trees = 30;
  const auto m = train(ds, cfg);
  const auto back = Json::parse(Json(m).dump()).get<Ensemble>();
  for (std::size_t i = 0; i < ds.size(); ++i) {
    ASSERT_EQ(back.predict_proba(ds.row(i)), m.predict_proba(ds.row(i))) << i;
  }
  EXPECT_EQ(back.feature_importances, m.feature_importances);
  EXPECT_EQ(back.schema_version, m.schema_version);
  EXPECT_EQ(Json(back).dump(), Json(m).dump());
}

TEST(Serialization, RejectsUnknownFormat) {
  Json j = single_leaf_ensemble(1, 1.0, 0.0, 1.0);
  j["format_version"] = 99;
  EXPECT_ANY_THROW(j.get<Ensemble>());
}

TEST(Missing, DefaultDirectionIsUsedAtPredictionTime) {
  // x missing behaves like large x: risky.
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (int i = 0; i < 200; ++i) {
    rows.push_back({static_cast<double>(i % 10)});
    labels.push_back(i % 10 >= 7);
  }
  auto ds = testing::make_dataset(rows, labels);
  auto r = ds.rows();
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (labels[i] && i % 3 == 0) r[i].missing[0] = true;
  }
  ds = ds.with_rows(r);
  TrainConfig cfg;
  cfg.n_trees = 20;
  const auto m = train(ds, cfg);
  FeatureVector missing = make_feature_vector({0.0});
  missing.missing[0] = true;
  EXPECT_GT(m.predict_proba(missing), 0.5);
  EXPECT_LT(m.predict_proba(make_feature_vector({1.0})), 0.5);
}

}  // namespace
}  // namespace crqrisk
