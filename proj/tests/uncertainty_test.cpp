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

#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "crqrisk/uncertainty.hpp"
#include "test_support.hpp"

namespace crqrisk {
namespace {

UncertaintyBreakdown knowledge_of(double k) {
  UncertaintyBreakdown u;
  u.knowledge = k;
  u.total = k;
  return u;
}

TEST(BinaryEntropy, Examples) {
  EXPECT_EQ(binary_entropy(0.5), 1.0);
  EXPECT_EQ(binary_entropy(0.0), 0.0);
  EXPECT_EQ(binary_entropy(1.0), 0.0);
  EXPECT_NEAR(binary_entropy(0.2), 0.7219, 1e-4);
  EXPECT_CRQ_ERROR(binary_entropy(1.5), ErrorCode::kOutOfRange);
  EXPECT_CRQ_ERROR(binary_entropy(-0.1), ErrorCode::kOutOfRange);
}

TEST(MutualInformation, Examples) {
  auto u = mutual_information(std::vector<double>{0.5, 0.5});
  EXPECT_EQ(u.total, 1.0);
  EXPECT_EQ(u.expected_data, 1.0);
  EXPECT_EQ(u.knowledge, 0.0);
  u = mutual_information(std::vector<double>{0.0, 1.0});
  EXPECT_EQ(u.total, 1.0);
  EXPECT_EQ(u.expected_data, 0.0);
  EXPECT_EQ(u.knowledge, 1.0);
  u = mutual_information(std::vector<double>{0.2, 0.8});
  EXPECT_NEAR(u.total, 1.0, 1e-12);
  EXPECT_NEAR(u.expected_data, 0.7219, 1e-4);
  EXPECT_NEAR(u.knowledge, 0.2781, 1e-4);
  EXPECT_EQ(u.n_members, 2);
  EXPECT_CRQ_ERROR(mutual_information(std::vector<double>{}), ErrorCode::kEmptyEnsemble);
}

TEST(MutualInformation, NonNegativeAndBoundedOnRandomMembers) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 1);
  std::uniform_int_distribution<int> size(1, 20);
  for (int t = 0; t < 10000; ++t) {
    std::vector<double> p(static_cast<std::size_t>(size(rng)));
    for (auto& x : p) x = u(rng);
    const auto b = mutual_information(p);
    ASSERT_GE(b.knowledge, 0.0);
    ASSERT_GE(b.expected_data, 0.0);
    ASSERT_LE(b.expected_data, b.total);
    ASSERT_LE(b.total, 1.0);
    ASSERT_NEAR(b.knowledge, b.total - b.expected_data, 1e-12);
  }
}

TEST(MutualInformation, ZeroIffMembersAgree) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.001, 0.999);
  for (int t = 0; t < 1000; ++t) {
    const double p = u(rng);
    EXPECT_LT(mutual_information(std::vector<double>(7, p)).knowledge, 1e-9);
    std::vector<double> q(7, p);
    q[3] = p + (p < 0.5 ? 1e-6 : -1e-6);
    EXPECT_GT(mutual_information(q).knowledge, 0.0);
  }
}

TEST(MutualInformation, PermutationInvariant) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> p(8);
    for (auto& x : p) x = u(rng);
    const auto a = mutual_information(p);
    std::sort(p.begin(), p.end());
    const auto b = mutual_information(p);
    EXPECT_NEAR(a.knowledge, b.knowledge, 1e-12);
    EXPECT_NEAR(a.total, b.total, 1e-12);
  }
}

TEST(PredictionUncertainty, UsesPrefixMembersAndCapsAtTreeCount) {
  Ensemble m;
  m.feature_importances = {0.0};
  m.learning_rate = 1.0;
  for (int i = 0; i < 4; ++i) m.trees.push_back(Tree::leaf(0.5));
  const auto x = make_feature_vector({0.0});
  const auto u = prediction_uncertainty(m, x, 2);
  EXPECT_EQ(u, mutual_information(std::vector<double>{sigmoid(1.0), sigmoid(2.0)}));
  EXPECT_EQ(prediction_uncertainty(m, x, 10).n_members, 4);
}

TEST(RankTopM, Examples) {
  const std::vector<std::pair<std::string, UncertaintyBreakdown>> batch = {
      {"a", knowledge_of(0.3)}, {"b", knowledge_of(0.1)}, {"c", knowledge_of(0.5)}};
  EXPECT_TRUE(rank_top_m(batch, 0).empty());
  EXPECT_EQ(rank_top_m(batch, 2), (std::vector<std::string>{"c", "a"}));
  EXPECT_EQ(rank_top_m(batch, 10), (std::vector<std::string>{"c", "a", "b"}));
  const std::vector<std::pair<std::string, UncertaintyBreakdown>> tie = {{"b", knowledge_of(0.2)},
                                                                         {"a", knowledge_of(0.2)}};
  EXPECT_EQ(rank_top_m(tie, 1), std::vector<std::string>{"a"});
}

TEST(RankTopM, TotalKeyForAblation) {
  UncertaintyBreakdown x = knowledge_of(0.1), y = knowledge_of(0.2);
  x.total = 0.9;
  const std::vector<std::pair<std::string, UncertaintyBreakdown>> batch = {{"x", x}, {"y", y}};
  EXPECT_EQ(rank_top_m(batch, 1, RankKey::kKnowledge), std::vector<std::string>{"y"});
  EXPECT_EQ(rank_top_m(batch, 1, parse_rank_key("total")), std::vector<std::string>{"x"});
  EXPECT_CRQ_ERROR(parse_rank_key("entropy"), ErrorCode::kInvalidConfig);
}

}  // namespace
}  // namespace crqrisk
