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
#include <fstream>

#include <gtest/gtest.h>

#include "crqrisk/feedback.hpp"
#include "test_support.hpp"

namespace crqrisk {
namespace {

constexpr Timestamp kNow = 1704067200;

RiskScore score(const std::string& id, double knowledge, double p = 0.3) {
  RiskScore s;
  s.change_id = id;
  s.probability = p;
  s.model_version = "v1";
  s.uncertainty.knowledge = knowledge;
  s.uncertainty.total = knowledge + 0.1;
  s.uncertainty.expected_data = 0.1;
  s.uncertainty.n_members = 10;
  return s;
}

std::vector<RiskScore> batch_of_five() {
  return {score("a", 0.1), score("b", 0.5, 0.9), score("c", 0.3), score("d", 0.05), score("e", 0.4)};
}

std::vector<std::string> ids(const std::vector<ReviewItem>& items) {
  std::vector<std::string> out;
  for (const auto& i : items) out.push_back(i.change_id);
  return out;
}

TEST(ReviewQueue, EnqueueTakesTheTopMAndIsIdempotent) {
  ReviewQueue q;
  const auto added = q.enqueue_batch(batch_of_five(), 2, kNow, 0.5);
  EXPECT_EQ(ids(added), (std::vector<std::string>{"b", "e"}));
  EXPECT_TRUE(q.enqueue_batch(batch_of_five(), 2, kNow, 0.5).empty());
  EXPECT_EQ(ids(q.items(ReviewStatus::kPending)), (std::vector<std::string>{"b", "e"}));
}

TEST(ReviewQueue, MLargerThanBatchEnqueuesEverything) {
  ReviewQueue q;
  q.enqueue_batch(batch_of_five(), 50, kNow, 0.5);
  EXPECT_EQ(q.items(ReviewStatus::kPending).size(), 5u);
}

TEST(ReviewQueue, VerdictLifecycle) {
  ReviewQueue q;
  q.enqueue_batch(batch_of_five(), 2, kNow, 0.5);
  const auto v = q.record_verdict("b", Label::kRisky, "alice", kNow + 10);
  EXPECT_TRUE(v.model_flagged);
  EXPECT_TRUE(v.agrees_with_model);
  EXPECT_EQ(ids(q.items(ReviewStatus::kReviewed)), std::vector<std::string>{"b"});
  EXPECT_CRQ_ERROR(q.record_verdict("b", Label::kNormal, "bob", kNow + 11), ErrorCode::kDuplicateVerdict);
  EXPECT_CRQ_ERROR(q.record_verdict("zzz", Label::kNormal, "bob", kNow + 11), ErrorCode::kNoPendingItem);
  const auto n = q.record_verdict("e", Label::kRisky, "bob", kNow + 12);
  EXPECT_FALSE(n.model_flagged);
  EXPECT_FALSE(n.agrees_with_model);
}

TEST(ReviewQueue, ExpiryAfterTtl) {
  ReviewQueue q;
  q.enqueue_batch(batch_of_five(), 2, kNow, 0.5);
  const Timestamp ttl = 14 * kSecondsPerDay;
  EXPECT_TRUE(q.expire_stale(kNow + ttl - 1, ttl).empty());
  EXPECT_EQ(q.expire_stale(kNow + ttl, ttl).size(), 2u);
  EXPECT_CRQ_ERROR(q.record_verdict("b", Label::kRisky, "alice", kNow + ttl), ErrorCode::kNoPendingItem);
  EXPECT_EQ(q.items(ReviewStatus::kExpired).size(), 2u);
}

TEST(ReviewQueue, RetrainRequestsAreDeduplicated) {
  ReviewQueue q;
  EXPECT_TRUE(q.request_retrain("drift_alarm", kNow));
  EXPECT_FALSE(q.request_retrain("drift_alarm", kNow + 1));
  EXPECT_TRUE(q.snapshot().retrain_pending);
  q.complete_retrain(kNow + 2, {{"status", "ok"}});
  EXPECT_FALSE(q.snapshot().retrain_pending);
  EXPECT_TRUE(q.request_retrain("scheduled", kNow + 3));
}

TEST(ReviewQueue, ReplayFromTheLogReconstructsIdenticalState) {
  testing::TempDir dir;
  const auto path = dir.file("events.jsonl");
  QueueState before;
  {
    ReviewQueue q(path);
    q.enqueue_batch(batch_of_five(), 3, kNow, 0.5);
    q.record_verdict("c", Label::kNormal, "alice", kNow + 5);
    q.expire_stale(kNow + 20 * kSecondsPerDay, 14 * kSecondsPerDay);
    q.request_retrain("manual", kNow + 21 * kSecondsPerDay);
    before = q.snapshot();
  }
  ReviewQueue again(path);
  EXPECT_EQ(again.snapshot(), before);
  EXPECT_EQ(replay(again.events()), before);
  // Sequence numbers are strictly increasing from 1.
  const auto events = again.events();
  for (std::size_t i = 0; i < events.size(); ++i) EXPECT_EQ(events[i].seq, i + 1);
}

TEST(EventLog, TornTailIsDroppedButInteriorCorruptionFails) {
  testing::TempDir dir;
  const auto path = dir.file("events.jsonl");
  {
    EventLog log(path);
    log.append(EventType::kRetrainRequested, kNow, {{"reason", "manual"}});
  }
  { std::ofstream(path, std::ios::app) << "{\"seq\":2,\"ty"; }
  {
    EventLog log(path);
    EXPECT_EQ(log.events().size(), 1u);
  }
  const auto bad = dir.file("bad.jsonl");
  { std::ofstream(bad) << "garbage\n{\"seq\":1}\n"; }
  EXPECT_CRQ_ERROR(EventLog log(bad), ErrorCode::kParseError);
}

TEST(RecencyWeight, HalfLifeDecay) {
  const Timestamp h = 90 * kSecondsPerDay;
  EXPECT_EQ(recency_weight(kNow, kNow, h), 1.0);
  EXPECT_DOUBLE_EQ(recency_weight(kNow - h, kNow, h), 0.5);
  EXPECT_DOUBLE_EQ(recency_weight(kNow - 2 * h, kNow, h), 0.25);
  EXPECT_EQ(recency_weight(kNow + 100, kNow, h), 1.0);
  double prev = 2.0;
  for (Timestamp age = 0; age < 10 * h; age += h / 7) {
    const double w = recency_weight(kNow - age, kNow, h);
    EXPECT_GT(w, 0.0);
    EXPECT_LE(w, prev);
    prev = w;
  }
}

TEST(AssembleTrainingSet, VerdictsOverrideLabelsAndMultiplyWeights) {
  const Timestamp h = 10 * kSecondsPerDay;
  std::vector<FeatureVector> rows(3, make_feature_vector({0.0}));
  const Dataset history(testing::numeric_schema(1), rows, {Label::kNormal, Label::kNormal, Label::kRisky},
                        {1, 1, 1}, {kNow - h, kNow - h, kNow}, {"x", "y", "z"});
  Verdict v;
  v.change_id = "x";
  v.expert_label = Label::kRisky;
  const auto ds = assemble_training_set(history, {v}, h, 3.0, kNow);
  EXPECT_DOUBLE_EQ(ds.weights()[0], 1.5);
  EXPECT_EQ(ds.label(0), Label::kRisky);
  EXPECT_DOUBLE_EQ(ds.weights()[1], 0.5);
  EXPECT_EQ(ds.label(1), Label::kNormal);
  EXPECT_EQ(ds.weights()[2], 1.0);
  EXPECT_EQ(ds.label(2), Label::kRisky);
  EXPECT_CRQ_ERROR(assemble_training_set(history, {}, 0, 1.0, kNow), ErrorCode::kInvalidConfig);
  EXPECT_CRQ_ERROR(assemble_training_set(history, {}, h, 0.5, kNow), ErrorCode::kInvalidConfig);
}

}  // namespace
}  // namespace crqrisk
