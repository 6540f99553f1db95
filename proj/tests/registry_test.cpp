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

#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "crqrisk/corpus.hpp"
#include "crqrisk/registry.hpp"
#include "test_support.hpp"

namespace crqrisk {
namespace {

constexpr Timestamp kNow = 1704067200;

const ModelBundle& tiny_bundle() {
  static const ModelBundle b = [] {
    GeneratorConfig g;
    g.n_records = 1500;
    g.risky_prevalence = 0.05;
    const auto c = generate(g);
    PipelineConfig cfg;
    cfg.gbdt.n_trees = 10;
    return train_pipeline(c.records, c.labels, {}, c.records.back().submitted_at, cfg).bundle;
  }();
  return b;
}

TEST(Registry, StageActivateRetire) {
  testing::TempDir dir;
  ModelRegistry reg(dir.path());
  EXPECT_FALSE(reg.active_version().has_value());
  const auto a = reg.stage(tiny_bundle(), "manual", kNow);
  const auto b = reg.stage(tiny_bundle(), "scheduled", kNow + 60);
  EXPECT_EQ(a.version, "v000001-20240101T000000Z");
  EXPECT_EQ(b.version, "v000002-20240101T000100Z");
  EXPECT_LT(a.version, b.version);
  EXPECT_EQ(a.status, EntryStatus::kStaged);
  reg.activate(a.version);
  EXPECT_EQ(reg.active_version(), a.version);
  reg.activate(b.version);
  EXPECT_EQ(reg.active_version(), b.version);
  EXPECT_EQ(reg.entry(a.version)->status, EntryStatus::kRetired);
  EXPECT_EQ(reg.entry(b.version)->status, EntryStatus::kActive);
  std::size_t active = 0;
  for (const auto& e : reg.list()) active += e.status == EntryStatus::kActive;
  EXPECT_EQ(active, 1u);
  EXPECT_CRQ_ERROR(reg.activate("v999999-x"), ErrorCode::kUnknownVersion);
  EXPECT_EQ(reg.active_version(), b.version);
}

TEST(Registry, ReopenedRegistryHasTheSameStateAndLoadsBundles) {
  testing::TempDir dir;
  std::vector<ModelRegistryEntry> before;
  std::string active;
  {
    ModelRegistry reg(dir.path());
    const auto a = reg.stage(tiny_bundle(), "manual", kNow);
    reg.stage(tiny_bundle(), "manual", kNow + 1);
    reg.activate(a.version);
    before = reg.list();
    active = a.version;
  }
  ModelRegistry again(dir.path());
  EXPECT_EQ(again.list(), before);
  EXPECT_EQ(again.active_version(), active);
  const auto loaded = again.load(active);
  const auto x = generate(GeneratorConfig{}).records.front();
  EXPECT_EQ(loaded->score(x, active), tiny_bundle().score(x, active));
  EXPECT_CRQ_ERROR(again.load("nope"), ErrorCode::kUnknownVersion);
}

TEST(Registry, CrashLeftoversAreIgnoredAndThePointerWins) {
  testing::TempDir dir;
  std::string a_version, b_version;
  {
    ModelRegistry reg(dir.path());
    a_version = reg.stage(tiny_bundle(), "manual", kNow).version;
    b_version = reg.stage(tiny_bundle(), "manual", kNow + 1).version;
    reg.activate(a_version);
  }
  const std::filesystem::path root = dir.path();
  // A crash mid-stage leaves a directory without entry.json, or a temp file.
  std::filesystem::create_directories(root / "models" / "v000003-20240101T000002Z");
  { std::ofstream(root / "models" / "v000003-20240101T000002Z" / "bundle.json.tmp") << "{"; }
  // A crash between the pointer rename and the entry rewrite leaves two
  // entries claiming "active"; the pointer decides.
  {
    auto e = Json::parse(read_file(root / "models" / b_version / "entry.json"));
    e["status"] = "active";
    std::ofstream(root / "models" / b_version / "entry.json") << e.dump();
  }
  ModelRegistry again(root);
  EXPECT_EQ(again.list().size(), 2u);
  EXPECT_EQ(again.active_version(), a_version);
  EXPECT_EQ(again.entry(b_version)->status, EntryStatus::kRetired);
  // A new stage continues the sequence past the crashed directory's peers.
  EXPECT_EQ(again.stage(tiny_bundle(), "manual", kNow + 2).version.substr(0, 7), "v000003");
}

TEST(Registry, AtomicWriteReplacesContentWhole) {
  testing::TempDir dir;
  const auto p = std::filesystem::path(dir.path()) / "f.txt";
  write_file_atomic(p, "one");
  write_file_atomic(p, "two");
  EXPECT_EQ(read_file(p), "two");
  EXPECT_FALSE(std::filesystem::exists(p.string() + ".tmp"));
  EXPECT_CRQ_ERROR(read_file(std::filesystem::path(dir.path()) / "missing"), ErrorCode::kIoError);
}

TEST(Registry, EntryJsonRoundTrip) {
  ModelRegistryEntry e;
  e.version = "v000001-20240101T000000Z";
  e.created_at = kNow;
  e.status = EntryStatus::kRetired;
  e.reason = "drift_alarm";
  const auto back = Json::parse(Json(e).dump()).get<ModelRegistryEntry>();
  EXPECT_EQ(back, e);
  EXPECT_EQ(Json(e)["created_at"], "2024-01-01T00:00:00Z");
  EXPECT_ANY_THROW(parse_entry_status("deleted"));
}

}  // namespace
}  // namespace crqrisk
