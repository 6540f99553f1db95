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

// Shared fixtures for the unit tests.

#ifndef CRQRISK_TESTS_TEST_SUPPORT_HPP_
#define CRQRISK_TESTS_TEST_SUPPORT_HPP_

#include <cstdlib>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "crqrisk/domain.hpp"
#include "crqrisk/error.hpp"

namespace crqrisk::testing {

/// A fresh directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "crqrisk-test-XXXXXX").string();
    if (!::mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline ChangeRequest sample_change(const std::string& id = "CRQ-1", Timestamp at = 1704067200) {
  ChangeRequest c;
  c.id = id;
  c.submitted_at = at;
  c.summary = "emergency rollback of payment outage";
  c.description = "restart the database cluster after patch";
  c.qa_answers = {{"previously_implemented", "no"}, {"rollback_plan", "tested"}};
  c.team_id = "team-001";
  c.declared_risk = RiskLevel::kLow;
  c.declared_importance = 3;
  c.attributes = {{"change_size", 2.5}};
  return c;
}

/// A schema of `k` plain numeric features f0..f{k-1}.
inline SchemaPtr numeric_schema(std::size_t k) {
  std::vector<FeatureSpec> specs;
  for (std::size_t i = 0; i < k; ++i) specs.push_back({"f" + std::to_string(i), FeatureKind::kNumeric});
  return std::make_shared<const FeatureSchema>(std::move(specs));
}

/// Unit-weight dataset over `numeric_schema(width)` with timestamps 0..n-1.
inline Dataset make_dataset(const std::vector<std::vector<double>>& rows, const std::vector<int>& labels) {
  const std::size_t width = rows.empty() ? 1 : rows.front().size();
  std::vector<FeatureVector> xs;
  std::vector<Label> ys;
  std::vector<Timestamp> ts;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    xs.push_back(make_feature_vector(rows[i]));
    ys.push_back(labels[i] ? Label::kRisky : Label::kNormal);
    ts.push_back(static_cast<Timestamp>(i));
  }
  return Dataset(numeric_schema(width), std::move(xs), std::move(ys), std::vector<double>(rows.size(), 1.0),
                 std::move(ts));
}

/// Expects `stmt` to throw crqrisk::Error with `code`.
#define EXPECT_CRQ_ERROR(stmt, expected_code)                                         \
  do {                                                                                \
    try {                                                                             \
      stmt;                                                                           \
      ADD_FAILURE() << "expected " << ::crqrisk::error_code_name(expected_code);      \
    } catch (const ::crqrisk::Error& crq_error_) {                                    \
      EXPECT_EQ(crq_error_.code(), expected_code) << crq_error_.what();               \
    }                                                                                 \
  } while (0)

}  // namespace crqrisk::testing

#endif  // CRQRISK_TESTS_TEST_SUPPORT_HPP_
