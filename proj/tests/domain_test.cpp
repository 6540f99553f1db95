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

#include <gtest/gtest.h>

#include "crqrisk/domain.hpp"
#include "test_support.hpp"

namespace crqrisk {
namespace {

using testing::sample_change;

TEST(ValidateChange, WellFormedRecordIsReturnedUnchanged) {
  const auto c = sample_change();
  const auto& out = validate_change(c);
  EXPECT_EQ(&out, &c);
  EXPECT_EQ(out, sample_change());
}

TEST(ValidateChange, EmptyIdIsMissingId) {
  auto c = sample_change();
  c.id.clear();
  EXPECT_CRQ_ERROR(validate_change(c), ErrorCode::kMissingId);
}

TEST(ValidateChange, UnknownDeclaredRiskIsRejectedWhenParsed) {
  Json j = sample_change();
  j["declared_risk"] = "urgent";
  EXPECT_CRQ_ERROR(j.get<ChangeRequest>(), ErrorCode::kUnknownRiskLevel);
}

TEST(ValidateChange, OutOfEnumRiskValueIsRejected) {
  auto c = sample_change();
  c.declared_risk = static_cast<RiskLevel>(7);
  EXPECT_CRQ_ERROR(validate_change(c), ErrorCode::kUnknownRiskLevel);
}

TEST(ValidateChange, EmptyQaMapIsRejected) {
  auto c = sample_change();
  c.qa_answers.clear();
  EXPECT_CRQ_ERROR(validate_change(c), ErrorCode::kEmptyQaMap);
}

TEST(ValidateChange, ImportanceOutsideOneToFiveIsRejected) {
  auto c = sample_change();
  c.declared_importance = 0;
  EXPECT_CRQ_ERROR(validate_change(c), ErrorCode::kInvalidImportance);
  c.declared_importance = 6;
  EXPECT_CRQ_ERROR(validate_change(c), ErrorCode::kInvalidImportance);
}

TEST(ValidateChange, ErrorMessageNamesTheField) {
  auto c = sample_change();
  c.qa_answers.clear();
  try {
    validate_change(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("qa_answers"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("EmptyQaMap"), std::string::npos);
  }
}

TEST(ChangeRequestJson, RoundTripIsStructurallyEqual) {
  const auto c = sample_change();
  const auto back = Json::parse(Json(c).dump()).get<ChangeRequest>();
  EXPECT_EQ(back, c);
}

TEST(ChangeRequestJson, AcceptsIsoTimestamps) {
  Json j = sample_change();
  j["submitted_at"] = "2024-01-01T00:00:10Z";
  EXPECT_EQ(j.get<ChangeRequest>().submitted_at, 1704067210);
}

TEST(Timestamps, IsoRoundTrip) {
  EXPECT_EQ(format_iso8601(1704067200), "2024-01-01T00:00:00Z");
  EXPECT_EQ(parse_iso8601("2024-01-01T00:00:00Z"), 1704067200);
  EXPECT_CRQ_ERROR(parse_iso8601("yesterday"), ErrorCode::kParseError);
}

TEST(Labels, ParseAndValue) {
  EXPECT_EQ(parse_label("risky"), Label::kRisky);
  EXPECT_EQ(parse_label("normal"), Label::kNormal);
  EXPECT_EQ(parse_label("1"), Label::kRisky);
  EXPECT_EQ(label_value(Label::kRisky), 1.0);
  EXPECT_CRQ_ERROR(parse_label("maybe"), ErrorCode::kParseError);
}

TEST(FeatureSchema, VersionDependsOnLayoutOnly) {
  const auto a = testing::numeric_schema(3);
  const auto b = testing::numeric_schema(3);
  const auto c = testing::numeric_schema(4);
  EXPECT_EQ(a->version(), b->version());
  EXPECT_NE(a->version(), c->version());
  EXPECT_EQ(a->index_of("f2"), std::optional<std::size_t>(2));
  EXPECT_FALSE(a->index_of("nope"));
  const auto back = Json(*a).get<FeatureSchema>();
  EXPECT_EQ(back.version(), a->version());
}

TEST(FeatureSchema, DuplicateNamesRejected) {
  EXPECT_CRQ_ERROR(FeatureSchema({{"x", FeatureKind::kNumeric}, {"x", FeatureKind::kNumeric}}),
                   ErrorCode::kInvalidConfig);
}

TEST(FeatureVector, NonMissingEntriesMustBeFinite) {
  auto v = make_feature_vector({1.0, std::nan("")});
  EXPECT_CRQ_ERROR(check_feature_vector(v), ErrorCode::kInvalidDataset);
  v.missing[1] = true;
  EXPECT_NO_THROW(check_feature_vector(v));
  v.missing.pop_back();
  EXPECT_CRQ_ERROR(check_feature_vector(v), ErrorCode::kInvalidDataset);
}

TEST(Dataset, RejectsMismatchedLengths) {
  const auto schema = testing::numeric_schema(1);
  std::vector<FeatureVector> rows{make_feature_vector({1.0}), make_feature_vector({2.0})};
  EXPECT_CRQ_ERROR(Dataset(schema, rows, {Label::kNormal}, {1.0, 1.0}, {0, 1}), ErrorCode::kInvalidDataset);
  EXPECT_CRQ_ERROR(Dataset(schema, rows, {Label::kNormal, Label::kRisky}, {1.0}, {0, 1}),
                   ErrorCode::kInvalidDataset);
  EXPECT_CRQ_ERROR(Dataset(schema, rows, {Label::kNormal, Label::kRisky}, {1.0, 1.0}, {0}),
                   ErrorCode::kInvalidDataset);
}

TEST(Dataset, RejectsNonPositiveWeights) {
  const auto schema = testing::numeric_schema(1);
  std::vector<FeatureVector> rows{make_feature_vector({1.0})};
  EXPECT_CRQ_ERROR(Dataset(schema, rows, {Label::kNormal}, {0.0}, {0}), ErrorCode::kInvalidDataset);
  EXPECT_CRQ_ERROR(Dataset(schema, rows, {Label::kNormal}, {-1.0}, {0}), ErrorCode::kInvalidDataset);
}

TEST(Dataset, RejectsRowsOfTheWrongWidth) {
  const auto schema = testing::numeric_schema(2);
  EXPECT_CRQ_ERROR(Dataset(schema, {make_feature_vector({1.0})}, {Label::kNormal}, {1.0}, {0}),
                   ErrorCode::kSchemaMismatch);
}

TEST(Dataset, SelectConcatAndCounts) {
  const auto ds = testing::make_dataset({{1}, {2}, {3}}, {0, 1, 0});
  EXPECT_EQ(ds.count(Label::kRisky), 1u);
  const auto sub = ds.select({2, 0});
  EXPECT_EQ(sub.row(0).values[0], 3.0);
  EXPECT_EQ(sub.ids()[1], "row-0");
  const auto both = ds.concat(sub);
  EXPECT_EQ(both.size(), 5u);
  EXPECT_EQ(both.observed_column(0), (std::vector<double>{1, 2, 3, 3, 1}));
}

TEST(RiskScore, JsonRoundTripAndRange) {
  RiskScore s{"CRQ-1", 0.25, "v1", {0.8, 0.7, 0.1, 10}, true};
  EXPECT_EQ(Json(s).get<RiskScore>(), s);
  Json bad = s;
  bad["probability"] = 1.5;
  EXPECT_CRQ_ERROR(bad.get<RiskScore>(), ErrorCode::kValidationError);
}

}  // namespace
}  // namespace crqrisk
