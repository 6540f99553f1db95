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

#ifndef CRQRISK_DOMAIN_HPP_
#define CRQRISK_DOMAIN_HPP_

#include <cmath>
#include <cstdio>
#include <cstdint>
#include <ctime>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "crqrisk/error.hpp"

namespace crqrisk {

using Json = nlohmann::json;

/// UTC seconds since the epoch.
using Timestamp = std::int64_t;

inline constexpr Timestamp kSecondsPerDay = 86400;

inline std::string format_iso8601(Timestamp t) {
  std::time_t tt = static_cast<std::time_t>(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline Timestamp parse_iso8601(std::string_view text) {
  std::tm tm{};
  std::string s(text);
  const char* end = strptime(s.c_str(), "%Y-%m-%dT%H:%M:%S", &tm);
  if (end == nullptr || (*end != '\0' && *end != 'Z')) {
    throw Error(ErrorCode::kParseError, "bad ISO-8601 timestamp '" + s + "'");
  }
  return static_cast<Timestamp>(timegm(&tm));
}

/// Accepts integer seconds or an ISO-8601 string.
inline Timestamp timestamp_from_json(const Json& j) {
  if (j.is_number_integer()) return j.get<Timestamp>();
  if (j.is_string()) return parse_iso8601(j.get<std::string>());
  throw Error(ErrorCode::kParseError, "timestamp must be integer seconds or ISO-8601");
}

enum class RiskLevel { kLow = 0, kMedium = 1, kHigh = 2 };

inline std::string_view to_string(RiskLevel r) {
  switch (r) {
    case RiskLevel::kLow: return "low";
    case RiskLevel::kMedium: return "medium";
    case RiskLevel::kHigh: return "high";
  }
  return "?";
}

inline RiskLevel parse_risk_level(std::string_view s) {
  if (s == "low") return RiskLevel::kLow;
  if (s == "medium") return RiskLevel::kMedium;
  if (s == "high") return RiskLevel::kHigh;
  throw Error(ErrorCode::kUnknownRiskLevel,
              "declared_risk '" + std::string(s) + "' is not one of low|medium|high");
}

enum class Label { kNormal = 0, kRisky = 1 };

inline std::string_view to_string(Label l) { return l == Label::kRisky ? "risky" : "normal"; }

inline Label parse_label(std::string_view s) {
  if (s == "risky" || s == "1") return Label::kRisky;
  if (s == "normal" || s == "0") return Label::kNormal;
  throw Error(ErrorCode::kParseError, "unknown label '" + std::string(s) + "'");
}

inline double label_value(Label l) { return l == Label::kRisky ? 1.0 : 0.0; }

/// One raw change record. `attributes` holds optional numeric descriptive
/// fields (change size, affected services, ...); the set is open-ended.
struct ChangeRequest {
  std::string id;
  Timestamp submitted_at = 0;
  std::string summary;
  std::string description;
  std::map<std::string, std::string> qa_answers;
  std::string team_id;
  RiskLevel declared_risk = RiskLevel::kLow;
  int declared_importance = 1;
  std::map<std::string, double> attributes;

  bool operator==(const ChangeRequest&) const = default;
};

/// Returns the record unchanged when every field invariant holds.
inline const ChangeRequest& validate_change(const ChangeRequest& raw) {
  if (raw.id.empty()) throw Error(ErrorCode::kMissingId, "field 'id' is empty");
  const int r = static_cast<int>(raw.declared_risk);
  if (r < 0 || r > 2) {
    throw Error(ErrorCode::kUnknownRiskLevel,
                "field 'declared_risk' holds " + std::to_string(r));
  }
  if (raw.qa_answers.empty()) {
    throw Error(ErrorCode::kEmptyQaMap, "field 'qa_answers' is empty for '" + raw.id + "'");
  }
  if (raw.declared_importance < 1 || raw.declared_importance > 5) {
    throw Error(ErrorCode::kInvalidImportance,
                "field 'declared_importance' must be in 1..5, got " +
                    std::to_string(raw.declared_importance));
  }
  for (const auto& [name, value] : raw.attributes) {
    if (!std::isfinite(value)) {
      throw Error(ErrorCode::kValidationError, "attribute '" + name + "' is not finite");
    }
  }
  return raw;
}

inline void to_json(Json& j, const ChangeRequest& c) {
  j = Json{{"id", c.id},
           {"submitted_at", c.submitted_at},
           {"summary", c.summary},
           {"description", c.description},
           {"qa_answers", c.qa_answers},
           {"team_id", c.team_id},
           {"declared_risk", to_string(c.declared_risk)},
           {"declared_importance", c.declared_importance}};
  if (!c.attributes.empty()) j["attributes"] = c.attributes;
}

inline void from_json(const Json& j, ChangeRequest& c) {
  if (!j.is_object()) throw Error(ErrorCode::kParseError, "change request must be an object");
  c.id = j.value("id", std::string{});
  c.submitted_at = j.contains("submitted_at") ? timestamp_from_json(j.at("submitted_at")) : 0;
  c.summary = j.value("summary", std::string{});
  c.description = j.value("description", std::string{});
  c.qa_answers = j.value("qa_answers", std::map<std::string, std::string>{});
  c.team_id = j.value("team_id", std::string{});
  c.declared_risk = parse_risk_level(j.value("declared_risk", std::string{}));
  c.declared_importance = j.value("declared_importance", 0);
  c.attributes = j.value("attributes", std::map<std::string, double>{});
}

enum class FeatureKind { kNumeric, kOrdinal, kCategoricalOneHot, kDerived };

inline std::string_view to_string(FeatureKind k) {
  switch (k) {
    case FeatureKind::kNumeric: return "numeric";
    case FeatureKind::kOrdinal: return "ordinal";
    case FeatureKind::kCategoricalOneHot: return "categorical_onehot";
    case FeatureKind::kDerived: return "derived";
  }
  return "?";
}

inline FeatureKind parse_feature_kind(std::string_view s) {
  if (s == "numeric") return FeatureKind::kNumeric;
  if (s == "ordinal") return FeatureKind::kOrdinal;
  if (s == "categorical_onehot") return FeatureKind::kCategoricalOneHot;
  if (s == "derived") return FeatureKind::kDerived;
  throw Error(ErrorCode::kParseError, "unknown feature kind '" + std::string(s) + "'");
}

struct FeatureSpec {
  std::string name;
  FeatureKind kind = FeatureKind::kNumeric;
  bool operator==(const FeatureSpec&) const = default;
};

/// Ordered feature list. The version tag is a content hash of the names and
/// kinds, so two schemas with the same layout share a version.
class FeatureSchema {
 public:
  FeatureSchema() = default;

  explicit FeatureSchema(std::vector<FeatureSpec> features) : features_(std::move(features)) {
    for (std::size_t i = 0; i < features_.size(); ++i) {
      if (!index_.emplace(features_[i].name, i).second) {
        throw Error(ErrorCode::kInvalidConfig, "duplicate feature name '" + features_[i].name + "'");
      }
    }
    version_ = compute_version();
  }

  std::size_t size() const { return features_.size(); }
  const std::vector<FeatureSpec>& features() const { return features_; }
  const FeatureSpec& operator[](std::size_t i) const { return features_[i]; }
  const std::string& version() const { return version_; }

  std::optional<std::size_t> index_of(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    out.reserve(features_.size());
    for (const auto& f : features_) out.push_back(f.name);
    return out;
  }

  bool operator==(const FeatureSchema& o) const { return features_ == o.features_; }

 private:
  std::string compute_version() const {
    // FNV-1a over "name:kind;" pairs.
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](std::string_view s) {
      for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
      }
    };
    for (const auto& f : features_) {
      mix(f.name);
      mix(":");
      mix(to_string(f.kind));
      mix(";");
    }
    char buf[24];
    std::snprintf(buf, sizeof(buf), "fs-%016llx", static_cast<unsigned long long>(h));
    return buf;
  }

  std::vector<FeatureSpec> features_;
  std::unordered_map<std::string, std::size_t> index_;
  std::string version_;
};

inline void to_json(Json& j, const FeatureSchema& s) {
  Json feats = Json::array();
  for (const auto& f : s.features()) feats.push_back({{"name", f.name}, {"kind", to_string(f.kind)}});
  j = Json{{"version", s.version()}, {"features", feats}};
}

inline void from_json(const Json& j, FeatureSchema& s) {
  std::vector<FeatureSpec> feats;
  for (const auto& f : j.at("features")) {
    feats.push_back({f.at("name").get<std::string>(), parse_feature_kind(f.at("kind").get<std::string>())});
  }
  s = FeatureSchema(std::move(feats));
  if (j.contains("version") && j.at("version").get<std::string>() != s.version()) {
    throw Error(ErrorCode::kSchemaMismatch, "schema version tag does not match its feature list");
  }
}

using SchemaPtr = std::shared_ptr<const FeatureSchema>;

struct FeatureVector {
  std::vector<double> values;
  std::vector<bool> missing;

  std::size_t size() const { return values.size(); }
  bool is_missing(std::size_t i) const { return missing[i]; }
  bool any_missing() const {
    for (bool m : missing) {
      if (m) return true;
    }
    return false;
  }
  bool operator==(const FeatureVector&) const = default;
};

inline FeatureVector make_feature_vector(std::vector<double> values) {
  FeatureVector v;
  v.missing.assign(values.size(), false);
  v.values = std::move(values);
  return v;
}

inline void check_feature_vector(const FeatureVector& v) {
  if (v.values.size() != v.missing.size()) {
    throw Error(ErrorCode::kInvalidDataset, "values and missing_mask lengths differ");
  }
  for (std::size_t i = 0; i < v.values.size(); ++i) {
    if (!v.missing[i] && !std::isfinite(v.values[i])) {
      throw Error(ErrorCode::kInvalidDataset, "non-missing entry " + std::to_string(i) + " is not finite");
    }
  }
}

/// Labeled, weighted, timestamped feature matrix. Construction enforces
/// equal list lengths, row width equal to the schema size, and weights > 0.
class Dataset {
 public:
  Dataset() = default;

  Dataset(SchemaPtr schema, std::vector<FeatureVector> rows, std::vector<Label> labels,
          std::vector<double> weights, std::vector<Timestamp> timestamps,
          std::vector<std::string> ids = {})
      : schema_(std::move(schema)),
        rows_(std::move(rows)),
        labels_(std::move(labels)),
        weights_(std::move(weights)),
        timestamps_(std::move(timestamps)),
        ids_(std::move(ids)) {
    if (!schema_) throw Error(ErrorCode::kInvalidDataset, "dataset requires a schema");
    const std::size_t n = rows_.size();
    if (labels_.size() != n || weights_.size() != n || timestamps_.size() != n) {
      throw Error(ErrorCode::kInvalidDataset,
                  "list lengths differ: rows=" + std::to_string(n) +
                      " labels=" + std::to_string(labels_.size()) +
                      " weights=" + std::to_string(weights_.size()) +
                      " timestamps=" + std::to_string(timestamps_.size()));
    }
    if (ids_.empty()) {
      ids_.reserve(n);
      for (std::size_t i = 0; i < n; ++i) ids_.push_back("row-" + std::to_string(i));
    } else if (ids_.size() != n) {
      throw Error(ErrorCode::kInvalidDataset, "ids length differs from rows");
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!(weights_[i] > 0.0) || !std::isfinite(weights_[i])) {
        throw Error(ErrorCode::kInvalidDataset, "weight at row " + std::to_string(i) + " is not positive");
      }
      if (rows_[i].size() != schema_->size()) {
        throw Error(ErrorCode::kSchemaMismatch, "row " + std::to_string(i) + " width " +
                                                   std::to_string(rows_[i].size()) + " != schema size " +
                                                   std::to_string(schema_->size()));
      }
      check_feature_vector(rows_[i]);
    }
  }

  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }
  std::size_t n_features() const { return schema_ ? schema_->size() : 0; }

  const SchemaPtr& schema() const { return schema_; }
  const std::vector<FeatureVector>& rows() const { return rows_; }
  const std::vector<Label>& labels() const { return labels_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<Timestamp>& timestamps() const { return timestamps_; }
  const std::vector<std::string>& ids() const { return ids_; }

  const FeatureVector& row(std::size_t i) const { return rows_[i]; }
  Label label(std::size_t i) const { return labels_[i]; }

  std::size_t count(Label l) const {
    std::size_t c = 0;
    for (Label x : labels_) c += (x == l);
    return c;
  }

  /// Subset in the order given by `indices`.
  Dataset select(const std::vector<std::size_t>& indices) const {
    std::vector<FeatureVector> rows;
    std::vector<Label> labels;
    std::vector<double> weights;
    std::vector<Timestamp> ts;
    std::vector<std::string> ids;
    rows.reserve(indices.size());
    for (std::size_t i : indices) {
      rows.push_back(rows_.at(i));
      labels.push_back(labels_[i]);
      weights.push_back(weights_[i]);
      ts.push_back(timestamps_[i]);
      ids.push_back(ids_[i]);
    }
    return Dataset(schema_, std::move(rows), std::move(labels), std::move(weights), std::move(ts),
                   std::move(ids));
  }

  Dataset with_weights(std::vector<double> weights) const {
    return Dataset(schema_, rows_, labels_, std::move(weights), timestamps_, ids_);
  }

  Dataset with_rows(std::vector<FeatureVector> rows) const {
    return Dataset(schema_, std::move(rows), labels_, weights_, timestamps_, ids_);
  }

  Dataset with_labels(std::vector<Label> labels) const {
    return Dataset(schema_, rows_, std::move(labels), weights_, timestamps_, ids_);
  }

  /// Rows of `other` appended after this dataset's rows; schemas must match.
  Dataset concat(const Dataset& other) const {
    if (!(*schema_ == *other.schema_)) throw Error(ErrorCode::kSchemaMismatch, "concat of differing schemas");
    auto rows = rows_;
    auto labels = labels_;
    auto weights = weights_;
    auto ts = timestamps_;
    auto ids = ids_;
    rows.insert(rows.end(), other.rows_.begin(), other.rows_.end());
    labels.insert(labels.end(), other.labels_.begin(), other.labels_.end());
    weights.insert(weights.end(), other.weights_.begin(), other.weights_.end());
    ts.insert(ts.end(), other.timestamps_.begin(), other.timestamps_.end());
    ids.insert(ids.end(), other.ids_.begin(), other.ids_.end());
    return Dataset(schema_, std::move(rows), std::move(labels), std::move(weights), std::move(ts),
                   std::move(ids));
  }

  /// Non-missing values of feature `j`.
  std::vector<double> observed_column(std::size_t j) const {
    std::vector<double> out;
    out.reserve(rows_.size());
    for (const auto& r : rows_) {
      if (!r.missing[j]) out.push_back(r.values[j]);
    }
    return out;
  }

 private:
  SchemaPtr schema_;
  std::vector<FeatureVector> rows_;
  std::vector<Label> labels_;
  std::vector<double> weights_;
  std::vector<Timestamp> timestamps_;
  std::vector<std::string> ids_;
};

/// Entropy-based uncertainty decomposition of one prediction, in bits.
struct UncertaintyBreakdown {
  double total = 0.0;
  double expected_data = 0.0;
  double knowledge = 0.0;
  int n_members = 0;
  bool operator==(const UncertaintyBreakdown&) const = default;
};

inline void to_json(Json& j, const UncertaintyBreakdown& u) {
  j = Json{{"total", u.total}, {"expected_data", u.expected_data}, {"knowledge", u.knowledge},
           {"n_members", u.n_members}};
}

inline void from_json(const Json& j, UncertaintyBreakdown& u) {
  u.total = j.at("total").get<double>();
  u.expected_data = j.at("expected_data").get<double>();
  u.knowledge = j.at("knowledge").get<double>();
  u.n_members = j.at("n_members").get<int>();
}

struct RiskScore {
  std::string change_id;
  double probability = 0.0;
  std::string model_version;
  UncertaintyBreakdown uncertainty;
  /// probability >= the model's operating threshold.
  bool flagged = false;
  bool operator==(const RiskScore&) const = default;
};

inline void to_json(Json& j, const RiskScore& s) {
  j = Json{{"change_id", s.change_id}, {"probability", s.probability}, {"model_version", s.model_version},
           {"uncertainty", s.uncertainty}, {"flagged", s.flagged}};
}

inline void from_json(const Json& j, RiskScore& s) {
  s.change_id = j.at("change_id").get<std::string>();
  s.probability = j.at("probability").get<double>();
  s.model_version = j.value("model_version", std::string{});
  s.uncertainty = j.at("uncertainty").get<UncertaintyBreakdown>();
  s.flagged = j.value("flagged", false);
  if (!(s.probability >= 0.0 && s.probability <= 1.0)) {
    throw Error(ErrorCode::kValidationError, "probability outside [0,1]");
  }
}

}  // namespace crqrisk

#endif  // CRQRISK_DOMAIN_HPP_
