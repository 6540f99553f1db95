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

#ifndef CRQRISK_FEATURES_HPP_
#define CRQRISK_FEATURES_HPP_

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "crqrisk/domain.hpp"

namespace crqrisk {

// ---------------------------------------------------------------------------
// Team profiles
// ---------------------------------------------------------------------------

struct TeamProfile {
  std::string team_id;
  std::size_t n_changes = 0;
  std::size_t n_risky = 0;
  double risky_rate = 0.5;
  bool operator==(const TeamProfile&) const = default;
};

inline double smoothed_rate(std::size_t n_risky, std::size_t n_changes, double alpha) {
  return (static_cast<double>(n_risky) + alpha) / (static_cast<double>(n_changes) + 2.0 * alpha);
}

/// Per-team smoothed risky rates plus the global rate used for teams
/// without history.
struct TeamProfiles {
  double alpha = 1.0;
  TeamProfile global{"*", 0, 0, 0.5};
  std::map<std::string, TeamProfile> teams;

  const TeamProfile& lookup(const std::string& team_id) const {
    auto it = teams.find(team_id);
    if (it == teams.end() || it->second.n_changes == 0) return global;
    return it->second;
  }
  double rate_for(const std::string& team_id) const { return lookup(team_id).risky_rate; }
  bool operator==(const TeamProfiles&) const = default;
};

inline TeamProfiles build_team_profiles(const std::vector<ChangeRequest>& history, const std::vector<Label>& labels,
                                        double alpha = 1.0) {
  if (!(alpha > 0.0)) throw Error(ErrorCode::kInvalidConfig, "smoothing alpha must be positive");
  if (history.size() != labels.size()) throw Error(ErrorCode::kInvalidDataset, "history/labels length differ");
  TeamProfiles p;
  p.alpha = alpha;
  for (std::size_t i = 0; i < history.size(); ++i) {
    auto& t = p.teams[history[i].team_id];
    t.team_id = history[i].team_id;
    ++t.n_changes;
    const bool risky = labels[i] == Label::kRisky;
    t.n_risky += risky;
    ++p.global.n_changes;
    p.global.n_risky += risky;
  }
  for (auto& [id, t] : p.teams) t.risky_rate = smoothed_rate(t.n_risky, t.n_changes, alpha);
  p.global.risky_rate = smoothed_rate(p.global.n_risky, p.global.n_changes, alpha);
  return p;
}

inline void to_json(Json& j, const TeamProfiles& p) {
  Json teams = Json::object();
  for (const auto& [id, t] : p.teams) teams[id] = {t.n_changes, t.n_risky};
  j = Json{{"alpha", p.alpha}, {"global", {p.global.n_changes, p.global.n_risky}}, {"teams", teams}};
}

inline void from_json(const Json& j, TeamProfiles& p) {
  p = TeamProfiles{};
  p.alpha = j.at("alpha").get<double>();
  p.global.n_changes = j.at("global").at(0).get<std::size_t>();
  p.global.n_risky = j.at("global").at(1).get<std::size_t>();
  p.global.risky_rate = smoothed_rate(p.global.n_risky, p.global.n_changes, p.alpha);
  for (const auto& [id, v] : j.at("teams").items()) {
    TeamProfile t{id, v.at(0).get<std::size_t>(), v.at(1).get<std::size_t>(), 0.0};
    t.risky_rate = smoothed_rate(t.n_risky, t.n_changes, p.alpha);
    p.teams.emplace(id, t);
  }
}

// ---------------------------------------------------------------------------
// Severity lexicon
// ---------------------------------------------------------------------------

inline std::vector<std::string> tokenize_lower(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

/// Word list whose hit fraction scores how alarming a text reads.
class SeverityLexicon {
 public:
  SeverityLexicon() = default;
  explicit SeverityLexicon(std::vector<std::string> terms) {
    for (auto& t : terms) {
      auto toks = tokenize_lower(t);
      if (toks.size() != 1) throw Error(ErrorCode::kInvalidConfig, "lexicon term '" + t + "' is not one word");
      if (set_.insert(toks[0]).second) terms_.push_back(toks[0]);
    }
  }

  static SeverityLexicon load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error(ErrorCode::kIoError, "cannot open lexicon '" + path + "'");
    std::vector<std::string> terms;
    std::string line;
    while (std::getline(is, line)) {
      auto toks = tokenize_lower(line);
      if (line.find_first_not_of(" \t\r") == std::string::npos || line.front() == '#') continue;
      if (toks.size() == 1) terms.push_back(toks[0]);
    }
    return SeverityLexicon(std::move(terms));
  }

  const std::vector<std::string>& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }

  /// Distinct lexicon terms present in `text` divided by lexicon size.
  double score(std::string_view text) const {
    if (terms_.empty()) return 0.0;
    std::unordered_set<std::string> hits;
    for (auto& tok : tokenize_lower(text)) {
      if (set_.count(tok)) hits.insert(std::move(tok));
    }
    return std::clamp(static_cast<double>(hits.size()) / static_cast<double>(terms_.size()), 0.0, 1.0);
  }

  bool operator==(const SeverityLexicon& o) const { return terms_ == o.terms_; }

 private:
  std::vector<std::string> terms_;
  std::unordered_set<std::string> set_;
};

inline const SeverityLexicon& default_lexicon() {
  static const SeverityLexicon lex({"emergency", "rollback", "outage", "critical", "urgent", "hotfix", "failure",
                                    "downtime", "breaking", "migration", "database", "security", "patch",
                                    "restart", "incident", "degraded", "production", "revert", "crash",
                                    "deprecate"});
  return lex;
}

inline double severity_score(std::string_view text, const SeverityLexicon& lexicon = default_lexicon()) {
  return lexicon.score(text);
}

// ---------------------------------------------------------------------------
// Schema and encoding
// ---------------------------------------------------------------------------

namespace feature_names {
inline constexpr const char* kDeclaredRisk = "declared_risk";
inline constexpr const char* kDeclaredImportance = "declared_importance";
inline constexpr const char* kTeamRiskRate = "team_risk_rate";
inline constexpr const char* kTeamVolume = "team_log_changes";
inline constexpr const char* kSummarySeverity = "summary_severity";
inline constexpr const char* kDescriptionSeverity = "description_severity";
inline constexpr const char* kDescriptionWords = "description_words";
inline constexpr const char* kQaPrefix = "qa.";
}  // namespace feature_names

inline std::string qa_feature_name(const std::string& key, const std::string& category) {
  return feature_names::kQaPrefix + key + "=" + category;
}

/// Schema covering every attribute and (question, answer) pair seen in
/// `records`; independent of record order.
inline FeatureSchema infer_schema(const std::vector<ChangeRequest>& records) {
  namespace fn = feature_names;
  std::set<std::string> attrs;
  std::map<std::string, std::set<std::string>> qa;
  for (const auto& r : records) {
    for (const auto& [k, v] : r.attributes) attrs.insert(k);
    for (const auto& [k, v] : r.qa_answers) qa[k].insert(v);
  }
  std::vector<FeatureSpec> f = {
      {fn::kDeclaredRisk, FeatureKind::kOrdinal},       {fn::kDeclaredImportance, FeatureKind::kOrdinal},
      {fn::kTeamRiskRate, FeatureKind::kDerived},       {fn::kTeamVolume, FeatureKind::kDerived},
      {fn::kSummarySeverity, FeatureKind::kDerived},    {fn::kDescriptionSeverity, FeatureKind::kDerived},
      {fn::kDescriptionWords, FeatureKind::kDerived},
  };
  for (const auto& a : attrs) f.push_back({a, FeatureKind::kNumeric});
  for (const auto& [k, cats] : qa) {
    for (const auto& c : cats) f.push_back({qa_feature_name(k, c), FeatureKind::kCategoricalOneHot});
  }
  return FeatureSchema(std::move(f));
}

/// Encodes one change. Unanswered questions mark all of their one-hot
/// columns missing; an answer outside the schema's categories encodes as
/// all zeros. Absent attributes are missing.
inline FeatureVector encode(const ChangeRequest& change, const TeamProfiles& profiles, const FeatureSchema& schema,
                            const SeverityLexicon& lexicon = default_lexicon(),
                            std::string_view expected_schema_version = {}) {
  namespace fn = feature_names;
  if (!expected_schema_version.empty() && expected_schema_version != schema.version()) {
    throw Error(ErrorCode::kSchemaMismatch, "schema " + schema.version() + " does not match expected " +
                                                std::string(expected_schema_version));
  }
  FeatureVector v;
  v.values.assign(schema.size(), 0.0);
  v.missing.assign(schema.size(), false);
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const auto& spec = schema[i];
    const std::string& name = spec.name;
    double& out = v.values[i];
    if (spec.kind == FeatureKind::kCategoricalOneHot) {
      if (name.rfind(fn::kQaPrefix, 0) != 0 || name.find('=') == std::string::npos) {
        throw Error(ErrorCode::kSchemaMismatch, "one-hot feature '" + name + "' is not qa.<key>=<answer>");
      }
      const auto eq = name.find('=');
      const std::string key = name.substr(3, eq - 3);
      const std::string cat = name.substr(eq + 1);
      auto it = change.qa_answers.find(key);
      if (it == change.qa_answers.end()) {
        v.missing[i] = true;
      } else {
        out = it->second == cat ? 1.0 : 0.0;
      }
    } else if (name == fn::kDeclaredRisk) {
      out = static_cast<double>(static_cast<int>(change.declared_risk));
    } else if (name == fn::kDeclaredImportance) {
      out = static_cast<double>(change.declared_importance);
    } else if (name == fn::kTeamRiskRate) {
      out = profiles.rate_for(change.team_id);
    } else if (name == fn::kTeamVolume) {
      auto it = profiles.teams.find(change.team_id);
      out = std::log1p(it == profiles.teams.end() ? 0.0 : static_cast<double>(it->second.n_changes));
    } else if (name == fn::kSummarySeverity) {
      out = lexicon.score(change.summary);
    } else if (name == fn::kDescriptionSeverity) {
      out = lexicon.score(change.description);
    } else if (name == fn::kDescriptionWords) {
      out = static_cast<double>(tokenize_lower(change.description).size());
    } else if (spec.kind == FeatureKind::kNumeric) {
      auto it = change.attributes.find(name);
      if (it == change.attributes.end()) {
        v.missing[i] = true;
      } else {
        out = it->second;
      }
    } else {
      throw Error(ErrorCode::kSchemaMismatch, "cannot derive feature '" + name + "'");
    }
  }
  return v;
}

/// Bundles everything needed to turn change requests into feature vectors.
struct FeatureEncoder {
  SchemaPtr schema;
  TeamProfiles profiles;
  SeverityLexicon lexicon = default_lexicon();

  FeatureVector operator()(const ChangeRequest& c) const { return encode(c, profiles, *schema, lexicon); }

  std::vector<FeatureVector> encode_all(const std::vector<ChangeRequest>& records) const {
    std::vector<FeatureVector> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back((*this)(r));
    return out;
  }

  /// Unit-weight dataset in record order.
  Dataset dataset(const std::vector<ChangeRequest>& records, const std::vector<Label>& labels) const {
    if (records.size() != labels.size()) throw Error(ErrorCode::kInvalidDataset, "records/labels length differ");
    std::vector<Timestamp> ts;
    std::vector<std::string> ids;
    ts.reserve(records.size());
    ids.reserve(records.size());
    for (const auto& r : records) {
      ts.push_back(r.submitted_at);
      ids.push_back(r.id);
    }
    return Dataset(schema, encode_all(records), labels, std::vector<double>(records.size(), 1.0), std::move(ts),
                   std::move(ids));
  }
};

inline FeatureEncoder make_encoder(const std::vector<ChangeRequest>& history, const std::vector<Label>& labels,
                                   double alpha = 1.0, const SeverityLexicon& lexicon = default_lexicon()) {
  FeatureEncoder e;
  e.schema = std::make_shared<const FeatureSchema>(infer_schema(history));
  e.profiles = build_team_profiles(history, labels, alpha);
  e.lexicon = lexicon;
  return e;
}

// ---------------------------------------------------------------------------
// Imputation
// ---------------------------------------------------------------------------

enum class ImputeStrategy { kMean, kMedian };

inline ImputeStrategy parse_impute_strategy(std::string_view s) {
  if (s == "mean") return ImputeStrategy::kMean;
  if (s == "median") return ImputeStrategy::kMedian;
  throw Error(ErrorCode::kInvalidConfig, "unknown imputation strategy '" + std::string(s) + "'");
}

/// Per-feature fill values from the observed entries of `ds`.
inline std::vector<double> fit_imputer(const Dataset& ds, ImputeStrategy strategy) {
  std::vector<double> fill(ds.n_features(), 0.0);
  for (std::size_t j = 0; j < ds.n_features(); ++j) {
    auto col = ds.observed_column(j);
    if (col.empty()) throw Error(ErrorCode::kAllMissingFeature, (*ds.schema())[j].name);
    if (strategy == ImputeStrategy::kMean) {
      double s = 0.0;
      for (double x : col) s += x;
      fill[j] = s / static_cast<double>(col.size());
    } else {
      std::sort(col.begin(), col.end());
      const std::size_t n = col.size();
      fill[j] = n % 2 ? col[n / 2] : 0.5 * (col[n / 2 - 1] + col[n / 2]);
    }
  }
  return fill;
}

inline Dataset apply_imputation(const Dataset& ds, const std::vector<double>& fill) {
  if (fill.size() != ds.n_features()) throw Error(ErrorCode::kSchemaMismatch, "fill vector width");
  bool any = false;
  for (const auto& r : ds.rows()) any = any || r.any_missing();
  if (!any) return ds;
  auto rows = ds.rows();
  for (auto& r : rows) {
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (r.missing[j]) {
        r.values[j] = fill[j];
        r.missing[j] = false;
      }
    }
  }
  return ds.with_rows(std::move(rows));
}

inline Dataset impute(const Dataset& ds, ImputeStrategy strategy) {
  return apply_imputation(ds, fit_imputer(ds, strategy));
}

}  // namespace crqrisk

#endif  // CRQRISK_FEATURES_HPP_
