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

#ifndef CRQRISK_CORPUS_HPP_
#define CRQRISK_CORPUS_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "crqrisk/domain.hpp"

namespace crqrisk {

enum class RiskMechanism { kLinear, kInteraction };

inline std::string_view to_string(RiskMechanism m) {
  return m == RiskMechanism::kLinear ? "linear" : "interaction";
}

inline RiskMechanism parse_risk_mechanism(std::string_view s) {
  if (s == "linear") return RiskMechanism::kLinear;
  if (s == "interaction") return RiskMechanism::kInteraction;
  throw Error(ErrorCode::kInvalidConfig, "unknown risk mechanism '" + std::string(s) + "'");
}

struct GeneratorConfig {
  std::size_t n_records = 1000;
  double risky_prevalence = 0.0009;
  std::size_t n_teams = 40;
  std::uint64_t seed = 0;
  RiskMechanism risk_mechanism = RiskMechanism::kInteraction;
  Timestamp start_time = 1704067200;  // 2024-01-01T00:00:00Z
  /// 60K changes per week is roughly one every 10 s.
  Timestamp interval_seconds = 10;
  /// Index of the first record; ids continue from here so consecutive
  /// generated windows do not collide.
  std::size_t first_index = 0;
};

enum class DriftKind { kMeanShift, kScaleShift, kCategorySwap };

inline std::string_view to_string(DriftKind k) {
  switch (k) {
    case DriftKind::kMeanShift: return "mean_shift";
    case DriftKind::kScaleShift: return "scale_shift";
    case DriftKind::kCategorySwap: return "category_swap";
  }
  return "?";
}

inline DriftKind parse_drift_kind(std::string_view s) {
  if (s == "mean_shift") return DriftKind::kMeanShift;
  if (s == "scale_shift") return DriftKind::kScaleShift;
  if (s == "category_swap") return DriftKind::kCategorySwap;
  throw Error(ErrorCode::kInvalidConfig, "unknown drift kind '" + std::string(s) + "'");
}

/// `feature_name` is a numeric attribute (e.g. "change_size"), a Q&A key
/// (e.g. "previously_implemented"), or "declared_risk".
struct DriftInjection {
  std::string feature_name;
  std::size_t onset_index = 0;
  DriftKind kind = DriftKind::kMeanShift;
  double magnitude = 0.0;
};

struct GeneratedCorpus {
  std::vector<ChangeRequest> records;
  std::vector<Label> labels;
};

namespace corpus_detail {

struct Question {
  const char* key;
  std::vector<std::string> categories;
  std::vector<double> normal_probs;
};

inline const std::vector<Question>& questions() {
  static const std::vector<Question> q = {
      {"previously_implemented", {"yes", "no"}, {0.7, 0.3}},
      {"rollback_plan", {"tested", "documented", "none"}, {0.5, 0.35, 0.15}},
      {"tested_in_staging", {"yes", "no"}, {0.8, 0.2}},
      {"customer_facing", {"yes", "no"}, {0.4, 0.6}},
      {"peak_hours", {"yes", "no"}, {0.15, 0.85}},
  };
  return q;
}

struct Attribute {
  const char* name;
  double mean;
  double sd;
};

// change_size is log10(lines changed); window_hours is log2(planned hours).
inline const std::array<Attribute, 3>& attributes() {
  static const std::array<Attribute, 3> a = {{
      {"change_size", 2.0, 0.6},
      {"affected_services", 2.0, 1.0},
      {"window_hours", 1.0, 0.8},
  }};
  return a;
}

inline const std::vector<std::string>& neutral_words() {
  static const std::vector<std::string> w = {
      "update", "config", "service", "deploy", "release", "change", "version", "cluster",
      "upgrade", "library", "feature", "flag", "endpoint", "cache", "queue", "schema",
      "store", "inventory", "checkout", "search", "catalog", "pricing", "payment", "team",
      "nightly", "job", "pipeline", "monitoring", "alerting", "dashboard", "network", "load",
      "balancer", "certificate", "rotation", "capacity", "scaling", "index", "table", "api"};
  return w;
}

// Kept in sync with the default severity lexicon in features.hpp.
inline const std::vector<std::string>& severity_words() {
  static const std::vector<std::string> w = {
      "emergency", "rollback", "outage", "critical", "urgent", "hotfix", "failure",
      "downtime", "breaking", "migration", "database", "security", "patch", "restart",
      "incident", "degraded", "production", "revert", "crash", "deprecate"};
  return w;
}

inline std::size_t draw_categorical(std::mt19937_64& rng, const std::vector<double>& probs) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double r = u(rng);
  for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
    if (r < probs[i]) return i;
    r -= probs[i];
  }
  return probs.size() - 1;
}

inline std::string make_text(std::mt19937_64& rng, int n_words, double severity_rate) {
  std::uniform_int_distribution<std::size_t> pick(0, neutral_words().size() - 1);
  std::bernoulli_distribution sev(severity_rate);
  std::vector<std::string> words;
  for (int i = 0; i < n_words; ++i) words.push_back(neutral_words()[pick(rng)]);
  for (const auto& s : severity_words()) {
    if (sev(rng)) {
      std::uniform_int_distribution<std::size_t> pos(0, words.size());
      words.insert(words.begin() + static_cast<std::ptrdiff_t>(pos(rng)), s);
    }
  }
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out += ' ';
    out += words[i];
  }
  return out;
}

inline std::string team_name(std::size_t k) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "team-%03zu", k);
  return buf;
}

inline std::string record_id(std::size_t i) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "CRQ%08zu", i);
  return buf;
}

/// Latent class-conditional profile of a record.
enum class Profile { kNormal, kConjunction, kExposure, kLinearRisky };

inline bool is_attribute(std::string_view name) {
  for (const auto& a : attributes()) {
    if (name == a.name) return true;
  }
  return false;
}

inline const Question* find_question(std::string_view key) {
  if (key.substr(0, 3) == "qa.") key.remove_prefix(3);
  for (const auto& q : questions()) {
    if (key == q.key) return &q;
  }
  return nullptr;
}

}  // namespace corpus_detail

inline void validate_generator_config(const GeneratorConfig& c) {
  if (c.n_records == 0) throw Error(ErrorCode::kInvalidConfig, "n_records must be positive");
  if (!(c.risky_prevalence > 0.0 && c.risky_prevalence < 1.0)) {
    throw Error(ErrorCode::kInvalidConfig, "risky_prevalence must lie in (0,1)");
  }
  if (c.n_teams == 0) throw Error(ErrorCode::kInvalidConfig, "n_teams must be positive");
}

inline void validate_drift(const DriftInjection& d, const GeneratorConfig& c) {
  using namespace corpus_detail;
  if (d.onset_index >= c.first_index + c.n_records) {
    throw Error(ErrorCode::kInvalidConfig, "drift onset_index beyond n_records");
  }
  if (!std::isfinite(d.magnitude)) throw Error(ErrorCode::kInvalidConfig, "drift magnitude must be finite");
  const bool numeric = is_attribute(d.feature_name);
  const bool categorical = find_question(d.feature_name) != nullptr || d.feature_name == "declared_risk";
  if (d.kind == DriftKind::kCategorySwap ? !categorical : !numeric) {
    throw Error(ErrorCode::kInvalidConfig, "drift " + std::string(to_string(d.kind)) +
                                               " does not apply to feature '" + d.feature_name + "'");
  }
}

/// Synthetic change stream. Labels are drawn first and features conditional
/// on the label's latent profile; drift then rewrites observed fields of
/// records at or after each onset without touching the label or the base
/// random stream, so records before every onset match the no-drift output.
inline GeneratedCorpus generate(const GeneratorConfig& config, const std::vector<DriftInjection>& drifts = {}) {
  using namespace corpus_detail;
  validate_generator_config(config);
  for (const auto& d : drifts) validate_drift(d, config);

  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  // Team popularity ~ 1/sqrt(rank); the first fifth of a seeded
  // permutation is the high-risk group.
  std::vector<double> team_weight(config.n_teams);
  double wsum = 0.0;
  for (std::size_t k = 0; k < config.n_teams; ++k) {
    team_weight[k] = 1.0 / std::sqrt(static_cast<double>(k) + 1.0);
    wsum += team_weight[k];
  }
  for (auto& w : team_weight) w /= wsum;
  std::vector<std::size_t> perm(config.n_teams);
  for (std::size_t k = 0; k < perm.size(); ++k) perm[k] = k;
  std::shuffle(perm.begin(), perm.end(), rng);
  const std::size_t n_high = std::max<std::size_t>(1, (config.n_teams + 4) / 5);
  std::vector<std::size_t> high_teams(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_high));
  std::vector<double> high_weight;
  for (std::size_t k : high_teams) high_weight.push_back(team_weight[k]);
  double hsum = 0.0;
  for (double w : high_weight) hsum += w;
  for (auto& w : high_weight) w /= hsum;

  const std::vector<double> risk_normal = {0.55, 0.30, 0.15};
  const std::vector<double> risk_linear = {0.25, 0.35, 0.40};
  const std::vector<double> importance_normal = {0.25, 0.30, 0.25, 0.15, 0.05};
  const std::vector<double> importance_linear = {0.10, 0.20, 0.30, 0.25, 0.15};

  GeneratedCorpus out;
  out.records.reserve(config.n_records);
  out.labels.reserve(config.n_records);

  for (std::size_t n = 0; n < config.n_records; ++n) {
    const std::size_t index = config.first_index + n;
    const bool risky = unif(rng) < config.risky_prevalence;
    Profile profile = Profile::kNormal;
    if (risky) {
      if (config.risk_mechanism == RiskMechanism::kLinear) {
        profile = Profile::kLinearRisky;
      } else {
        profile = unif(rng) < 0.55 ? Profile::kConjunction : Profile::kExposure;
      }
    }

    ChangeRequest c;
    c.id = record_id(index);
    c.submitted_at = config.start_time + static_cast<Timestamp>(index) * config.interval_seconds;

    // Team.
    std::size_t team;
    const bool from_high = profile == Profile::kConjunction ||
                           (profile == Profile::kLinearRisky && unif(rng) < 0.5);
    if (from_high) {
      team = high_teams[draw_categorical(rng, high_weight)];
    } else {
      team = draw_categorical(rng, team_weight);
    }
    c.team_id = team_name(team);

    // Declared risk and importance.
    if (profile == Profile::kConjunction) {
      c.declared_risk = RiskLevel::kLow;
    } else if (profile == Profile::kExposure) {
      c.declared_risk = unif(rng) < 0.8 ? RiskLevel::kHigh : RiskLevel::kMedium;
    } else if (profile == Profile::kLinearRisky) {
      c.declared_risk = static_cast<RiskLevel>(draw_categorical(rng, risk_linear));
    } else {
      c.declared_risk = static_cast<RiskLevel>(draw_categorical(rng, risk_normal));
    }
    c.declared_importance = 1 + static_cast<int>(draw_categorical(
                                    rng, profile == Profile::kLinearRisky ? importance_linear : importance_normal));

    // Q&A answers; about 6% of questions go unanswered.
    for (const auto& q : questions()) {
      const bool answered = unif(rng) >= 0.06;
      std::vector<double> probs = q.normal_probs;
      const std::string key = q.key;
      if (profile == Profile::kConjunction && key == "previously_implemented") {
        probs = {0.0, 1.0};
      } else if (profile == Profile::kExposure && key == "rollback_plan") {
        probs = {0.25, 0.25, 0.5};
      } else if (profile == Profile::kLinearRisky) {
        if (key == "previously_implemented") probs = {0.4, 0.6};
        if (key == "rollback_plan") probs = {0.3, 0.35, 0.35};
        if (key == "tested_in_staging") probs = {0.55, 0.45};
      }
      const std::size_t cat = draw_categorical(rng, probs);
      if (answered || (profile == Profile::kConjunction && key == "previously_implemented")) {
        c.qa_answers[key] = q.categories[cat];
      }
    }
    if (c.qa_answers.empty()) c.qa_answers["peak_hours"] = "no";

    // Numeric attributes, expressed as latent z-scores.
    for (const auto& a : attributes()) {
      double z = normal(rng);
      const std::string name = a.name;
      if (profile == Profile::kExposure && name == "change_size") {
        z = (unif(rng) < 0.5 ? -2.2 : 2.2) + 0.5 * z;
      } else if (profile == Profile::kLinearRisky && name == "change_size") {
        z += 1.2;
      } else if (profile == Profile::kLinearRisky && name == "affected_services") {
        z += 0.6;
      }
      const bool missing = name == "window_hours" && unif(rng) < 0.10;
      if (!missing) c.attributes[name] = a.mean + a.sd * z;
    }

    // Free text.
    const double sev = profile == Profile::kExposure      ? 0.12
                       : profile == Profile::kLinearRisky ? 0.08
                                                          : 0.02;
    std::uniform_int_distribution<int> summary_len(4, 8);
    std::uniform_int_distribution<int> description_len(15, 40);
    c.summary = make_text(rng, summary_len(rng), sev * 0.5);
    c.description = make_text(rng, description_len(rng), sev);

    out.records.push_back(std::move(c));
    out.labels.push_back(risky ? Label::kRisky : Label::kNormal);
  }

  // Drift rewrites observed fields only.
  for (std::size_t d = 0; d < drifts.size(); ++d) {
    const auto& drift = drifts[d];
    std::mt19937_64 drift_rng(config.seed ^ (0x9E3779B97F4A7C15ULL * (d + 1)));
    for (std::size_t n = 0; n < out.records.size(); ++n) {
      if (config.first_index + n < drift.onset_index) continue;
      auto& c = out.records[n];
      switch (drift.kind) {
        case DriftKind::kMeanShift:
        case DriftKind::kScaleShift: {
          const Attribute* attr = nullptr;
          for (const auto& a : attributes()) {
            if (drift.feature_name == a.name) attr = &a;
          }
          auto it = c.attributes.find(drift.feature_name);
          if (it == c.attributes.end()) break;
          if (drift.kind == DriftKind::kMeanShift) {
            it->second += drift.magnitude * attr->sd;
          } else {
            it->second = attr->mean + (it->second - attr->mean) * drift.magnitude;
          }
          break;
        }
        case DriftKind::kCategorySwap: {
          const bool hit = unif(drift_rng) < std::min(1.0, std::abs(drift.magnitude));
          if (!hit) break;
          if (drift.feature_name == "declared_risk") {
            if (c.declared_risk == RiskLevel::kLow) {
              c.declared_risk = RiskLevel::kHigh;
            } else if (c.declared_risk == RiskLevel::kHigh) {
              c.declared_risk = RiskLevel::kLow;
            }
            break;
          }
          const Question* q = find_question(drift.feature_name);
          auto it = c.qa_answers.find(q->key);
          if (it == c.qa_answers.end()) break;
          const auto& cats = q->categories;
          const auto pos = static_cast<std::size_t>(std::find(cats.begin(), cats.end(), it->second) - cats.begin());
          it->second = cats[(pos + 1) % cats.size()];
          break;
        }
      }
    }
  }
  return out;
}

inline std::string to_jsonl_line(const ChangeRequest& c) { return Json(c).dump(); }

inline void write_corpus(const std::string& path, const std::vector<ChangeRequest>& records) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(ErrorCode::kIoError, "cannot open '" + path + "' for writing");
  for (const auto& r : records) os << to_jsonl_line(r) << '\n';
  if (!os) throw Error(ErrorCode::kIoError, "write to '" + path + "' failed");
}

inline void write_labels(const std::string& path, const std::vector<ChangeRequest>& records,
                         const std::vector<Label>& labels) {
  if (records.size() != labels.size()) throw Error(ErrorCode::kInvalidDataset, "records/labels length differ");
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(ErrorCode::kIoError, "cannot open '" + path + "' for writing");
  os << "id,label\n";
  for (std::size_t i = 0; i < records.size(); ++i) os << records[i].id << ',' << to_string(labels[i]) << '\n';
}

/// Parses line-delimited change records; blank lines are skipped. Every
/// record must pass validate_change and ids must be unique.
inline std::vector<ChangeRequest> parse_corpus(std::istream& is, const std::string& source = "<stream>") {
  std::vector<ChangeRequest> out;
  std::unordered_map<std::string, std::size_t> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ChangeRequest c;
    try {
      c = Json::parse(line).get<ChangeRequest>();
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::kParseError, source + " line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kParseError) {
        throw Error(ErrorCode::kParseError, source + " line " + std::to_string(line_no) + ": " + e.detail());
      }
      throw Error(ErrorCode::kValidationError, source + " line " + std::to_string(line_no) + ": " + e.what());
    }
    try {
      validate_change(c);
    } catch (const Error& e) {
      throw Error(ErrorCode::kValidationError, source + " line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!seen.emplace(c.id, line_no).second) {
      throw Error(ErrorCode::kValidationError,
                  source + " line " + std::to_string(line_no) + ": duplicate id '" + c.id + "'");
    }
    out.push_back(std::move(c));
  }
  return out;
}

inline std::vector<ChangeRequest> load_corpus(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::kIoError, "cannot open '" + path + "'");
  return parse_corpus(is, path);
}

/// Reads an id,label CSV (header optional) and aligns it with `records`.
inline std::vector<Label> load_labels(const std::string& path, const std::vector<ChangeRequest>& records) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::kIoError, "cannot open '" + path + "'");
  std::unordered_map<std::string, Label> by_id;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || (line_no == 1 && line == "id,label")) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw Error(ErrorCode::kParseError, path + " line " + std::to_string(line_no) + ": expected id,label");
    }
    try {
      by_id[line.substr(0, comma)] = parse_label(line.substr(comma + 1));
    } catch (const Error& e) {
      throw Error(ErrorCode::kParseError, path + " line " + std::to_string(line_no) + ": " + e.detail());
    }
  }
  std::vector<Label> labels;
  labels.reserve(records.size());
  for (const auto& r : records) {
    auto it = by_id.find(r.id);
    if (it == by_id.end()) throw Error(ErrorCode::kValidationError, "no label for '" + r.id + "' in " + path);
    labels.push_back(it->second);
  }
  return labels;
}

}  // namespace crqrisk

#endif  // CRQRISK_CORPUS_HPP_
