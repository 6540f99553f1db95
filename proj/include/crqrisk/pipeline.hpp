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

#ifndef CRQRISK_PIPELINE_HPP_
#define CRQRISK_PIPELINE_HPP_

#include <algorithm>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "crqrisk/domain.hpp"
#include "crqrisk/drift.hpp"
#include "crqrisk/evaluation.hpp"
#include "crqrisk/features.hpp"
#include "crqrisk/feedback.hpp"
#include "crqrisk/gbdt.hpp"
#include "crqrisk/imbalance.hpp"
#include "crqrisk/uncertainty.hpp"

namespace crqrisk {

/// Everything needed to score a change: encoder state, the ensemble, the
/// operating threshold and the drift reference window.
struct ModelBundle {
  Ensemble model;
  SchemaPtr schema;
  TeamProfiles profiles;
  SeverityLexicon lexicon = default_lexicon();
  double operating_threshold = 0.5;
  std::size_t n_members = kDefaultMembers;
  MemberMode member_mode = MemberMode::kPrefix;
  Json training_metrics = Json::object();
  std::vector<FeatureVector> reference;
  std::vector<double> reference_predictions;

  FeatureEncoder encoder() const { return FeatureEncoder{schema, profiles, lexicon}; }

  FeatureVector encode(const ChangeRequest& c) const {
    return crqrisk::encode(c, profiles, *schema, lexicon, model.schema_version);
  }

  RiskScore score(const ChangeRequest& c, const std::string& version) const {
    return score_encoded(c.id, encode(c), version);
  }

  RiskScore score_encoded(const std::string& change_id, const FeatureVector& x, const std::string& version) const {
    RiskScore s;
    s.change_id = change_id;
    s.probability = model.predict_proba(x);
    s.model_version = version;
    s.uncertainty = prediction_uncertainty(model, x, n_members, member_mode);
    s.flagged = s.probability >= operating_threshold;
    return s;
  }
};

namespace pipeline_detail {

inline Json vector_to_json(const FeatureVector& v) {
  Json a = Json::array();
  for (std::size_t i = 0; i < v.size(); ++i) a.push_back(v.missing[i] ? Json(nullptr) : Json(v.values[i]));
  return a;
}

inline FeatureVector vector_from_json(const Json& a) {
  FeatureVector v;
  for (const auto& x : a) {
    v.values.push_back(x.is_null() ? 0.0 : x.get<double>());
    v.missing.push_back(x.is_null());
  }
  return v;
}

}  // namespace pipeline_detail

inline void to_json(Json& j, const ModelBundle& b) {
  Json ref = Json::array();
  for (const auto& r : b.reference) ref.push_back(pipeline_detail::vector_to_json(r));
  j = Json{{"format", "crqrisk.bundle"},
           {"format_version", 1},
           {"schema", *b.schema},
           {"team_profiles", b.profiles},
           {"lexicon", b.lexicon.terms()},
           {"operating_threshold", b.operating_threshold},
           {"n_members", b.n_members},
           {"member_mode", b.member_mode == MemberMode::kPrefix ? "prefix" : "per_tree"},
           {"training_metrics", b.training_metrics},
           {"model", b.model},
           {"reference", ref},
           {"reference_predictions", b.reference_predictions}};
}

inline void from_json(const Json& j, ModelBundle& b) {
  if (j.value("format", std::string{}) != "crqrisk.bundle") throw Error(ErrorCode::kParseError, "not a model bundle");
  b = ModelBundle{};
  b.schema = std::make_shared<const FeatureSchema>(j.at("schema").get<FeatureSchema>());
  b.profiles = j.at("team_profiles").get<TeamProfiles>();
  b.lexicon = SeverityLexicon(j.at("lexicon").get<std::vector<std::string>>());
  b.operating_threshold = j.at("operating_threshold").get<double>();
  b.n_members = j.at("n_members").get<std::size_t>();
  b.member_mode = j.at("member_mode").get<std::string>() == "per_tree" ? MemberMode::kPerTree : MemberMode::kPrefix;
  b.training_metrics = j.value("training_metrics", Json::object());
  b.model = j.at("model").get<Ensemble>();
  for (const auto& r : j.value("reference", Json::array())) b.reference.push_back(pipeline_detail::vector_from_json(r));
  b.reference_predictions = j.value("reference_predictions", std::vector<double>{});
  if (b.model.schema_version != b.schema->version()) {
    throw Error(ErrorCode::kSchemaMismatch, "bundle model and schema versions differ");
  }
}

enum class OversampleMode { kNone, kSmote, kAdasyn };

inline std::string_view to_string(OversampleMode m) {
  switch (m) {
    case OversampleMode::kNone: return "none";
    case OversampleMode::kSmote: return "smote";
    case OversampleMode::kAdasyn: return "adasyn";
  }
  return "none";
}

inline OversampleMode parse_oversample_mode(std::string_view s) {
  if (s == "none") return OversampleMode::kNone;
  if (s == "smote") return OversampleMode::kSmote;
  if (s == "adasyn") return OversampleMode::kAdasyn;
  throw Error(ErrorCode::kInvalidConfig, "unknown oversampling mode '" + std::string(s) + "'");
}

struct PipelineConfig {
  TrainConfig gbdt;
  OversampleMode oversample = OversampleMode::kSmote;
  std::size_t k_neighbors = 5;
  double target_ratio = 0.1;
  Timestamp half_life = kDefaultHalfLife;
  double feedback_multiplier = 3.0;
  /// Rows submitted before `drift_boundary` (typically the last drift
  /// alarm) have their weight multiplied by `pre_drift_weight`, so a retrain
  /// after a confirmed shift learns mostly from post-shift data.
  std::optional<Timestamp> drift_boundary;
  double pre_drift_weight = 0.1;
  /// Newest fraction of the (time-ordered) data held out for validation.
  double validation_fraction = 0.2;
  double min_tpr = kMinOperatingTpr;
  double team_alpha = 1.0;
  std::size_t n_members = kDefaultMembers;
  MemberMode member_mode = MemberMode::kPrefix;
  /// Drift reference = training rows from the last `reference_window`
  /// seconds before the split point, at most `reference_max_rows` of them.
  Timestamp reference_window = 30 * kSecondsPerDay;
  std::size_t reference_max_rows = 5000;
  SeverityLexicon lexicon = default_lexicon();
};

struct PipelineResult {
  ModelBundle bundle;
  std::optional<ClassificationMetrics> validation;
  std::vector<ChangeRequest> validation_records;
  std::vector<Label> validation_labels;
  std::size_t n_train = 0;
  std::size_t n_synthetic = 0;
  std::vector<std::string> warnings;
};

/// Indices of `records` ordered by submission time (stable).
inline std::vector<std::size_t> time_order(const std::vector<ChangeRequest>& records) {
  std::vector<std::size_t> idx(records.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return records[a].submitted_at < records[b].submitted_at; });
  return idx;
}

/// Appends SMOTE/ADASYN rows synthesized from a median-imputed copy of
/// `train`; the original rows keep their missing entries so the trees
/// still learn default directions.
inline Dataset add_synthetic_minority(const Dataset& train, const PipelineConfig& cfg, std::size_t* n_added,
                                      std::vector<std::string>* warnings) {
  *n_added = 0;
  if (cfg.oversample == OversampleMode::kNone) return train;
  const std::size_t n_min = train.count(Label::kRisky);
  const std::size_t n_maj = train.size() - n_min;
  if (n_maj == 0 || static_cast<double>(n_min) / static_cast<double>(n_maj) >= cfg.target_ratio) return train;
  try {
    const auto imputed = impute(train, ImputeStrategy::kMedian);
    OversampleConfig oc;
    oc.method = cfg.oversample == OversampleMode::kSmote ? OversampleMethod::kSmote : OversampleMethod::kAdasyn;
    oc.k_neighbors = cfg.k_neighbors;
    oc.target_ratio = cfg.target_ratio;
    oc.seed = cfg.gbdt.seed;
    const auto result = oversample_detailed(imputed, oc);
    std::vector<std::size_t> tail(result.origins.size());
    std::iota(tail.begin(), tail.end(), train.size());
    *n_added = tail.size();
    return train.concat(result.data.select(tail));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kTooFewMinority && e.code() != ErrorCode::kAllMissingFeature) throw;
    if (warnings) warnings->push_back(std::string("oversampling skipped: ") + e.what());
    return train;
  }
}

/// Time-ordered split, recency/feedback weighting, oversampling of the
/// training part, boosting, and threshold selection on the held-out part.
inline PipelineResult train_pipeline(const std::vector<ChangeRequest>& records, std::vector<Label> labels,
                                     const std::vector<Verdict>& verdicts, Timestamp now, const PipelineConfig& cfg) {
  if (records.size() != labels.size()) throw Error(ErrorCode::kInvalidDataset, "records/labels length differ");
  if (records.empty()) throw Error(ErrorCode::kEmptyDataset, "no training records");
  {
    std::unordered_map<std::string, Label> expert;
    for (const auto& v : verdicts) expert[v.change_id] = v.expert_label;
    for (std::size_t i = 0; i < records.size(); ++i) {
      auto it = expert.find(records[i].id);
      if (it != expert.end()) labels[i] = it->second;
    }
  }
  const auto order = time_order(records);
  const auto n_val = static_cast<std::size_t>(static_cast<double>(records.size()) * cfg.validation_fraction);
  const std::size_t n_train = records.size() - n_val;
  std::vector<ChangeRequest> train_rec, val_rec;
  std::vector<Label> train_lab, val_lab;
  for (std::size_t k = 0; k < order.size(); ++k) {
    auto& rec = k < n_train ? train_rec : val_rec;
    auto& lab = k < n_train ? train_lab : val_lab;
    rec.push_back(records[order[k]]);
    lab.push_back(labels[order[k]]);
  }

  PipelineResult out;
  out.n_train = n_train;
  const auto encoder = make_encoder(train_rec, train_lab, cfg.team_alpha, cfg.lexicon);
  const Dataset base = encoder.dataset(train_rec, train_lab);
  Dataset weighted = assemble_training_set(base, verdicts, cfg.half_life, cfg.feedback_multiplier, now);
  if (cfg.drift_boundary) {
    if (!(cfg.pre_drift_weight > 0.0 && cfg.pre_drift_weight <= 1.0)) {
      throw Error(ErrorCode::kInvalidConfig, "pre_drift_weight must lie in (0,1]");
    }
    auto w = weighted.weights();
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (weighted.timestamps()[i] < *cfg.drift_boundary) w[i] *= cfg.pre_drift_weight;
    }
    weighted = weighted.with_weights(std::move(w));
  }
  const Dataset train_set = add_synthetic_minority(weighted, cfg, &out.n_synthetic, &out.warnings);

  ModelBundle& b = out.bundle;
  b.model = train(train_set, cfg.gbdt);
  b.schema = encoder.schema;
  b.profiles = encoder.profiles;
  b.lexicon = encoder.lexicon;
  b.n_members = std::min(cfg.n_members, b.model.trees.size());
  b.member_mode = cfg.member_mode;

  std::vector<double> val_scores;
  for (const auto& r : val_rec) val_scores.push_back(b.model.predict_proba(encoder(r)));
  const bool val_ok = std::count(val_lab.begin(), val_lab.end(), Label::kRisky) > 0 &&
                      std::count(val_lab.begin(), val_lab.end(), Label::kNormal) > 0;
  if (val_ok) {
    b.operating_threshold = select_operating_threshold(val_scores, val_lab, cfg.min_tpr);
    out.validation = classification_metrics(val_scores, val_lab, b.operating_threshold);
    b.training_metrics = metrics_json(*out.validation);
  } else {
    std::vector<double> train_scores;
    for (const auto& r : base.rows()) train_scores.push_back(b.model.predict_proba(r));
    b.operating_threshold = select_operating_threshold(train_scores, base.labels(), cfg.min_tpr);
    out.warnings.push_back("validation fold lacks a class; threshold chosen on training rows");
    b.training_metrics = Json{{"threshold", b.operating_threshold}, {"validation", nullptr}};
  }
  b.training_metrics["n_train"] = n_train;
  b.training_metrics["n_validation"] = n_val;
  b.training_metrics["n_synthetic"] = out.n_synthetic;

  // Drift reference: the most recent training window, evenly thinned.
  const Timestamp cutoff = train_rec.back().submitted_at - cfg.reference_window;
  std::vector<std::size_t> recent;
  for (std::size_t i = 0; i < train_rec.size(); ++i) {
    if (train_rec[i].submitted_at > cutoff) recent.push_back(i);
  }
  const std::size_t keep = std::min(recent.size(), cfg.reference_max_rows);
  for (std::size_t k = 0; k < keep; ++k) {
    const std::size_t i = recent[k * recent.size() / keep];
    b.reference.push_back(base.row(i));
    b.reference_predictions.push_back(b.model.predict_proba(base.row(i)));
  }

  out.validation_records = std::move(val_rec);
  out.validation_labels = std::move(val_lab);
  return out;
}

/// Metrics of `bundle` on labeled records with the threshold re-selected on
/// those records.
inline std::optional<ClassificationMetrics> evaluate_bundle(const ModelBundle& bundle,
                                                            const std::vector<ChangeRequest>& records,
                                                            const std::vector<Label>& labels, double min_tpr) {
  if (std::count(labels.begin(), labels.end(), Label::kRisky) == 0 ||
      std::count(labels.begin(), labels.end(), Label::kNormal) == 0) {
    return std::nullopt;
  }
  std::vector<double> scores;
  for (const auto& r : records) scores.push_back(bundle.model.predict_proba(bundle.encode(r)));
  return classification_metrics(scores, labels, select_operating_threshold(scores, labels, min_tpr));
}

}  // namespace crqrisk

#endif  // CRQRISK_PIPELINE_HPP_
