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

#ifndef CRQRISK_SERVICE_HPP_
#define CRQRISK_SERVICE_HPP_

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <unistd.h>

#include "crqrisk/domain.hpp"
#include "crqrisk/drift.hpp"
#include "crqrisk/evaluation.hpp"
#include "crqrisk/feedback.hpp"
#include "crqrisk/pipeline.hpp"
#include "crqrisk/registry.hpp"

namespace crqrisk {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

inline constexpr const char* kDataDirEnv = "CRQRISK_DATA_DIR";

struct ServiceConfig {
  std::string data_dir = "crqrisk-data";
  /// Review items enqueued per scored batch.
  std::size_t review_m = 20;
  RankKey rank_key = RankKey::kKnowledge;
  Timestamp review_ttl = 14 * kSecondsPerDay;
  double drift_threshold = kDefaultDriftThreshold;
  /// Drift is checked after a batch once the window holds this many rows.
  std::size_t drift_min_window = 500;
  /// The window keeps the most recent rows only.
  std::size_t drift_max_window = 5000;
  bool auto_drift_check = true;
  bool monitor_predictions = true;
  Timestamp retrain_cadence = 30 * kSecondsPerDay;
  PipelineConfig pipeline;
  std::string api_token;
  std::string host = "127.0.0.1";
  int port = 8080;
};

namespace service_detail {

inline std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  s = s.substr(b, e - b + 1);
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) s = s.substr(1, s.size() - 2);
  return s;
}

inline double to_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != v.size() || v.empty()) throw Error(ErrorCode::kInvalidConfig, "'" + key + "' is not a number: " + v);
  return x;
}

inline std::size_t to_count(const std::string& key, const std::string& v) {
  const double x = to_double(key, v);
  if (x < 0 || x != static_cast<double>(static_cast<std::size_t>(x))) {
    throw Error(ErrorCode::kInvalidConfig, "'" + key + "' must be a non-negative integer: " + v);
  }
  return static_cast<std::size_t>(x);
}

inline bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw Error(ErrorCode::kInvalidConfig, "'" + key + "' is not a boolean: " + v);
}

inline Timestamp days(const std::string& key, const std::string& v) {
  return static_cast<Timestamp>(to_double(key, v) * static_cast<double>(kSecondsPerDay));
}

}  // namespace service_detail

/// Applies one `key = value` setting; unknown keys are an InvalidConfig.
inline void apply_config_setting(ServiceConfig& cfg, const std::string& key, const std::string& value) {
  using namespace service_detail;
  auto& p = cfg.pipeline;
  if (key == "data_dir") cfg.data_dir = value;
  else if (key == "review_m") cfg.review_m = to_count(key, value);
  else if (key == "rank_key") cfg.rank_key = parse_rank_key(value);
  else if (key == "review_ttl_days") cfg.review_ttl = days(key, value);
  else if (key == "drift_threshold") cfg.drift_threshold = to_double(key, value);
  else if (key == "drift_min_window") cfg.drift_min_window = to_count(key, value);
  else if (key == "drift_max_window") cfg.drift_max_window = to_count(key, value);
  else if (key == "auto_drift_check") cfg.auto_drift_check = to_bool(key, value);
  else if (key == "monitor_predictions") cfg.monitor_predictions = to_bool(key, value);
  else if (key == "retrain_cadence_days") cfg.retrain_cadence = days(key, value);
  else if (key == "half_life_days") p.half_life = days(key, value);
  else if (key == "feedback_multiplier") p.feedback_multiplier = to_double(key, value);
  else if (key == "pre_drift_weight") p.pre_drift_weight = to_double(key, value);
  else if (key == "oversample") p.oversample = parse_oversample_mode(value);
  else if (key == "k_neighbors") p.k_neighbors = to_count(key, value);
  else if (key == "target_ratio") p.target_ratio = to_double(key, value);
  else if (key == "validation_fraction") p.validation_fraction = to_double(key, value);
  else if (key == "min_tpr") p.min_tpr = to_double(key, value);
  else if (key == "team_alpha") p.team_alpha = to_double(key, value);
  else if (key == "n_members") p.n_members = to_count(key, value);
  else if (key == "member_mode") p.member_mode = value == "per_tree" ? MemberMode::kPerTree : MemberMode::kPrefix;
  else if (key == "reference_window_days") p.reference_window = days(key, value);
  else if (key == "reference_max_rows") p.reference_max_rows = to_count(key, value);
  else if (key == "lexicon_path") p.lexicon = SeverityLexicon::load(value);
  else if (key == "n_trees") p.gbdt.n_trees = to_count(key, value);
  else if (key == "max_depth") p.gbdt.max_depth = to_count(key, value);
  else if (key == "learning_rate") p.gbdt.learning_rate = to_double(key, value);
  else if (key == "lambda") p.gbdt.lambda = to_double(key, value);
  else if (key == "gamma") p.gbdt.gamma = to_double(key, value);
  else if (key == "min_child_hessian") p.gbdt.min_child_hessian = to_double(key, value);
  else if (key == "subsample") p.gbdt.subsample = to_double(key, value);
  else if (key == "seed") p.gbdt.seed = to_count(key, value);
  else if (key == "api_token") cfg.api_token = value;
  else if (key == "host") cfg.host = value;
  else if (key == "port") cfg.port = static_cast<int>(to_count(key, value));
  else throw Error(ErrorCode::kInvalidConfig, "unknown config key '" + key + "'");
}

inline void validate_service_config(const ServiceConfig& cfg) {
  if (cfg.data_dir.empty()) throw Error(ErrorCode::kInvalidConfig, "data_dir is empty");
  if (!(cfg.drift_threshold > 0.0 && cfg.drift_threshold < 1.0)) {
    throw Error(ErrorCode::kInvalidConfig, "drift_threshold must lie in (0,1)");
  }
  if (cfg.review_ttl <= 0 || cfg.retrain_cadence <= 0 || cfg.pipeline.half_life <= 0) {
    throw Error(ErrorCode::kInvalidConfig, "durations must be positive");
  }
  if (cfg.drift_max_window == 0 || cfg.drift_min_window > cfg.drift_max_window) {
    throw Error(ErrorCode::kInvalidConfig, "drift_min_window must not exceed drift_max_window");
  }
  if (!(cfg.pipeline.validation_fraction >= 0.0 && cfg.pipeline.validation_fraction < 1.0)) {
    throw Error(ErrorCode::kInvalidConfig, "validation_fraction must lie in [0,1)");
  }
  if (!(cfg.pipeline.feedback_multiplier >= 1.0)) {
    throw Error(ErrorCode::kInvalidConfig, "feedback_multiplier must be >= 1");
  }
  if (!(cfg.pipeline.pre_drift_weight > 0.0 && cfg.pipeline.pre_drift_weight <= 1.0)) {
    throw Error(ErrorCode::kInvalidConfig, "pre_drift_weight must lie in (0,1]");
  }
  validate_train_config(cfg.pipeline.gbdt);
}

/// Parses an INI-style file of `key = value` lines. `#`/`;` start comments
/// and `[section]` headers are ignored.
inline ServiceConfig parse_service_config(std::istream& is, ServiceConfig cfg = {}) {
  std::string line;
  std::size_t n = 0;
  while (std::getline(is, line)) {
    ++n;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    line = service_detail::trim(line);
    if (line.empty() || line.front() == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kParseError, "config line " + std::to_string(n) + ": expected key = value");
    }
    apply_config_setting(cfg, service_detail::trim(line.substr(0, eq)), service_detail::trim(line.substr(eq + 1)));
  }
  return cfg;
}

inline ServiceConfig load_service_config(const std::string& path, ServiceConfig base = {}) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::kIoError, "cannot open config '" + path + "'");
  return parse_service_config(is, std::move(base));
}

/// The data directory can be redirected without editing the config file.
inline ServiceConfig apply_env_overrides(ServiceConfig cfg) {
  if (const char* dir = std::getenv(kDataDirEnv); dir && *dir) cfg.data_dir = dir;
  return cfg;
}

// ---------------------------------------------------------------------------
// Durable JSONL storage
// ---------------------------------------------------------------------------

/// Append-only JSON-lines file; every append is flushed and fsync'ed
/// before returning. A torn final line (crash mid-write) is ignored when
/// reading.
class JsonlFile {
 public:
  explicit JsonlFile(std::string path) : path_(std::move(path)) {}

  std::vector<Json> read_all() const {
    std::vector<Json> out;
    std::ifstream is(path_);
    if (!is) return out;
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(is, line)) {
      if (!line.empty()) lines.push_back(std::move(line));
    }
    for (std::size_t i = 0; i < lines.size(); ++i) {
      try {
        out.push_back(Json::parse(lines[i]));
      } catch (const Json::parse_error&) {
        if (i + 1 != lines.size()) {
          throw Error(ErrorCode::kParseError, path_ + ":" + std::to_string(i + 1) + ": corrupt record");
        }
      }
    }
    return out;
  }

  void append(const std::vector<Json>& docs) {
    if (docs.empty()) return;
    std::string buf;
    for (const auto& d : docs) {
      buf += d.dump();
      buf += '\n';
    }
    std::FILE* f = std::fopen(path_.c_str(), "ab");
    if (!f) throw Error(ErrorCode::kIoError, "cannot append to '" + path_ + "'");
    const bool ok =
        std::fwrite(buf.data(), 1, buf.size(), f) == buf.size() && std::fflush(f) == 0 && ::fsync(::fileno(f)) == 0;
    std::fclose(f);
    if (!ok) throw Error(ErrorCode::kIoError, "append to '" + path_ + "' failed");
  }

  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

// ---------------------------------------------------------------------------
// Service
// ---------------------------------------------------------------------------

struct RetrainOutcome {
  ModelRegistryEntry entry;
  bool activated = false;
  std::string reason;
  std::optional<ClassificationMetrics> new_metrics;
  std::optional<ClassificationMetrics> active_metrics;
  std::vector<std::string> warnings;
};

inline Json to_json_value(const RetrainOutcome& o) {
  return Json{{"entry", o.entry},
              {"activated", o.activated},
              {"reason", o.reason},
              {"new_metrics", o.new_metrics ? metrics_json(*o.new_metrics) : Json(nullptr)},
              {"active_metrics", o.active_metrics ? metrics_json(*o.active_metrics) : Json(nullptr)},
              {"warnings", o.warnings}};
}

struct ScoreBatchResult {
  std::string model_version;
  std::vector<RiskScore> scores;
  std::vector<ReviewItem> enqueued;
  std::optional<DriftReport> drift;
};

/// Batch-scoring service: immutable model snapshots for readers, one
/// serialized writer for every log/queue mutation, one trainer at a time.
///
/// Everything needed after a restart lives under `data_dir`:
///   registry/       versioned models and the ACTIVE pointer
///   events.jsonl    review queue and retrain events
///   scores.jsonl    every emitted score with its change request
///   history.jsonl   labeled history used for training
///   drift.jsonl     drift reports
class RiskService {
 public:
  struct Snapshot {
    std::string version;
    std::shared_ptr<const ModelBundle> bundle;
  };

  explicit RiskService(ServiceConfig cfg)
      : cfg_(std::move(cfg)),
        dir_((validate_service_config(cfg_), fs::path(cfg_.data_dir))),
        registry_((fs::create_directories(dir_), dir_ / "registry")),
        queue_((dir_ / "events.jsonl").string()),
        scores_log_((dir_ / "scores.jsonl").string()),
        history_log_((dir_ / "history.jsonl").string()),
        drift_log_((dir_ / "drift.jsonl").string()) {
    for (const auto& doc : history_log_.read_all()) add_history_row(doc);
    if (auto v = registry_.active_version()) install(*v);
    for (const auto& doc : scores_log_.read_all()) {
      if (doc.contains(kWindowReset)) {
        clear_window();
        continue;
      }
      auto c = doc.at("change").get<ChangeRequest>();
      auto s = doc.at("score").get<RiskScore>();
      if (auto snap = active(); snap && s.model_version == snap->version) {
        push_window(snap->bundle->encode(c), s.probability);
      }
      record_scored(std::move(c), std::move(s));
    }
    auto reports = drift_log_.read_all();
    for (const auto& doc : reports) {
      if (doc.value("alarm", false)) last_alarm_at_ = doc.get<DriftReport>().computed_at;
    }
    if (!reports.empty()) latest_drift_ = reports.back().get<DriftReport>();
  }

  RiskService(const RiskService&) = delete;
  RiskService& operator=(const RiskService&) = delete;

  const ServiceConfig& config() const { return cfg_; }
  ModelRegistry& registry() { return registry_; }
  const ModelRegistry& registry() const { return registry_; }
  ReviewQueue& queue() { return queue_; }

  std::shared_ptr<const Snapshot> active() const {
    std::lock_guard<std::mutex> lock(snapshot_mu_);
    return active_;
  }

  /// Scores a batch against one model snapshot, durably logs the scores,
  /// extends the drift window and enqueues the top-m uncertain items.
  ScoreBatchResult score_batch(const std::vector<ChangeRequest>& requests, Timestamp now) {
    for (std::size_t i = 0; i < requests.size(); ++i) {
      validate_change(requests[i]);
      if (i > 0 && requests[i].submitted_at < requests[i - 1].submitted_at) {
        throw Error(ErrorCode::kValidationError,
                    "submitted_at decreases within the batch at '" + requests[i].id + "'");
      }
    }
    const auto snap = active();
    if (!snap) throw Error(ErrorCode::kNoActiveModel, "no model is active");
    ScoreBatchResult out;
    out.model_version = snap->version;
    if (requests.empty()) return out;
    std::vector<FeatureVector> encoded;
    encoded.reserve(requests.size());
    out.scores.reserve(requests.size());
    for (const auto& r : requests) {
      encoded.push_back(snap->bundle->encode(r));
      out.scores.push_back(snap->bundle->score_encoded(r.id, encoded.back(), snap->version));
    }

    std::lock_guard<std::mutex> lock(writer_mu_);
    std::vector<Json> docs;
    docs.reserve(requests.size());
    for (std::size_t i = 0; i < requests.size(); ++i) docs.push_back({{"change", requests[i]}, {"score", out.scores[i]}});
    scores_log_.append(docs);
    for (std::size_t i = 0; i < requests.size(); ++i) record_scored(requests[i], out.scores[i]);
    {
      std::lock_guard<std::mutex> wl(window_mu_);
      if (window_version_ == snap->version) {
        for (std::size_t i = 0; i < encoded.size(); ++i) push_window_locked(std::move(encoded[i]), out.scores[i].probability);
      }
    }
    out.enqueued =
        queue_.enqueue_batch(out.scores, cfg_.review_m, now, snap->bundle->operating_threshold, cfg_.rank_key);
    if (cfg_.auto_drift_check && !snap->bundle->reference.empty() && window_size() >= cfg_.drift_min_window)
      out.drift = check_drift_locked(now);
    return out;
  }

  std::size_t window_size() const {
    std::lock_guard<std::mutex> lock(window_mu_);
    return window_.size();
  }

  /// Compares the current window with the active model's reference window;
  /// an alarm appends (at most one pending) retrain request.
  DriftReport check_drift(Timestamp now) {
    std::lock_guard<std::mutex> lock(writer_mu_);
    return check_drift_locked(now);
  }

  std::optional<DriftReport> latest_drift() const {
    std::lock_guard<std::mutex> lock(writer_mu_);
    return latest_drift_;
  }

  Verdict record_verdict(const std::string& change_id, Label label, const std::string& reviewer, Timestamp now) {
    std::lock_guard<std::mutex> lock(writer_mu_);
    return queue_.record_verdict(change_id, label, reviewer, now);
  }

  std::vector<ReviewItem> reviews(ReviewStatus status) const { return queue_.items(status, cfg_.rank_key); }

  std::vector<std::string> expire_stale(Timestamp now) {
    std::lock_guard<std::mutex> lock(writer_mu_);
    return queue_.expire_stale(now, cfg_.review_ttl);
  }

  /// Appends labeled history (e.g. post-implementation outcomes); a later
  /// label for the same id replaces the earlier one.
  void add_history(const std::vector<ChangeRequest>& records, const std::vector<Label>& labels) {
    if (records.size() != labels.size()) throw Error(ErrorCode::kInvalidDataset, "records/labels length differ");
    for (const auto& r : records) validate_change(r);
    std::lock_guard<std::mutex> lock(writer_mu_);
    std::vector<Json> docs;
    for (std::size_t i = 0; i < records.size(); ++i) {
      docs.push_back({{"change", records[i]}, {"label", to_string(labels[i])}});
    }
    history_log_.append(docs);
    for (const auto& d : docs) add_history_row(d);
  }

  std::size_t history_size() const {
    std::lock_guard<std::mutex> lock(writer_mu_);
    return history_.size();
  }

  /// Trains a candidate, stages it and activates it when its validation
  /// PLR is at least the active model's PLR on the same fold (or `force`).
  /// Returns nullopt when another retrain is already running.
  std::optional<RetrainOutcome> trigger_retrain(const std::string& reason, Timestamp now, bool force = false) {
    if (reason != "scheduled" && reason != "drift_alarm" && reason != "manual") {
      throw Error(ErrorCode::kInvalidConfig, "unknown retrain reason '" + reason + "'");
    }
    if (training_.exchange(true)) return std::nullopt;
    struct Release {
      std::atomic<bool>& flag;
      ~Release() { flag.store(false); }
    } release{training_};

    std::vector<ChangeRequest> records;
    std::vector<Label> labels;
    std::vector<Verdict> verdicts;
    PipelineConfig pipeline = cfg_.pipeline;
    {
      std::lock_guard<std::mutex> lock(writer_mu_);
      queue_.request_retrain(reason, now);
      verdicts = queue_.verdicts();
      pipeline.drift_boundary = last_alarm_at_;
      records.reserve(history_.size() + verdicts.size());
      for (const auto& h : history_) {
        records.push_back(h.change);
        labels.push_back(h.label);
      }
      for (const auto& v : verdicts) {
        if (history_index_.count(v.change_id)) continue;
        auto it = scored_index_.find(v.change_id);
        if (it == scored_index_.end()) continue;
        records.push_back(scored_[it->second].change);
        labels.push_back(v.expert_label);
      }
    }

    RetrainOutcome out;
    out.reason = reason;
    try {
      auto result = train_pipeline(records, labels, verdicts, now, pipeline);
      out.warnings = result.warnings;
      out.new_metrics = result.validation;
      const auto current = active();
      if (current && !result.validation_records.empty()) {
        out.active_metrics = evaluate_bundle(*current->bundle, result.validation_records, result.validation_labels,
                                             cfg_.pipeline.min_tpr);
      }
      bool promote = force || !current;
      if (!promote && out.new_metrics) promote = !out.active_metrics || out.new_metrics->plr >= out.active_metrics->plr;
      out.entry = registry_.stage(result.bundle, reason, now);
      if (promote) {
        activate(out.entry.version);
        out.entry.status = EntryStatus::kActive;
        out.activated = true;
      }
    } catch (const Error& e) {
      std::lock_guard<std::mutex> lock(writer_mu_);
      queue_.complete_retrain(now, {{"reason", reason}, {"status", "failed"}, {"error", e.what()}});
      throw Error(ErrorCode::kTrainingFailed, e.what());
    }
    std::lock_guard<std::mutex> lock(writer_mu_);
    queue_.complete_retrain(now, {{"reason", reason},
                                  {"status", "ok"},
                                  {"version", out.entry.version},
                                  {"activated", out.activated}});
    // A fresh window after every retrain keeps one alarm from re-requesting
    // retrains on the same evidence.
    reset_window_locked();
    return out;
  }

  /// Time of the most recent drift alarm, if any.
  std::optional<Timestamp> last_drift_alarm() const {
    std::lock_guard<std::mutex> lock(writer_mu_);
    return last_alarm_at_;
  }

  bool retrain_in_flight() const { return training_.load(); }

  /// Runs the retrain requested on the event log (e.g. by a drift alarm),
  /// if any.
  std::optional<RetrainOutcome> run_pending_retrain(Timestamp now) {
    const auto state = queue_.snapshot();
    if (!state.retrain_pending) return std::nullopt;
    const std::string reason = state.retrain_reason.empty() ? "manual" : state.retrain_reason;
    return trigger_retrain(reason, now);
  }

  /// Retrains when the newest model is at least `retrain_cadence` old.
  std::optional<RetrainOutcome> maybe_scheduled_retrain(Timestamp now) {
    Timestamp last = std::numeric_limits<Timestamp>::min();
    for (const auto& e : registry_.list()) last = std::max(last, e.created_at);
    if (last != std::numeric_limits<Timestamp>::min() && now - last < cfg_.retrain_cadence) return std::nullopt;
    return trigger_retrain("scheduled", now);
  }

  /// Points ACTIVE at `version` and swaps the in-memory snapshot; batches
  /// already in flight finish on the snapshot they started with.
  void activate(const std::string& version) {
    auto bundle = registry_.load(version);
    std::lock_guard<std::mutex> lock(writer_mu_);
    registry_.activate(version);
    install_bundle(version, std::move(bundle));
    reset_window_locked();
  }

  /// Service-level metrics: active model, review queue, agreement and the
  /// month-by-month series of scored changes whose outcome is known.
  Json metrics() const {
    std::lock_guard<std::mutex> lock(writer_mu_);
    const auto snap = active();
    const auto state = queue_.snapshot();
    std::size_t n_pending = 0, n_reviewed = 0, n_expired = 0;
    for (const auto& [id, item] : state.items) {
      n_pending += item.status == ReviewStatus::kPending;
      n_reviewed += item.status == ReviewStatus::kReviewed;
      n_expired += item.status == ReviewStatus::kExpired;
    }
    const auto agreement = man_machine_agreement(state.verdicts);
    Json out{{"active_version", snap ? Json(snap->version) : Json(nullptr)},
             {"operating_threshold", snap ? Json(snap->bundle->operating_threshold) : Json(nullptr)},
             {"training_metrics", snap ? snap->bundle->training_metrics : Json(nullptr)},
             {"reviews", {{"pending", n_pending}, {"reviewed", n_reviewed}, {"expired", n_expired}}},
             {"agreement_pct", agreement ? Json(*agreement) : Json(nullptr)},
             {"n_scored", scored_.size()},
             {"n_history", history_.size()},
             {"retrain_pending", state.retrain_pending}};
    Json months = Json::array();
    for (const auto& m : month_series_locked(state.verdicts)) {
      Json j = m.second;
      j["period"] = m.first;
      months.push_back(std::move(j));
    }
    out["months"] = std::move(months);
    return out;
  }

 private:
  struct HistoryRow {
    ChangeRequest change;
    Label label;
  };
  struct ScoredRow {
    ChangeRequest change;
    RiskScore score;
  };

  void add_history_row(const Json& doc) {
    HistoryRow row{doc.at("change").get<ChangeRequest>(), parse_label(doc.at("label").get<std::string>())};
    auto it = history_index_.find(row.change.id);
    if (it != history_index_.end()) {
      history_[it->second] = std::move(row);
    } else {
      history_index_.emplace(row.change.id, history_.size());
      history_.push_back(std::move(row));
    }
  }

  void record_scored(ChangeRequest c, RiskScore s) {
    auto it = scored_index_.find(c.id);
    if (it != scored_index_.end()) {
      scored_[it->second] = {std::move(c), std::move(s)};
    } else {
      scored_index_.emplace(c.id, scored_.size());
      scored_.push_back({std::move(c), std::move(s)});
    }
  }

  static constexpr const char* kWindowReset = "window_reset";

  void clear_window() {
    std::lock_guard<std::mutex> wl(window_mu_);
    window_.clear();
    window_predictions_.clear();
  }

  /// Clears the drift window and records the reset in the score log so a
  /// restart rebuilds the same window. Caller holds writer_mu_.
  void reset_window_locked() {
    scores_log_.append({Json{{kWindowReset, true}}});
    clear_window();
  }

  void install(const std::string& version) { install_bundle(version, registry_.load(version)); }

  void install_bundle(const std::string& version, std::shared_ptr<const ModelBundle> bundle) {
    auto snap = std::make_shared<const Snapshot>(Snapshot{version, std::move(bundle)});
    {
      std::lock_guard<std::mutex> wl(window_mu_);
      window_.clear();
      window_predictions_.clear();
      window_version_ = version;
    }
    std::lock_guard<std::mutex> lock(snapshot_mu_);
    active_ = std::move(snap);
  }

  void push_window(FeatureVector x, double p) {
    std::lock_guard<std::mutex> wl(window_mu_);
    push_window_locked(std::move(x), p);
  }

  void push_window_locked(FeatureVector x, double p) {
    window_.push_back(std::move(x));
    window_predictions_.push_back(p);
    while (window_.size() > cfg_.drift_max_window) {
      window_.pop_front();
      window_predictions_.pop_front();
    }
  }

  DriftReport check_drift_locked(Timestamp now) {
    const auto snap = active();
    if (!snap) throw Error(ErrorCode::kNoActiveModel, "no model is active");
    const auto& b = *snap->bundle;
    std::vector<FeatureVector> cur;
    std::optional<PredictionSamples> preds;
    {
      std::lock_guard<std::mutex> wl(window_mu_);
      cur.assign(window_.begin(), window_.end());
      if (cfg_.monitor_predictions) {
        preds = PredictionSamples{b.reference_predictions, {window_predictions_.begin(), window_predictions_.end()}};
      }
    }
    if (b.reference.empty() || cur.empty()) {
      throw Error(ErrorCode::kEmptyDataset, "drift check needs a reference window and scored changes");
    }
    auto report =
        weighted_drift(*b.schema, b.reference, cur, b.model.feature_importances, cfg_.drift_threshold, preds, now);
    drift_log_.append({Json(report)});
    latest_drift_ = report;
    if (report.alarm) last_alarm_at_ = report.computed_at;
    const auto decision = check_alarm(report, cfg_.drift_threshold, queue_.snapshot().retrain_pending);
    if (decision.request_retrain) queue_.request_retrain("drift_alarm", now);
    return report;
  }

  std::vector<std::pair<std::string, MonthMetrics>> month_series_locked(const std::vector<Verdict>& verdicts) const {
    std::map<std::string, MonthMetrics> months;
    std::unordered_map<std::string, std::string> period_of;
    for (const auto& s : scored_) {
      const std::string period = format_iso8601(s.change.submitted_at).substr(0, 7);
      period_of[s.change.id] = period;
      auto& m = months[period];
      m.model_version = s.score.model_version;
      ++m.n_crq;
      m.n_flagged += s.score.flagged;
      auto h = history_index_.find(s.change.id);
      if (h != history_index_.end() && history_[h->second].label == Label::kRisky) {
        ++m.n_risky;
        m.n_major += !s.score.flagged;
      }
    }
    std::map<std::string, std::vector<Verdict>> by_period;
    for (const auto& v : verdicts) {
      auto p = period_of.find(v.change_id);
      if (p != period_of.end()) by_period[p->second].push_back(v);
    }
    std::vector<std::pair<std::string, MonthMetrics>> out;
    int index = 0;
    for (auto& [period, m] : months) {
      m.month = ++index;
      m.majors_per_10k = major_issues_per_10k(m.n_major, m.n_crq);
      const auto& vs = by_period[period];
      m.n_reviewed = vs.size();
      m.agreement = man_machine_agreement(vs);
      out.emplace_back(period, m);
    }
    return out;
  }

  ServiceConfig cfg_;
  fs::path dir_;
  ModelRegistry registry_;
  ReviewQueue queue_;
  JsonlFile scores_log_;
  JsonlFile history_log_;
  JsonlFile drift_log_;

  mutable std::mutex snapshot_mu_;
  std::shared_ptr<const Snapshot> active_;

  mutable std::mutex writer_mu_;
  std::vector<HistoryRow> history_;
  std::unordered_map<std::string, std::size_t> history_index_;
  std::vector<ScoredRow> scored_;
  std::unordered_map<std::string, std::size_t> scored_index_;
  std::optional<DriftReport> latest_drift_;
  /// Time of the most recent drift alarm; older history is down-weighted.
  std::optional<Timestamp> last_alarm_at_;

  mutable std::mutex window_mu_;
  std::string window_version_;
  std::deque<FeatureVector> window_;
  std::deque<double> window_predictions_;

  std::atomic<bool> training_{false};
};

}  // namespace crqrisk

#endif  // CRQRISK_SERVICE_HPP_
