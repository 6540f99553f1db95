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

#ifndef CRQRISK_FEEDBACK_HPP_
#define CRQRISK_FEEDBACK_HPP_

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <unistd.h>

#include "crqrisk/domain.hpp"
#include "crqrisk/uncertainty.hpp"

namespace crqrisk {

enum class ReviewStatus { kPending, kReviewed, kExpired };

inline std::string_view to_string(ReviewStatus s) {
  switch (s) {
    case ReviewStatus::kPending: return "pending";
    case ReviewStatus::kReviewed: return "reviewed";
    case ReviewStatus::kExpired: return "expired";
  }
  return "?";
}

inline ReviewStatus parse_review_status(std::string_view s) {
  if (s == "pending") return ReviewStatus::kPending;
  if (s == "reviewed") return ReviewStatus::kReviewed;
  if (s == "expired") return ReviewStatus::kExpired;
  throw Error(ErrorCode::kParseError, "unknown review status '" + std::string(s) + "'");
}

struct Verdict {
  std::string change_id;
  Label expert_label = Label::kNormal;
  std::string reviewer_id;
  Timestamp decided_at = 0;
  /// The model flagged the change (probability >= operating threshold).
  bool model_flagged = false;
  /// Expert and model agree: both risky or both not.
  bool agrees_with_model = false;
  bool operator==(const Verdict&) const = default;
};

inline void to_json(Json& j, const Verdict& v) {
  j = Json{{"change_id", v.change_id},         {"expert_label", to_string(v.expert_label)},
           {"reviewer_id", v.reviewer_id},     {"decided_at", format_iso8601(v.decided_at)},
           {"model_flagged", v.model_flagged}, {"agrees_with_model", v.agrees_with_model}};
}

inline void from_json(const Json& j, Verdict& v) {
  v.change_id = j.at("change_id").get<std::string>();
  v.expert_label = parse_label(j.at("expert_label").get<std::string>());
  v.reviewer_id = j.value("reviewer_id", std::string{});
  v.decided_at = timestamp_from_json(j.at("decided_at"));
  v.model_flagged = j.value("model_flagged", false);
  v.agrees_with_model = j.value("agrees_with_model", false);
}

struct ReviewItem {
  std::string change_id;
  RiskScore risk_score;
  Timestamp enqueued_at = 0;
  ReviewStatus status = ReviewStatus::kPending;
  double operating_threshold = 0.5;
  bool operator==(const ReviewItem&) const = default;
};

inline void to_json(Json& j, const ReviewItem& r) {
  j = Json{{"change_id", r.change_id},
           {"risk_score", r.risk_score},
           {"enqueued_at", format_iso8601(r.enqueued_at)},
           {"status", to_string(r.status)},
           {"operating_threshold", r.operating_threshold}};
}

// ---------------------------------------------------------------------------
// Event log
// ---------------------------------------------------------------------------

enum class EventType { kEnqueue, kVerdict, kExpire, kRetrainRequested, kRetrainCompleted };

inline std::string_view to_string(EventType t) {
  switch (t) {
    case EventType::kEnqueue: return "enqueue";
    case EventType::kVerdict: return "verdict";
    case EventType::kExpire: return "expire";
    case EventType::kRetrainRequested: return "retrain_requested";
    case EventType::kRetrainCompleted: return "retrain_completed";
  }
  return "?";
}

inline EventType parse_event_type(std::string_view s) {
  if (s == "enqueue") return EventType::kEnqueue;
  if (s == "verdict") return EventType::kVerdict;
  if (s == "expire") return EventType::kExpire;
  if (s == "retrain_requested") return EventType::kRetrainRequested;
  if (s == "retrain_completed") return EventType::kRetrainCompleted;
  throw Error(ErrorCode::kParseError, "unknown event type '" + std::string(s) + "'");
}

struct Event {
  std::uint64_t seq = 0;
  EventType type = EventType::kEnqueue;
  Timestamp at = 0;
  Json payload = Json::object();
};

inline void to_json(Json& j, const Event& e) {
  j = Json{{"seq", e.seq}, {"type", to_string(e.type)}, {"at", format_iso8601(e.at)}, {"payload", e.payload}};
}

inline void from_json(const Json& j, Event& e) {
  e.seq = j.at("seq").get<std::uint64_t>();
  e.type = parse_event_type(j.at("type").get<std::string>());
  e.at = timestamp_from_json(j.at("at"));
  e.payload = j.value("payload", Json::object());
}

/// Append-only line-delimited JSON log with strictly increasing sequence
/// numbers. Each append is flushed and fsync'd before returning. An empty
/// path keeps the log in memory only.
class EventLog {
 public:
  EventLog() = default;

  explicit EventLog(std::string path) : path_(std::move(path)) {
    if (path_.empty()) return;
    std::ifstream is(path_, std::ios::binary);
    std::string line;
    std::size_t line_no = 0;
    while (is && std::getline(is, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      Event e;
      try {
        e = Json::parse(line).get<Event>();
      } catch (const std::exception& ex) {
        // A torn final line from a crash mid-append is dropped; anything
        // earlier is corruption.
        if (is.peek() == std::char_traits<char>::eof()) break;
        throw Error(ErrorCode::kParseError, path_ + " line " + std::to_string(line_no) + ": " + ex.what());
      }
      if (!events_.empty() && e.seq <= events_.back().seq) {
        throw Error(ErrorCode::kParseError, path_ + " line " + std::to_string(line_no) + ": sequence not increasing");
      }
      events_.push_back(std::move(e));
    }
    file_ = std::fopen(path_.c_str(), "ab");
    if (!file_) throw Error(ErrorCode::kIoError, "cannot open event log '" + path_ + "'");
  }

  EventLog(const EventLog&) = delete;
  EventLog& operator=(const EventLog&) = delete;
  EventLog(EventLog&& o) noexcept { *this = std::move(o); }
  EventLog& operator=(EventLog&& o) noexcept {
    if (this != &o) {
      close();
      path_ = std::move(o.path_);
      events_ = std::move(o.events_);
      file_ = o.file_;
      o.file_ = nullptr;
    }
    return *this;
  }
  ~EventLog() { close(); }

  const Event& append(EventType type, Timestamp at, Json payload) {
    std::lock_guard<std::mutex> lock(mu_);
    Event e{events_.empty() ? 1 : events_.back().seq + 1, type, at, std::move(payload)};
    if (file_) {
      const std::string line = Json(e).dump() + "\n";
      if (std::fwrite(line.data(), 1, line.size(), file_) != line.size() || std::fflush(file_) != 0) {
        throw Error(ErrorCode::kIoError, "append to '" + path_ + "' failed");
      }
      ::fsync(::fileno(file_));
    }
    events_.push_back(std::move(e));
    return events_.back();
  }

  const std::vector<Event>& events() const { return events_; }
  const std::string& path() const { return path_; }

 private:
  void close() {
    if (file_) std::fclose(file_);
    file_ = nullptr;
  }

  std::string path_;
  std::vector<Event> events_;
  std::FILE* file_ = nullptr;
  std::mutex mu_;
};

// ---------------------------------------------------------------------------
// Review queue
// ---------------------------------------------------------------------------

/// Queue state as a pure fold over the event log.
struct QueueState {
  std::map<std::string, ReviewItem> items;
  std::vector<Verdict> verdicts;
  bool retrain_pending = false;
  std::string retrain_reason;

  void apply(const Event& e) {
    switch (e.type) {
      case EventType::kEnqueue: {
        ReviewItem item;
        item.change_id = e.payload.at("change_id").get<std::string>();
        item.risk_score = e.payload.at("risk_score").get<RiskScore>();
        item.operating_threshold = e.payload.at("operating_threshold").get<double>();
        item.enqueued_at = e.at;
        items.emplace(item.change_id, std::move(item));
        break;
      }
      case EventType::kVerdict: {
        auto v = e.payload.get<Verdict>();
        items.at(v.change_id).status = ReviewStatus::kReviewed;
        verdicts.push_back(std::move(v));
        break;
      }
      case EventType::kExpire:
        items.at(e.payload.at("change_id").get<std::string>()).status = ReviewStatus::kExpired;
        break;
      case EventType::kRetrainRequested:
        retrain_pending = true;
        retrain_reason = e.payload.value("reason", std::string{});
        break;
      case EventType::kRetrainCompleted:
        retrain_pending = false;
        retrain_reason.clear();
        break;
    }
  }

  std::vector<ReviewItem> with_status(ReviewStatus s) const {
    std::vector<ReviewItem> out;
    for (const auto& [id, item] : items) {
      if (item.status == s) out.push_back(item);
    }
    return out;
  }

  bool operator==(const QueueState&) const = default;
};

inline QueueState replay(const std::vector<Event>& events) {
  QueueState s;
  for (const auto& e : events) s.apply(e);
  return s;
}

/// Review-queue commands. Every mutation is validated against the current
/// state, appended to the log, then applied; one mutex serializes writers.
class ReviewQueue {
 public:
  explicit ReviewQueue(std::string log_path = {}) : log_(std::move(log_path)) { state_ = replay(log_.events()); }

  /// Enqueues the rank_top_m selection of `scores`; changes already known
  /// to the queue are skipped. Returns the newly pending items.
  std::vector<ReviewItem> enqueue_batch(const std::vector<RiskScore>& scores, std::size_t m, Timestamp now,
                                        double operating_threshold, RankKey key = RankKey::kKnowledge) {
    std::vector<std::pair<std::string, UncertaintyBreakdown>> batch;
    std::unordered_map<std::string, const RiskScore*> by_id;
    for (const auto& s : scores) {
      batch.emplace_back(s.change_id, s.uncertainty);
      by_id[s.change_id] = &s;
    }
    const auto top = rank_top_m(batch, m, key);
    std::lock_guard<std::mutex> lock(mu_);
    std::vector<ReviewItem> added;
    for (const auto& id : top) {
      if (state_.items.count(id)) continue;
      const auto& e = log_.append(EventType::kEnqueue, now,
                                  {{"change_id", id},
                                   {"risk_score", *by_id.at(id)},
                                   {"operating_threshold", operating_threshold}});
      state_.apply(e);
      added.push_back(state_.items.at(id));
    }
    return added;
  }

  Verdict record_verdict(const std::string& change_id, Label expert_label, const std::string& reviewer_id,
                         Timestamp decided_at) {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = state_.items.find(change_id);
    if (it == state_.items.end() || it->second.status == ReviewStatus::kExpired) {
      throw Error(ErrorCode::kNoPendingItem, "no pending review for '" + change_id + "'");
    }
    if (it->second.status == ReviewStatus::kReviewed) {
      throw Error(ErrorCode::kDuplicateVerdict, "'" + change_id + "' already has a verdict");
    }
    Verdict v;
    v.change_id = change_id;
    v.expert_label = expert_label;
    v.reviewer_id = reviewer_id;
    v.decided_at = decided_at;
    v.model_flagged = it->second.risk_score.probability >= it->second.operating_threshold;
    v.agrees_with_model = (expert_label == Label::kRisky) == v.model_flagged;
    state_.apply(log_.append(EventType::kVerdict, decided_at, Json(v)));
    return v;
  }

  /// Expires pending items enqueued at least `ttl` seconds before `now`.
  std::vector<std::string> expire_stale(Timestamp now, Timestamp ttl) {
    std::lock_guard<std::mutex> lock(mu_);
    std::vector<std::string> expired;
    for (const auto& [id, item] : state_.items) {
      if (item.status == ReviewStatus::kPending && now - item.enqueued_at >= ttl) expired.push_back(id);
    }
    for (const auto& id : expired) state_.apply(log_.append(EventType::kExpire, now, {{"change_id", id}}));
    return expired;
  }

  /// Appends a retrain request unless one is already pending.
  bool request_retrain(const std::string& reason, Timestamp now) {
    std::lock_guard<std::mutex> lock(mu_);
    if (state_.retrain_pending) return false;
    state_.apply(log_.append(EventType::kRetrainRequested, now, {{"reason", reason}}));
    return true;
  }

  void complete_retrain(Timestamp now, const Json& outcome) {
    std::lock_guard<std::mutex> lock(mu_);
    state_.apply(log_.append(EventType::kRetrainCompleted, now, outcome));
  }

  QueueState snapshot() const {
    std::lock_guard<std::mutex> lock(mu_);
    return state_;
  }

  /// Pending items ordered like rank_top_m (most uncertain first).
  std::vector<ReviewItem> items(ReviewStatus status, RankKey key = RankKey::kKnowledge) const {
    auto out = snapshot().with_status(status);
    auto value = [key](const ReviewItem& r) {
      return key == RankKey::kKnowledge ? r.risk_score.uncertainty.knowledge : r.risk_score.uncertainty.total;
    };
    std::stable_sort(out.begin(), out.end(), [&](const ReviewItem& a, const ReviewItem& b) {
      if (value(a) != value(b)) return value(a) > value(b);
      return a.change_id < b.change_id;
    });
    return out;
  }

  std::vector<Verdict> verdicts() const { return snapshot().verdicts; }
  std::vector<Event> events() const {
    std::lock_guard<std::mutex> lock(mu_);
    return log_.events();
  }

 private:
  mutable std::mutex mu_;
  EventLog log_;
  QueueState state_;
};

// ---------------------------------------------------------------------------
// Training-set assembly
// ---------------------------------------------------------------------------

inline constexpr Timestamp kDefaultHalfLife = 90 * kSecondsPerDay;

/// Recency weight 2^(-age/half_life); rows timestamped after `now` count as
/// age 0.
inline double recency_weight(Timestamp row_time, Timestamp now, Timestamp half_life) {
  const double age = static_cast<double>(std::max<Timestamp>(0, now - row_time));
  return std::max(std::exp2(-age / static_cast<double>(half_life)), std::numeric_limits<double>::min());
}

/// Reweights `history` by recency and applies expert verdicts: a row with a
/// verdict takes the expert label and has its weight multiplied by
/// `feedback_multiplier`.
inline Dataset assemble_training_set(const Dataset& history, const std::vector<Verdict>& verdicts,
                                     Timestamp half_life, double feedback_multiplier, Timestamp now) {
  if (half_life <= 0) throw Error(ErrorCode::kInvalidConfig, "half_life must be positive");
  if (!(feedback_multiplier >= 1.0)) throw Error(ErrorCode::kInvalidConfig, "feedback_multiplier must be >= 1");
  std::unordered_map<std::string, Label> expert;
  for (const auto& v : verdicts) expert[v.change_id] = v.expert_label;
  std::vector<double> weights(history.size());
  std::vector<Label> labels = history.labels();
  for (std::size_t i = 0; i < history.size(); ++i) {
    weights[i] = recency_weight(history.timestamps()[i], now, half_life);
    auto it = expert.find(history.ids()[i]);
    if (it != expert.end()) {
      labels[i] = it->second;
      weights[i] *= feedback_multiplier;
    }
  }
  return Dataset(history.schema(), history.rows(), std::move(labels), std::move(weights), history.timestamps(),
                 history.ids());
}

}  // namespace crqrisk

#endif  // CRQRISK_FEEDBACK_HPP_
