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

#ifndef CRQRISK_HTTP_API_HPP_
#define CRQRISK_HTTP_API_HPP_

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <functional>
#include <mutex>
#include <string>
#include <thread>

#include "httplib.h"

#include "crqrisk/service.hpp"

namespace crqrisk {

using Clock = std::function<Timestamp()>;

inline Timestamp wall_clock_now() {
  return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

/// HTTP status for a domain error.
inline int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNoPendingItem:
    case ErrorCode::kUnknownVersion:
      return 404;
    case ErrorCode::kDuplicateVerdict:
      return 409;
    case ErrorCode::kNoActiveModel:
      return 503;
    case ErrorCode::kTrainingFailed:
    case ErrorCode::kIoError:
      return 500;
    default:
      return 400;
  }
}

namespace http_detail {

inline void send_json(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

inline void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message) {
  send_json(res, status, Json{{"error", code}, {"message", message}});
}

inline Json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return Json::object();
  try {
    return Json::parse(req.body);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::kParseError, std::string("request body is not JSON: ") + e.what());
  }
}

}  // namespace http_detail

/// Binds the /v1 JSON API to a service. When `token` is nonempty every
/// request must carry `Authorization: Bearer <token>`.
inline void register_routes(httplib::Server& server, RiskService& service, Clock clock = wall_clock_now) {
  using http_detail::send_error;
  using http_detail::send_json;
  const std::string token = service.config().api_token;

  auto guarded = [token](auto handler) {
    return [token, handler](const httplib::Request& req, httplib::Response& res) {
      if (!token.empty() && req.get_header_value("Authorization") != "Bearer " + token) {
        send_error(res, 401, "Unauthorized", "missing or invalid bearer token");
        return;
      }
      try {
        handler(req, res);
      } catch (const Error& e) {
        send_error(res, http_status(e.code()), error_code_name(e.code()), e.detail());
      } catch (const Json::exception& e) {
        send_error(res, 400, "ValidationError", e.what());
      } catch (const std::exception& e) {
        send_error(res, 500, "InternalError", e.what());
      }
    };
  };

  server.Post("/v1/score", guarded([&service, clock](const httplib::Request& req, httplib::Response& res) {
    const Json body = http_detail::parse_body(req);
    const Json& list = body.is_array() ? body : body.at("requests");
    std::vector<ChangeRequest> requests;
    requests.reserve(list.size());
    for (const auto& r : list) requests.push_back(r.get<ChangeRequest>());
    const auto result = service.score_batch(requests, clock());
    send_json(res, 200,
              Json{{"model_version", result.model_version},
                   {"scores", result.scores},
                   {"enqueued", result.enqueued.size()},
                   {"drift", result.drift ? Json(*result.drift) : Json(nullptr)}});
  }));

  server.Get("/v1/drift/latest", guarded([&service](const httplib::Request&, httplib::Response& res) {
    const auto report = service.latest_drift();
    if (!report) {
      send_error(res, 404, "NotFound", "no drift report yet");
      return;
    }
    send_json(res, 200, Json(*report));
  }));

  server.Get("/v1/reviews", guarded([&service](const httplib::Request& req, httplib::Response& res) {
    const std::string status = req.has_param("status") ? req.get_param_value("status") : "pending";
    ReviewStatus s;
    try {
      s = parse_review_status(status);
    } catch (const Error&) {
      send_error(res, 400, "ValidationError", "unknown status '" + status + "'");
      return;
    }
    send_json(res, 200, Json{{"status", status}, {"items", service.reviews(s)}});
  }));

  server.Post("/v1/reviews/:change_id/verdict",
              guarded([&service, clock](const httplib::Request& req, httplib::Response& res) {
                const Json body = http_detail::parse_body(req);
                const auto label = parse_label(body.at("expert_label").get<std::string>());
                const auto reviewer = body.value("reviewer_id", std::string("anonymous"));
                const auto v = service.record_verdict(req.path_params.at("change_id"), label, reviewer, clock());
                send_json(res, 200, Json(v));
              }));

  server.Get("/v1/metrics", guarded([&service](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, service.metrics());
  }));

  server.Post("/v1/retrain", guarded([&service, clock](const httplib::Request& req, httplib::Response& res) {
    const Json body = http_detail::parse_body(req);
    const auto reason = body.value("reason", std::string("manual"));
    const bool force = body.value("force", false);
    const auto outcome = service.trigger_retrain(reason, clock(), force);
    if (!outcome) {
      send_error(res, 409, "RetrainInFlight", "a retrain is already running");
      return;
    }
    send_json(res, 200, to_json_value(*outcome));
  }));

  server.Get("/v1/models", guarded([&service](const httplib::Request&, httplib::Response& res) {
    const auto active = service.registry().active_version();
    send_json(res, 200, Json{{"active", active ? Json(*active) : Json(nullptr)}, {"models", service.registry().list()}});
  }));

  server.Post("/v1/models/:version/activate", guarded([&service](const httplib::Request& req, httplib::Response& res) {
    const auto& version = req.path_params.at("version");
    service.activate(version);
    send_json(res, 200, Json(*service.registry().entry(version)));
  }));

  server.Post("/v1/history", guarded([&service](const httplib::Request& req, httplib::Response& res) {
    const Json body = http_detail::parse_body(req);
    std::vector<ChangeRequest> records;
    std::vector<Label> labels;
    for (const auto& row : body.at("records")) {
      records.push_back(row.at("change").get<ChangeRequest>());
      labels.push_back(parse_label(row.at("label").get<std::string>()));
    }
    service.add_history(records, labels);
    send_json(res, 200, Json{{"added", records.size()}, {"history_size", service.history_size()}});
  }));
}

/// Background maintenance for a running service: expires stale reviews,
/// runs retrains requested on the event log and the scheduled retrain.
class MaintenanceLoop {
 public:
  MaintenanceLoop(RiskService& service, std::chrono::milliseconds period, Clock clock = wall_clock_now)
      : service_(service), period_(period), clock_(std::move(clock)), thread_([this] { run(); }) {}

  ~MaintenanceLoop() { stop(); }

  void stop() {
    {
      std::lock_guard<std::mutex> lock(mu_);
      stopping_ = true;
    }
    cv_.notify_all();
    if (thread_.joinable()) thread_.join();
  }

  /// Last error raised by a maintenance step (empty if none).
  std::string last_error() const {
    std::lock_guard<std::mutex> lock(mu_);
    return last_error_;
  }

 private:
  void run() {
    std::unique_lock<std::mutex> lock(mu_);
    while (!stopping_) {
      lock.unlock();
      step();
      lock.lock();
      cv_.wait_for(lock, period_, [this] { return stopping_; });
    }
  }

  void step() {
    const Timestamp now = clock_();
    try {
      service_.expire_stale(now);
      if (service_.history_size() > 0) {
        if (!service_.run_pending_retrain(now) && service_.active()) service_.maybe_scheduled_retrain(now);
      }
    } catch (const std::exception& e) {
      std::lock_guard<std::mutex> lock(mu_);
      last_error_ = e.what();
    }
  }

  RiskService& service_;
  std::chrono::milliseconds period_;
  Clock clock_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  bool stopping_ = false;
  std::string last_error_;
  std::thread thread_;
};

}  // namespace crqrisk

#endif  // CRQRISK_HTTP_API_HPP_
