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

#ifndef CRQRISK_SIMULATE_HPP_
#define CRQRISK_SIMULATE_HPP_

#include <cstdlib>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "crqrisk/corpus.hpp"
#include "crqrisk/evaluation.hpp"
#include "crqrisk/service.hpp"

namespace crqrisk {

struct SimulationConfig {
  int months = 7;
  /// Drift starts with the first record of month `drift_at_month + 1`;
  /// 0 disables drift.
  int drift_at_month = 4;
  /// Labeled months available before month 1 to train the first model.
  int bootstrap_months = 1;
  std::size_t records_per_month = 8000;
  int batches_per_month = 4;
  double prevalence = 0.015;
  std::uint64_t seed = 7;
  /// Empty: a temporary directory that is removed afterwards.
  std::string data_dir;
  ServiceConfig service;
  /// Drift planted at onset; defaults to a flipped Q&A answer plus a
  /// shifted change size.
  std::vector<DriftInjection> drifts;
};

inline SimulationConfig default_simulation_config() {
  SimulationConfig cfg;
  cfg.service.review_m = 50;
  cfg.service.pipeline.gbdt.n_trees = 100;
  cfg.service.pipeline.gbdt.max_depth = 4;
  cfg.service.pipeline.half_life = 45 * kSecondsPerDay;
  // A month of 8000 changes holds ~120 risky ones; a small validation fold
  // keeps the newest month mostly in training after a shift, and stale
  // pre-alarm rows are nearly discarded.
  cfg.service.pipeline.validation_fraction = 0.05;
  cfg.service.pipeline.pre_drift_weight = 0.05;
  cfg.service.drift_min_window = 1000;
  cfg.service.drift_max_window = 2000;
  cfg.drifts = {{"previously_implemented", 0, DriftKind::kCategorySwap, 1.0},
                {"change_size", 0, DriftKind::kMeanShift, 1.0}};
  return cfg;
}

struct SimulationResult {
  std::vector<MonthMetrics> months;
  std::vector<Json> retrains;
};

namespace simulate_detail {

class ScratchDir {
 public:
  explicit ScratchDir(const std::string& requested) {
    if (!requested.empty()) {
      path_ = requested;
      fs::create_directories(path_);
      return;
    }
    std::string tmpl = (fs::temp_directory_path() / "crqrisk-sim-XXXXXX").string();
    if (!::mkdtemp(tmpl.data())) throw Error(ErrorCode::kIoError, "cannot create a temporary directory");
    path_ = tmpl;
    owned_ = true;
  }
  ~ScratchDir() {
    if (owned_) {
      std::error_code ec;
      fs::remove_all(path_, ec);
    }
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
  bool owned_ = false;
};

}  // namespace simulate_detail

/// Plays a generated change stream through the service month by month:
/// score in batches, auto-play expert verdicts from ground truth for the
/// enqueued items, react to drift alarms, reveal the month's outcomes at
/// month end and run the scheduled retrain.
inline SimulationResult simulate(const SimulationConfig& cfg) {
  if (cfg.months < 1 || cfg.bootstrap_months < 1 || cfg.batches_per_month < 1 || cfg.records_per_month == 0) {
    throw Error(ErrorCode::kInvalidConfig, "months, bootstrap_months, batches and records must be positive");
  }
  if (cfg.drift_at_month < 0 || cfg.drift_at_month >= cfg.months) {
    throw Error(ErrorCode::kInvalidConfig, "drift_at_month must lie in [0, months)");
  }
  const std::size_t per_month = cfg.records_per_month;
  const std::size_t total = per_month * static_cast<std::size_t>(cfg.bootstrap_months + cfg.months);
  const Timestamp month_seconds = 30 * kSecondsPerDay;

  GeneratorConfig gen;
  gen.n_records = total;
  gen.risky_prevalence = cfg.prevalence;
  gen.seed = cfg.seed;
  gen.interval_seconds = std::max<Timestamp>(1, month_seconds / static_cast<Timestamp>(per_month));
  std::vector<DriftInjection> drifts;
  if (cfg.drift_at_month > 0) {
    for (auto d : cfg.drifts) {
      d.onset_index = per_month * static_cast<std::size_t>(cfg.bootstrap_months + cfg.drift_at_month);
      drifts.push_back(d);
    }
  }
  const auto corpus = generate(gen, drifts);
  std::unordered_map<std::string, Label> truth;
  for (std::size_t i = 0; i < total; ++i) truth[corpus.records[i].id] = corpus.labels[i];
  auto slice = [&](std::size_t begin, std::size_t end) {
    return std::make_pair(std::vector<ChangeRequest>(corpus.records.begin() + begin, corpus.records.begin() + end),
                          std::vector<Label>(corpus.labels.begin() + begin, corpus.labels.begin() + end));
  };
  auto record_time = [&](std::size_t i) { return corpus.records[i].submitted_at; };

  simulate_detail::ScratchDir dir(cfg.data_dir);
  ServiceConfig scfg = cfg.service;
  scfg.data_dir = dir.path().string();
  scfg.pipeline.gbdt.seed = cfg.seed;
  RiskService service(scfg);

  SimulationResult result;
  auto note_retrain = [&](const std::optional<RetrainOutcome>& o, int month) {
    if (!o) return;
    Json j = to_json_value(*o);
    j["month"] = month;
    result.retrains.push_back(std::move(j));
  };

  const std::size_t boot_end = per_month * static_cast<std::size_t>(cfg.bootstrap_months);
  {
    const auto [records, labels] = slice(0, boot_end);
    service.add_history(records, labels);
    note_retrain(service.trigger_retrain("scheduled", record_time(boot_end - 1), true), 0);
  }

  for (int month = 1; month <= cfg.months; ++month) {
    const std::size_t begin = boot_end + per_month * static_cast<std::size_t>(month - 1);
    const std::size_t end = begin + per_month;
    MonthMetrics m;
    m.month = month;
    std::vector<Verdict> month_verdicts;
    const std::size_t batches = static_cast<std::size_t>(cfg.batches_per_month);
    for (std::size_t b = 0; b < batches; ++b) {
      const std::size_t lo = begin + per_month * b / batches;
      const std::size_t hi = begin + per_month * (b + 1) / batches;
      if (lo == hi) continue;
      const Timestamp now = record_time(hi - 1);
      const auto [records, labels] = slice(lo, hi);
      const auto scored = service.score_batch(records, now);
      for (std::size_t i = 0; i < scored.scores.size(); ++i) {
        const auto& s = scored.scores[i];
        ++m.n_crq;
        m.n_flagged += s.flagged;
        if (labels[i] == Label::kRisky) {
          ++m.n_risky;
          m.n_major += !s.flagged;
        }
      }
      for (const auto& item : scored.enqueued) {
        month_verdicts.push_back(service.record_verdict(item.change_id, truth.at(item.change_id), "sim-expert", now));
      }
      service.expire_stale(now);
      if (scored.drift && scored.drift->alarm) m.drift_alarm = true;
      if (auto o = service.run_pending_retrain(now)) {
        ++m.retrains;
        note_retrain(o, month);
      }
    }
    m.majors_per_10k = major_issues_per_10k(m.n_major, m.n_crq);
    m.n_reviewed = month_verdicts.size();
    m.agreement = man_machine_agreement(month_verdicts);
    m.model_version = service.active()->version;

    // Outcomes of the month become labeled history; then the monthly retrain.
    const auto [records, labels] = slice(begin, end);
    service.add_history(records, labels);
    if (auto o = service.trigger_retrain("scheduled", record_time(end - 1))) {
      ++m.retrains;
      note_retrain(o, month);
    }
    result.months.push_back(std::move(m));
  }
  return result;
}

}  // namespace crqrisk

#endif  // CRQRISK_SIMULATE_HPP_
