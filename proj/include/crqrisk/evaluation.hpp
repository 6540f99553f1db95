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

#ifndef CRQRISK_EVALUATION_HPP_
#define CRQRISK_EVALUATION_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "crqrisk/domain.hpp"
#include "crqrisk/feedback.hpp"

namespace crqrisk {

struct ConfusionCounts {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  double operating_threshold = 0.5;

  std::size_t positives() const { return tp + fn; }
  std::size_t negatives() const { return fp + tn; }
};

/// A score at or above the threshold is a positive call.
inline ConfusionCounts confusion_counts(std::span<const double> scores, std::span<const Label> labels,
                                        double threshold) {
  if (scores.size() != labels.size()) throw Error(ErrorCode::kInvalidDataset, "scores/labels length differ");
  ConfusionCounts c;
  c.operating_threshold = threshold;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool flagged = scores[i] >= threshold;
    if (labels[i] == Label::kRisky) {
      (flagged ? c.tp : c.fn) += 1;
    } else {
      (flagged ? c.fp : c.tn) += 1;
    }
  }
  return c;
}

struct ClassificationMetrics {
  double tpr = 0.0;
  double fpr = 0.0;
  /// TPR/FPR; +inf when FPR = 0 < TPR, 0 when both are 0.
  double plr = 0.0;
  ConfusionCounts counts;
};

inline ClassificationMetrics metrics_from_counts(const ConfusionCounts& c) {
  if (c.positives() == 0 || c.negatives() == 0) {
    throw Error(ErrorCode::kSingleClassValidation, "validation data needs both classes");
  }
  ClassificationMetrics m;
  m.counts = c;
  m.tpr = static_cast<double>(c.tp) / static_cast<double>(c.positives());
  m.fpr = static_cast<double>(c.fp) / static_cast<double>(c.negatives());
  if (m.fpr > 0.0) {
    m.plr = m.tpr / m.fpr;
  } else {
    m.plr = m.tpr > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  }
  return m;
}

inline ClassificationMetrics classification_metrics(std::span<const double> scores, std::span<const Label> labels,
                                                    double threshold) {
  return metrics_from_counts(confusion_counts(scores, labels, threshold));
}

inline constexpr double kMinOperatingTpr = 0.70;

/// Threshold maximizing PLR subject to TPR >= min_tpr, searched over the
/// distinct scores. Ties prefer higher TPR, then the higher threshold.
inline double select_operating_threshold(std::span<const double> scores, std::span<const Label> labels,
                                         double min_tpr = kMinOperatingTpr) {
  if (scores.size() != labels.size()) throw Error(ErrorCode::kInvalidDataset, "scores/labels length differ");
  std::vector<std::pair<double, bool>> s;
  std::size_t pos = 0, neg = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool risky = labels[i] == Label::kRisky;
    s.emplace_back(scores[i], risky);
    (risky ? pos : neg) += 1;
  }
  if (pos == 0 || neg == 0) throw Error(ErrorCode::kSingleClassValidation, "validation data needs both classes");
  std::sort(s.begin(), s.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  double best_t = s.back().first, best_plr = -1.0, best_tpr = -1.0;
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < s.size();) {
    const double t = s[i].first;
    for (; i < s.size() && s[i].first == t; ++i) (s[i].second ? tp : fp) += 1;
    const double tpr = static_cast<double>(tp) / static_cast<double>(pos);
    if (tpr < min_tpr) continue;
    const double fpr = static_cast<double>(fp) / static_cast<double>(neg);
    const double plr = fpr > 0.0 ? tpr / fpr : std::numeric_limits<double>::infinity();
    if (plr > best_plr || (plr == best_plr && tpr > best_tpr)) {
      best_plr = plr;
      best_tpr = tpr;
      best_t = t;
    }
  }
  return best_t;
}

inline double major_issues_per_10k(std::size_t n_major, std::size_t n_crq) {
  if (n_crq == 0) throw Error(ErrorCode::kZeroCrq, "no change requests in window");
  return 10000.0 * static_cast<double>(n_major) / static_cast<double>(n_crq);
}

/// Percentage decline from the first to the last value of a series.
inline double percent_decline(std::span<const double> series) {
  if (series.size() < 2 || series.front() == 0.0) {
    throw Error(ErrorCode::kInvalidDataset, "decline needs two points and a nonzero start");
  }
  return 100.0 * (series.front() - series.back()) / series.front();
}

/// Share (percent) of reviewed, model-flagged changes the expert confirmed
/// as risky; absent when no flagged change was reviewed.
inline std::optional<double> man_machine_agreement(std::span<const Verdict> verdicts) {
  std::size_t flagged = 0, accepted = 0;
  for (const auto& v : verdicts) {
    if (!v.model_flagged) continue;
    ++flagged;
    accepted += v.expert_label == Label::kRisky;
  }
  if (flagged == 0) return std::nullopt;
  return 100.0 * static_cast<double>(accepted) / static_cast<double>(flagged);
}

inline Json metrics_json(const ClassificationMetrics& m) {
  return Json{{"tpr", m.tpr},
              {"fpr", m.fpr},
              {"plr", std::isinf(m.plr) ? Json("inf") : Json(m.plr)},
              {"threshold", m.counts.operating_threshold},
              {"tp", m.counts.tp},
              {"fp", m.counts.fp},
              {"tn", m.counts.tn},
              {"fn", m.counts.fn}};
}

/// Mean and sample standard deviation.
struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;
};

inline MeanStd mean_std(std::span<const double> xs) {
  MeanStd r;
  if (xs.empty()) return r;
  for (double x : xs) r.mean += x;
  r.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double s = 0.0;
    for (double x : xs) s += (x - r.mean) * (x - r.mean);
    r.stddev = std::sqrt(s / static_cast<double>(xs.size() - 1));
  }
  return r;
}

/// One month of the business-metric series.
struct MonthMetrics {
  int month = 0;
  std::size_t n_crq = 0;
  std::size_t n_risky = 0;
  std::size_t n_major = 0;
  std::size_t n_flagged = 0;
  std::size_t n_reviewed = 0;
  double majors_per_10k = 0.0;
  std::optional<double> agreement;
  bool drift_alarm = false;
  int retrains = 0;
  std::string model_version;
};

inline void to_json(Json& j, const MonthMetrics& m) {
  j = Json{{"month", m.month},
           {"n_crq", m.n_crq},
           {"n_risky", m.n_risky},
           {"n_major", m.n_major},
           {"n_flagged", m.n_flagged},
           {"n_reviewed", m.n_reviewed},
           {"majors_per_10k", m.majors_per_10k},
           {"agreement", m.agreement ? Json(*m.agreement) : Json(nullptr)},
           {"drift_alarm", m.drift_alarm},
           {"retrains", m.retrains},
           {"model_version", m.model_version}};
}

/// Month-over-month CSV; an absent agreement is an empty cell.
inline std::string month_series_csv(std::span<const MonthMetrics> months) {
  std::ostringstream os;
  os << "month,n_crq,n_risky,n_major,majors_per_10k,n_flagged,n_reviewed,agreement_pct,drift_alarm,retrains,"
        "model_version\n";
  for (const auto& m : months) {
    os << m.month << ',' << m.n_crq << ',' << m.n_risky << ',' << m.n_major << ',' << m.majors_per_10k << ','
       << m.n_flagged << ',' << m.n_reviewed << ',';
    if (m.agreement) os << *m.agreement;
    os << ',' << (m.drift_alarm ? 1 : 0) << ',' << m.retrains << ',' << m.model_version << '\n';
  }
  return os.str();
}

}  // namespace crqrisk

#endif  // CRQRISK_EVALUATION_HPP_
