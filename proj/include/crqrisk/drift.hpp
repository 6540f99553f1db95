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

#ifndef CRQRISK_DRIFT_HPP_
#define CRQRISK_DRIFT_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "crqrisk/domain.hpp"

namespace crqrisk {

/// Alarm level on the aggregate drift score.
inline constexpr double kDefaultDriftThreshold = 0.07;

/// Name of the extra monitored column holding predicted probabilities.
inline constexpr const char* kPredictionProxyFeature = "__predicted_probability";

/// Two-sample Kolmogorov-Smirnov statistic: the largest gap between the two
/// empirical CDFs, evaluated after every distinct pooled value.
inline double ks_statistic(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::kEmptySample, "KS statistic needs two nonempty samples");
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double n = static_cast<double>(x.size());
  const double m = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() || j < y.size()) {
    double v;
    if (i == x.size()) {
      v = y[j];
    } else if (j == y.size()) {
      v = x[i];
    } else {
      v = std::min(x[i], y[j]);
    }
    while (i < x.size() && x[i] <= v) ++i;
    while (j < y.size() && y[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
  }
  return d;
}

/// c(alpha) = sqrt(-ln(alpha/2) / 2), the asymptotic two-sided critical
/// coefficient.
inline double ks_critical_value(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::kInvalidAlpha, "alpha must lie in (0,1)");
  return std::sqrt(-std::log(alpha / 2.0) / 2.0);
}

inline double ks_rejection_threshold(std::size_t n, std::size_t m, double alpha) {
  if (n == 0 || m == 0) throw Error(ErrorCode::kEmptySample, "sample sizes must be >= 1");
  const double nn = static_cast<double>(n), mm = static_cast<double>(m);
  return ks_critical_value(alpha) * std::sqrt((nn + mm) / (nn * mm));
}

/// True when D exceeds c(alpha) * sqrt((n+m)/(nm)).
inline bool ks_reject(double d, std::size_t n, std::size_t m, double alpha) {
  return d > ks_rejection_threshold(n, m, alpha);
}

struct FeatureDrift {
  std::string feature_name;
  double d = 0.0;
  double weight = 0.0;
  std::size_t n_ref = 0;
  std::size_t n_cur = 0;
};

struct DriftReport {
  std::vector<FeatureDrift> per_feature;
  double d_final = 0.0;
  double threshold = kDefaultDriftThreshold;
  bool alarm = false;
  std::size_t n_ref = 0;
  std::size_t n_cur = 0;
  Timestamp computed_at = 0;
  std::vector<std::string> warnings;
};

inline void to_json(Json& j, const DriftReport& r) {
  Json feats = Json::array();
  for (const auto& f : r.per_feature) {
    feats.push_back({{"feature_name", f.feature_name}, {"d", f.d}, {"weight", f.weight}, {"n_ref", f.n_ref},
                     {"n_cur", f.n_cur}});
  }
  j = Json{{"per_feature", feats},
           {"d_final", r.d_final},
           {"threshold", r.threshold},
           {"alarm", r.alarm},
           {"sample_sizes", {r.n_ref, r.n_cur}},
           {"computed_at", format_iso8601(r.computed_at)},
           {"warnings", r.warnings}};
}

inline void from_json(const Json& j, DriftReport& r) {
  r = DriftReport{};
  for (const auto& f : j.at("per_feature")) {
    r.per_feature.push_back({f.at("feature_name").get<std::string>(), f.at("d").get<double>(),
                             f.at("weight").get<double>(), f.value("n_ref", std::size_t{0}),
                             f.value("n_cur", std::size_t{0})});
  }
  r.d_final = j.at("d_final").get<double>();
  r.threshold = j.at("threshold").get<double>();
  r.alarm = j.at("alarm").get<bool>();
  r.n_ref = j.at("sample_sizes").at(0).get<std::size_t>();
  r.n_cur = j.at("sample_sizes").at(1).get<std::size_t>();
  r.computed_at = timestamp_from_json(j.at("computed_at"));
  r.warnings = j.value("warnings", std::vector<std::string>{});
}

/// Importances rescaled to sum to K; all-zero importances become uniform.
inline std::vector<double> rescale_importances(std::span<const double> importances) {
  const double k = static_cast<double>(importances.size());
  const double total = std::accumulate(importances.begin(), importances.end(), 0.0);
  std::vector<double> w(importances.size(), 1.0);
  if (total > 0.0) {
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = k * importances[i] / total;
  }
  return w;
}

/// Eq 6 on precomputed statistics: (1/K) * sum_i w_i * D_i with the
/// importances rescaled to sum to K.
inline double aggregate_drift(std::span<const double> d, std::span<const double> importances) {
  if (d.size() != importances.size()) throw Error(ErrorCode::kSchemaMismatch, "statistic/importance count differs");
  if (d.empty()) throw Error(ErrorCode::kEmptyDataset, "no drift statistics");
  const auto w = rescale_importances(importances);
  double weighted = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) weighted += w[i] * d[i];
  return weighted / static_cast<double>(d.size());
}

/// Optional predicted-probability samples monitored as one extra column of
/// weight 1 next to the K features.
struct PredictionSamples {
  std::vector<double> ref;
  std::vector<double> cur;
};

/// Importance-weighted mean of per-feature KS statistics:
/// d_final = (1/K) * sum_i w_i * D_i with sum_i w_i = K. Missing entries
/// are left out of each feature's ECDF; a feature with no observed values
/// in either window contributes D = 0 and a warning.
inline DriftReport weighted_drift(const FeatureSchema& schema, std::span<const FeatureVector> ref,
                                  std::span<const FeatureVector> cur, std::span<const double> importances,
                                  double threshold = kDefaultDriftThreshold,
                                  const std::optional<PredictionSamples>& predictions = std::nullopt,
                                  Timestamp computed_at = 0) {
  if (ref.empty() || cur.empty()) throw Error(ErrorCode::kEmptyDataset, "drift windows must be nonempty");
  const std::size_t k = schema.size();
  if (importances.size() != k) {
    throw Error(ErrorCode::kSchemaMismatch, "importance vector width " + std::to_string(importances.size()) +
                                                " != schema size " + std::to_string(k));
  }
  for (const auto* window : {&ref, &cur}) {
    for (const auto& row : *window) {
      if (row.size() != k) throw Error(ErrorCode::kSchemaMismatch, "drift window row width differs from schema");
    }
  }
  DriftReport report;
  report.threshold = threshold;
  report.n_ref = ref.size();
  report.n_cur = cur.size();
  report.computed_at = computed_at;
  const auto w = rescale_importances(importances);
  double weighted = 0.0;
  std::vector<double> a, b;
  for (std::size_t f = 0; f < k; ++f) {
    a.clear();
    b.clear();
    for (const auto& r : ref) {
      if (!r.missing[f]) a.push_back(r.values[f]);
    }
    for (const auto& r : cur) {
      if (!r.missing[f]) b.push_back(r.values[f]);
    }
    FeatureDrift fd{schema[f].name, 0.0, w[f], a.size(), b.size()};
    if (a.empty() || b.empty()) {
      report.warnings.push_back("feature '" + schema[f].name + "' has no observed values in a window; D set to 0");
    } else {
      fd.d = ks_statistic(a, b);
    }
    weighted += fd.weight * fd.d;
    report.per_feature.push_back(std::move(fd));
  }
  double denom = static_cast<double>(k);
  if (predictions && !predictions->ref.empty() && !predictions->cur.empty()) {
    FeatureDrift fd{kPredictionProxyFeature, ks_statistic(predictions->ref, predictions->cur), 1.0,
                    predictions->ref.size(), predictions->cur.size()};
    weighted += fd.d;
    denom += 1.0;
    report.per_feature.push_back(std::move(fd));
  }
  report.d_final = denom > 0.0 ? weighted / denom : 0.0;
  report.alarm = report.d_final > threshold;
  return report;
}

inline DriftReport weighted_drift(const Dataset& ref, const Dataset& cur, std::span<const double> importances,
                                  double threshold = kDefaultDriftThreshold) {
  if (ref.empty() || cur.empty()) throw Error(ErrorCode::kEmptyDataset, "drift windows must be nonempty");
  if (!(*ref.schema() == *cur.schema())) throw Error(ErrorCode::kSchemaMismatch, "drift windows use different schemas");
  return weighted_drift(*ref.schema(), ref.rows(), cur.rows(), importances, threshold);
}

/// Empirical alarm threshold for a target false-alarm rate: the (1 - alpha)
/// quantile of d_final between disjoint random windows of sizes n_ref and
/// n_cur drawn from drift-free `rows`. When `rows` is too small for both
/// windows they are shrunk proportionally, which errs towards a higher
/// (more conservative) threshold.
inline double calibrate_drift_threshold(const FeatureSchema& schema, std::span<const FeatureVector> rows,
                                        std::span<const double> importances, std::size_t n_ref, std::size_t n_cur,
                                        double alpha, std::size_t n_resamples, std::uint64_t seed) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::kInvalidAlpha, "alpha must lie in (0,1)");
  if (n_ref == 0 || n_cur == 0 || n_resamples == 0) {
    throw Error(ErrorCode::kInvalidConfig, "window sizes and resample count must be positive");
  }
  if (rows.size() < 2) throw Error(ErrorCode::kEmptyDataset, "calibration needs at least two rows");
  if (n_ref + n_cur > rows.size()) {
    const double scale = static_cast<double>(rows.size()) / static_cast<double>(n_ref + n_cur);
    n_ref = std::max<std::size_t>(1, static_cast<std::size_t>(static_cast<double>(n_ref) * scale));
    n_cur = std::max<std::size_t>(1, std::min(rows.size() - n_ref, static_cast<std::size_t>(static_cast<double>(n_cur) * scale)));
  }
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> idx(rows.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<double> stats;
  stats.reserve(n_resamples);
  std::vector<FeatureVector> a(n_ref), b(n_cur);
  for (std::size_t r = 0; r < n_resamples; ++r) {
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t i = 0; i < n_ref; ++i) a[i] = rows[idx[i]];
    for (std::size_t i = 0; i < n_cur; ++i) b[i] = rows[idx[n_ref + i]];
    stats.push_back(weighted_drift(schema, a, b, importances, 0.5).d_final);
  }
  std::sort(stats.begin(), stats.end());
  const auto k = static_cast<std::size_t>(std::ceil((1.0 - alpha) * static_cast<double>(stats.size()))) - 1;
  return stats[std::min(k, stats.size() - 1)];
}

struct AlarmDecision {
  bool alarm = false;
  /// A retrain request should be appended to the event log.
  bool request_retrain = false;
};

/// Alarm iff d_final > threshold (strict). A retrain is requested only when
/// none is already pending, so repeated alarms collapse into one request.
inline AlarmDecision check_alarm(const DriftReport& report, double threshold, bool retrain_pending = false) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw Error(ErrorCode::kInvalidConfig, "threshold must lie in (0,1)");
  AlarmDecision d;
  d.alarm = report.d_final > threshold;
  d.request_retrain = d.alarm && !retrain_pending;
  return d;
}

}  // namespace crqrisk

#endif  // CRQRISK_DRIFT_HPP_
