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

#ifndef CRQRISK_IMBALANCE_HPP_
#define CRQRISK_IMBALANCE_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "crqrisk/domain.hpp"

namespace crqrisk {

enum class OversampleMethod { kSmote, kAdasyn };

inline std::string_view to_string(OversampleMethod m) { return m == OversampleMethod::kSmote ? "smote" : "adasyn"; }

inline OversampleMethod parse_oversample_method(std::string_view s) {
  if (s == "smote") return OversampleMethod::kSmote;
  if (s == "adasyn") return OversampleMethod::kAdasyn;
  throw Error(ErrorCode::kInvalidConfig, "unknown oversampling method '" + std::string(s) + "'");
}

struct OversampleConfig {
  OversampleMethod method = OversampleMethod::kSmote;
  std::size_t k_neighbors = 5;
  /// Desired minority/majority ratio after sampling.
  double target_ratio = 0.1;
  std::uint64_t seed = 0;
};

/// Provenance of one synthetic row: base + delta * (neighbor - base).
struct SyntheticOrigin {
  std::size_t base_row = 0;
  std::size_t neighbor_row = 0;
  double delta = 0.0;
};

struct OversampleResult {
  Dataset data;
  std::vector<SyntheticOrigin> origins;  // one per appended row, in order
};

namespace imbalance_detail {

inline double squared_distance(const FeatureVector& a, const FeatureVector& b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.values.size(); ++j) {
    const double d = a.values[j] - b.values[j];
    s += d * d;
  }
  return s;
}

/// Indices (into `pool`) of the k nearest pool rows to `query`, excluding
/// `self`; ties go to the lower index.
inline std::vector<std::size_t> nearest(const Dataset& ds, std::size_t query, const std::vector<std::size_t>& pool,
                                        std::size_t k) {
  std::vector<std::pair<double, std::size_t>> d;
  d.reserve(pool.size());
  for (std::size_t p = 0; p < pool.size(); ++p) {
    if (pool[p] == query) continue;
    d.emplace_back(squared_distance(ds.row(query), ds.row(pool[p])), p);
  }
  const std::size_t kk = std::min(k, d.size());
  std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(kk), d.end());
  std::vector<std::size_t> out;
  out.reserve(kk);
  for (std::size_t i = 0; i < kk; ++i) out.push_back(d[i].second);
  return out;
}

/// Splits `total` proportionally to `shares` by largest remainder.
inline std::vector<std::size_t> apportion(std::size_t total, const std::vector<double>& shares) {
  const double sum = std::accumulate(shares.begin(), shares.end(), 0.0);
  std::vector<std::size_t> out(shares.size(), 0);
  if (shares.empty()) return out;
  if (!(sum > 0.0)) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = total / out.size() + (i < total % out.size());
    return out;
  }
  std::vector<std::pair<double, std::size_t>> rem;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < shares.size(); ++i) {
    const double exact = static_cast<double>(total) * shares[i] / sum;
    out[i] = static_cast<std::size_t>(std::floor(exact));
    assigned += out[i];
    rem.emplace_back(-(exact - std::floor(exact)), i);
  }
  std::sort(rem.begin(), rem.end());
  for (std::size_t r = 0; assigned < total; ++r, ++assigned) ++out[rem[r % rem.size()].second];
  return out;
}

}  // namespace imbalance_detail

/// Number of synthetic rows needed to lift the minority count to
/// ceil(target_ratio * majority).
inline std::size_t synthetic_count(std::size_t n_minority, std::size_t n_majority, double target_ratio) {
  const double want = std::ceil(target_ratio * static_cast<double>(n_majority) - 1e-9);
  return want > static_cast<double>(n_minority) ? static_cast<std::size_t>(want) - n_minority : 0;
}

/// x + delta * (y - x), clamped per coordinate to [min(x, y), max(x, y)] so
/// rounding can never leave the segment.
inline FeatureVector interpolate(const FeatureVector& base, const FeatureVector& neighbor, double delta) {
  const auto& x = base.values;
  const auto& y = neighbor.values;
  FeatureVector v;
  v.values.resize(x.size());
  v.missing.assign(x.size(), false);
  for (std::size_t j = 0; j < x.size(); ++j) {
    v.values[j] = std::clamp(x[j] + delta * (y[j] - x[j]), std::min(x[j], y[j]), std::max(x[j], y[j]));
  }
  return v;
}

/// SMOTE / ADASYN up-sampling of the risky class. Originals come first and
/// are untouched; synthetic rows follow in base-row order, each a convex
/// combination of a minority row and one of its k nearest minority
/// neighbors.
inline OversampleResult oversample_detailed(const Dataset& ds, const OversampleConfig& cfg) {
  using namespace imbalance_detail;
  if (cfg.k_neighbors < 1) throw Error(ErrorCode::kInvalidConfig, "k_neighbors must be >= 1");
  std::vector<std::size_t> minority, all;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    all.push_back(i);
    if (ds.label(i) == Label::kRisky) minority.push_back(i);
  }
  const std::size_t n_min = minority.size();
  const std::size_t n_maj = ds.size() - n_min;
  if (n_min < cfg.k_neighbors + 1) {
    throw Error(ErrorCode::kTooFewMinority, std::to_string(n_min) + " minority rows for k=" +
                                                std::to_string(cfg.k_neighbors));
  }
  if (n_maj == 0) throw Error(ErrorCode::kInvalidConfig, "no majority rows");
  const double current = static_cast<double>(n_min) / static_cast<double>(n_maj);
  if (!(cfg.target_ratio > current) || cfg.target_ratio > 1.0) {
    throw Error(ErrorCode::kInvalidConfig, "target_ratio must lie in (current ratio, 1]");
  }
  const auto& check = cfg.method == OversampleMethod::kAdasyn ? all : minority;
  for (std::size_t i : check) {
    if (ds.row(i).any_missing()) {
      throw Error(ErrorCode::kMissingValuesPresent, "row '" + ds.ids()[i] + "' has missing values; impute first");
    }
  }

  const std::size_t total = synthetic_count(n_min, n_maj, cfg.target_ratio);

  std::vector<double> shares(n_min, 1.0);
  if (cfg.method == OversampleMethod::kAdasyn) {
    for (std::size_t a = 0; a < n_min; ++a) {
      const auto nn = nearest(ds, minority[a], all, cfg.k_neighbors);
      std::size_t majority_hits = 0;
      for (std::size_t p : nn) majority_hits += ds.label(all[p]) == Label::kNormal;
      shares[a] = static_cast<double>(majority_hits) / static_cast<double>(nn.size());
    }
  }
  const auto counts = apportion(total, shares);

  auto rows = ds.rows();
  auto labels = ds.labels();
  auto weights = ds.weights();
  auto timestamps = ds.timestamps();
  auto ids = ds.ids();
  std::vector<SyntheticOrigin> origins;
  origins.reserve(total);

  for (std::size_t a = 0; a < n_min; ++a) {
    if (counts[a] == 0) continue;
    const std::size_t base = minority[a];
    const auto nn = nearest(ds, base, minority, cfg.k_neighbors);
    std::mt19937_64 rng(cfg.seed ^ (0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(base) + 1)));
    std::uniform_int_distribution<std::size_t> pick(0, nn.size() - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t s = 0; s < counts[a]; ++s) {
      const std::size_t neighbor = minority[nn[pick(rng)]];
      const double delta = unit(rng);
      rows.push_back(interpolate(ds.row(base), ds.row(neighbor), delta));
      labels.push_back(Label::kRisky);
      weights.push_back(ds.weights()[base]);
      timestamps.push_back(ds.timestamps()[base]);
      ids.push_back(ds.ids()[base] + "#syn" + std::to_string(s));
      origins.push_back({base, neighbor, delta});
    }
  }
  return {Dataset(ds.schema(), std::move(rows), std::move(labels), std::move(weights), std::move(timestamps),
                  std::move(ids)),
          std::move(origins)};
}

inline Dataset oversample(const Dataset& ds, const OversampleConfig& cfg) {
  return oversample_detailed(ds, cfg).data;
}

}  // namespace crqrisk

#endif  // CRQRISK_IMBALANCE_HPP_
