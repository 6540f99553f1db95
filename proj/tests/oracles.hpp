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

// Brute-force reference implementations shared by the unit and acceptance
// tests. They favour obviousness over speed.

#ifndef CRQRISK_TESTS_ORACLES_HPP_
#define CRQRISK_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "crqrisk/gbdt.hpp"

namespace crqrisk::oracle {

/// max over every pooled point and every midpoint between consecutive
/// pooled points of |F_a(x) - F_b(x)|, each ECDF evaluated by counting.
inline double ks_brute_force(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> grid(a.begin(), a.end());
  grid.insert(grid.end(), b.begin(), b.end());
  std::sort(grid.begin(), grid.end());
  const std::size_t n = grid.size();
  for (std::size_t i = 0; i + 1 < n; ++i) grid.push_back(0.5 * (grid[i] + grid[i + 1]));
  grid.push_back(grid.front() - 1.0);
  auto ecdf = [](const std::vector<double>& s, double x) {
    std::size_t c = 0;
    for (double v : s) c += v <= x;
    return static_cast<double>(c) / static_cast<double>(s.size());
  };
  double d = 0.0;
  for (double x : grid) d = std::max(d, std::abs(ecdf(a, x) - ecdf(b, x)));
  return d;
}

/// Exhaustive root split search over every (feature, observed threshold,
/// default direction) triple, visited in the documented tie-break order.
inline SplitCandidate split_brute_force(const std::vector<FeatureVector>& rows, const std::vector<double>& grad,
                                        const std::vector<double>& hess, const SplitParams& params) {
  SplitCandidate best;
  double g = 0.0, h = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    g += grad[i];
    h += hess[i];
  }
  const std::size_t k = rows.empty() ? 0 : rows.front().size();
  for (std::size_t f = 0; f < k; ++f) {
    std::set<double> thresholds;
    for (const auto& r : rows) {
      if (!r.missing[f]) thresholds.insert(r.values[f]);
    }
    for (double t : thresholds) {
      for (bool default_left : {true, false}) {
        double gl = 0.0, hl = 0.0;
        std::size_t cl = 0;
        for (std::size_t i = 0; i < rows.size(); ++i) {
          const bool left = rows[i].missing[f] ? default_left : rows[i].values[f] <= t;
          if (!left) continue;
          gl += grad[i];
          hl += hess[i];
          ++cl;
        }
        if (cl == 0 || cl == rows.size()) continue;
        const double gr = g - gl, hr = h - hl;
        if (hl < params.min_child_hessian || hr < params.min_child_hessian) continue;
        const double gain = split_gain(gl, hl, gr, hr, g, h, params);
        if (gain > 0.0 && (!best.valid || gain > best.gain)) {
          best = {true, static_cast<int>(f), t, default_left, gain, gl, hl, gr, hr};
        }
      }
    }
  }
  return best;
}

/// A random split problem whose gradients and hessians are small dyadic
/// rationals, so every partial sum is exact in double precision and the
/// greedy and brute-force gains can be compared with ==.
struct SplitProblem {
  std::vector<FeatureVector> rows;
  std::vector<double> grad;
  std::vector<double> hess;
};

inline SplitProblem random_split_problem(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> n_rows(2, 64), n_feat(1, 4), level(0, 5), gi(-16, 16), hi(1, 16), coin(0, 9);
  SplitProblem p;
  const int n = n_rows(rng);
  const int k = n_feat(rng);
  for (int i = 0; i < n; ++i) {
    FeatureVector v;
    for (int f = 0; f < k; ++f) {
      v.values.push_back(static_cast<double>(level(rng)) * 0.5);
      v.missing.push_back(coin(rng) == 0);
      if (v.missing.back()) v.values.back() = 0.0;
    }
    p.rows.push_back(std::move(v));
    p.grad.push_back(gi(rng) / 16.0);
    p.hess.push_back(hi(rng) / 16.0);
  }
  return p;
}

}  // namespace crqrisk::oracle

#endif  // CRQRISK_TESTS_ORACLES_HPP_
