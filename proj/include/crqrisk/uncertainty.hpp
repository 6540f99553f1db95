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

#ifndef CRQRISK_UNCERTAINTY_HPP_
#define CRQRISK_UNCERTAINTY_HPP_

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "crqrisk/domain.hpp"
#include "crqrisk/gbdt.hpp"

namespace crqrisk {

/// Entropy of a Bernoulli(p) outcome in bits, with 0 log 0 = 0.
inline double binary_entropy(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::kOutOfRange, "probability outside [0,1]");
  double h = 0.0;
  if (p > 0.0) h -= p * std::log2(p);
  if (p < 1.0) h -= (1.0 - p) * std::log2(1.0 - p);
  return h;
}

/// Mutual information between the prediction and the ensemble member:
/// entropy of the mean prediction (total) minus the mean member entropy
/// (expected data uncertainty). The difference is clamped at zero.
inline UncertaintyBreakdown mutual_information(std::span<const double> member_probs) {
  if (member_probs.empty()) throw Error(ErrorCode::kEmptyEnsemble, "no ensemble members");
  double mean_p = 0.0, mean_h = 0.0;
  for (double p : member_probs) {
    mean_h += binary_entropy(p);
    mean_p += p;
  }
  const double m = static_cast<double>(member_probs.size());
  mean_p /= m;
  mean_h /= m;
  UncertaintyBreakdown u;
  u.total = binary_entropy(std::clamp(mean_p, 0.0, 1.0));
  u.expected_data = std::min(mean_h, u.total);
  u.knowledge = std::max(0.0, u.total - mean_h);
  u.n_members = static_cast<int>(member_probs.size());
  return u;
}

inline constexpr std::size_t kDefaultMembers = 10;

inline UncertaintyBreakdown prediction_uncertainty(const Ensemble& model, const FeatureVector& x,
                                                   std::size_t n_members = kDefaultMembers,
                                                   MemberMode mode = MemberMode::kPrefix) {
  return mutual_information(model.staged_probas(x, std::min(n_members, model.trees.size()), mode));
}

enum class RankKey { kKnowledge, kTotal };

inline RankKey parse_rank_key(std::string_view s) {
  if (s == "knowledge") return RankKey::kKnowledge;
  if (s == "total") return RankKey::kTotal;
  throw Error(ErrorCode::kInvalidConfig, "unknown ranking key '" + std::string(s) + "'");
}

/// Ids of the min(m, batch) most uncertain items, highest first; ties go
/// to the lexicographically smaller change id.
inline std::vector<std::string> rank_top_m(const std::vector<std::pair<std::string, UncertaintyBreakdown>>& batch,
                                           std::size_t m, RankKey key = RankKey::kKnowledge) {
  std::vector<const std::pair<std::string, UncertaintyBreakdown>*> items;
  items.reserve(batch.size());
  for (const auto& b : batch) items.push_back(&b);
  auto value = [key](const UncertaintyBreakdown& u) { return key == RankKey::kKnowledge ? u.knowledge : u.total; };
  const std::size_t take = std::min(m, items.size());
  std::partial_sort(items.begin(), items.begin() + static_cast<std::ptrdiff_t>(take), items.end(),
                    [&](const auto* a, const auto* b) {
                      const double va = value(a->second), vb = value(b->second);
                      if (va != vb) return va > vb;
                      return a->first < b->first;
                    });
  std::vector<std::string> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.push_back(items[i]->first);
  return out;
}

}  // namespace crqrisk

#endif  // CRQRISK_UNCERTAINTY_HPP_
