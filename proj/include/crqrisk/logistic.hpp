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

#ifndef CRQRISK_LOGISTIC_HPP_
#define CRQRISK_LOGISTIC_HPP_

#include <cmath>
#include <vector>

#include "crqrisk/domain.hpp"
#include "crqrisk/gbdt.hpp"

namespace crqrisk {

struct LogisticConfig {
  double l2 = 1e-3;
  std::size_t epochs = 500;
  double step = 0.2;
};

/// L2-regularized logistic regression on standardized features.
struct LogisticModel {
  std::vector<double> mean;
  std::vector<double> scale;
  std::vector<double> coef;
  double intercept = 0.0;

  double margin(const FeatureVector& x) const {
    double z = intercept;
    for (std::size_t j = 0; j < coef.size(); ++j) z += coef[j] * (x.values[j] - mean[j]) / scale[j];
    return z;
  }

  double predict_proba(const FeatureVector& x) const {
    if (x.size() != coef.size()) throw Error(ErrorCode::kSchemaMismatch, "feature vector width");
    if (x.any_missing()) throw Error(ErrorCode::kMissingValuesPresent, "logistic model needs imputed input");
    return sigmoid(margin(x));
  }
};

/// Full-batch gradient descent on the weight-normalized logistic loss plus
/// (l2/2)|coef|^2. The intercept starts at the weighted prior log-odds, so
/// zero epochs predicts the class prior everywhere.
inline LogisticModel train_logistic_baseline(const Dataset& ds, const LogisticConfig& cfg = {}) {
  if (ds.empty()) throw Error(ErrorCode::kEmptyDataset, "training dataset is empty");
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds.row(i).any_missing()) {
      throw Error(ErrorCode::kMissingValuesPresent, "row '" + ds.ids()[i] + "' has missing values; impute first");
    }
  }
  const std::size_t n = ds.size();
  const std::size_t k = ds.n_features();
  double w_sum = 0.0, w_pos = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    w_sum += ds.weights()[i];
    if (ds.label(i) == Label::kRisky) w_pos += ds.weights()[i];
  }
  if (w_pos == 0.0 || w_pos == w_sum) throw Error(ErrorCode::kSingleClassDataset, "training data has one class");

  LogisticModel m;
  m.mean.assign(k, 0.0);
  m.scale.assign(k, 1.0);
  m.coef.assign(k, 0.0);
  for (std::size_t j = 0; j < k; ++j) {
    double s = 0.0, s2 = 0.0;
    for (const auto& r : ds.rows()) s += r.values[j];
    m.mean[j] = s / static_cast<double>(n);
    for (const auto& r : ds.rows()) s2 += (r.values[j] - m.mean[j]) * (r.values[j] - m.mean[j]);
    const double sd = std::sqrt(s2 / static_cast<double>(n));
    m.scale[j] = sd > 1e-12 ? sd : 1.0;
  }
  m.intercept = std::log(w_pos / (w_sum - w_pos));

  std::vector<std::vector<double>> z(n, std::vector<double>(k));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) z[i][j] = (ds.row(i).values[j] - m.mean[j]) / m.scale[j];
  }
  std::vector<double> grad(k);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double grad_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double f = m.intercept;
      for (std::size_t j = 0; j < k; ++j) f += m.coef[j] * z[i][j];
      const double r = ds.weights()[i] * (sigmoid(f) - label_value(ds.label(i))) / w_sum;
      grad_b += r;
      for (std::size_t j = 0; j < k; ++j) grad[j] += r * z[i][j];
    }
    m.intercept -= cfg.step * grad_b;
    for (std::size_t j = 0; j < k; ++j) m.coef[j] -= cfg.step * (grad[j] + cfg.l2 * m.coef[j]);
  }
  return m;
}

}  // namespace crqrisk

#endif  // CRQRISK_LOGISTIC_HPP_
