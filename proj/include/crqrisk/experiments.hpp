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

#ifndef CRQRISK_EXPERIMENTS_HPP_
#define CRQRISK_EXPERIMENTS_HPP_

#include <string>
#include <vector>

#include "crqrisk/evaluation.hpp"
#include "crqrisk/features.hpp"
#include "crqrisk/logistic.hpp"
#include "crqrisk/pipeline.hpp"

namespace crqrisk {

/// Validation metrics of the boosted pipeline and of a logistic baseline
/// trained on the same time-ordered split and the same encoded features.
struct BaselineComparison {
  ClassificationMetrics gbdt;
  ClassificationMetrics logistic;
  std::size_t n_train = 0;
  std::size_t n_validation = 0;
};

/// The logistic baseline sees the training rows median-imputed (with the
/// training medians applied to the validation rows too) and unit weights;
/// both thresholds are chosen on the validation fold at `cfg.min_tpr`.
inline BaselineComparison compare_with_logistic(const std::vector<ChangeRequest>& records,
                                                const std::vector<Label>& labels, const PipelineConfig& cfg,
                                                const LogisticConfig& lcfg = {}) {
  const Timestamp now = records.empty() ? 0 : records[time_order(records).back()].submitted_at;
  const auto result = train_pipeline(records, labels, {}, now, cfg);
  if (!result.validation) throw Error(ErrorCode::kSingleClassDataset, "validation fold lacks a class");

  const auto order = time_order(records);
  std::vector<ChangeRequest> train_rec;
  std::vector<Label> train_lab;
  for (std::size_t k = 0; k < result.n_train; ++k) {
    train_rec.push_back(records[order[k]]);
    train_lab.push_back(labels[order[k]]);
  }
  const auto encoder = result.bundle.encoder();
  const Dataset train_set = encoder.dataset(train_rec, train_lab);
  const auto fill = fit_imputer(train_set, ImputeStrategy::kMedian);
  const auto lr = train_logistic_baseline(apply_imputation(train_set, fill), lcfg);
  const Dataset val_set =
      apply_imputation(encoder.dataset(result.validation_records, result.validation_labels), fill);
  std::vector<double> scores;
  for (const auto& r : val_set.rows()) scores.push_back(lr.predict_proba(r));

  BaselineComparison out;
  out.gbdt = *result.validation;
  out.logistic = classification_metrics(
      scores, val_set.labels(), select_operating_threshold(scores, val_set.labels(), cfg.min_tpr));
  out.n_train = result.n_train;
  out.n_validation = result.validation_records.size();
  return out;
}

/// One row per oversampling mode: validation metrics of the pipeline
/// trained with that mode, all else equal.
struct OversamplingRow {
  OversampleMode mode = OversampleMode::kNone;
  ClassificationMetrics metrics;
  std::size_t n_synthetic = 0;
};

inline std::vector<OversamplingRow> compare_oversampling(const std::vector<ChangeRequest>& records,
                                                         const std::vector<Label>& labels, PipelineConfig cfg) {
  const Timestamp now = records.empty() ? 0 : records[time_order(records).back()].submitted_at;
  std::vector<OversamplingRow> rows;
  for (auto mode : {OversampleMode::kNone, OversampleMode::kSmote, OversampleMode::kAdasyn}) {
    cfg.oversample = mode;
    const auto result = train_pipeline(records, labels, {}, now, cfg);
    if (!result.validation) throw Error(ErrorCode::kSingleClassDataset, "validation fold lacks a class");
    rows.push_back({mode, *result.validation, result.n_synthetic});
  }
  return rows;
}

}  // namespace crqrisk

#endif  // CRQRISK_EXPERIMENTS_HPP_
