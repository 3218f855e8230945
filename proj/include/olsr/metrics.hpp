// Copyright 2026 The OLSR Authors. All Rights Reserved.
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

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace olsr {

// ID samples are the positive class; a higher score means "more ID".
// Thresholds sweep the distinct observed scores; a sample is accepted as
// ID when score >= threshold. Every function throws kEvaluation when
// either set is empty.

/// FPR at the largest threshold whose TPR is at least `tpr`.
double fpr_at_tpr(std::span<const double> id_scores, std::span<const double> ood_scores,
                  double tpr = 0.95);

/// Mann-Whitney: P(id > ood) + 0.5 P(id == ood).
double auroc(std::span<const double> id_scores, std::span<const double> ood_scores);

/// Area under precision-recall with ID positive, step interpolation
/// (sum over thresholds of recall increment times precision).
double aupr_in(std::span<const double> id_scores, std::span<const double> ood_scores);

/// min over thresholds (including +-inf) of 0.5 (1 - TPR) + 0.5 FPR.
double detection_error(std::span<const double> id_scores, std::span<const double> ood_scores);

struct EvalReport {
  double fpr_at_95tpr = 0.0;
  double auroc = 0.0;
  double aupr_in = 0.0;
  double detection_error = 0.0;
  std::size_t id_count = 0;
  std::size_t ood_count = 0;
};

EvalReport evaluate(std::span<const double> id_scores, std::span<const double> ood_scores);

/// Equal-width bin counts over [lo, hi]; the top edge belongs to the last
/// bin and out-of-range values are clamped.
std::vector<std::size_t> histogram(std::span<const double> scores, std::size_t bins = 64,
                                   double lo = 0.0, double hi = 1.0);

}  // namespace olsr
