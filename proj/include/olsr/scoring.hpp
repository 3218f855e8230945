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

#include "olsr/data.hpp"
#include "olsr/detector.hpp"

namespace olsr {

/// Normalised L2 distance |f/|f| - f_hat/|f||: both terms are scaled by the
/// norm of the target f. Throws kScoring when |f| <= kNormGuard.
double nl2(std::span<const double> f, std::span<const double> f_hat);

/// Plain |f - f_hat|.
double l2_distance(std::span<const double> f, std::span<const double> f_hat);

/// Gaussian CDF / CCDF at x with mean mu and scale `scale`. A zero scale is
/// the step-function limit (0.5 exactly at mu).
double gaussian_cdf(double x, double mu, double scale);
double gaussian_ccdf(double x, double mu, double scale);

/// phi = CDF and psi = CCDF with scale sigma + epsilon (sigma alone when
/// `use_epsilon` is false).
double phi(double x, const GaussianFit& g, bool use_epsilon = true);
double psi(double x, const GaussianFit& g, bool use_epsilon = true);

struct ScoreOptions {
  bool use_epsilon = true;
};

/// Per-sample statistics before the Gaussian mapping.
struct RawStatistics {
  double conf = 0.0;  // max_j S(Wv/T)_j
  double r1 = 0.0;    // Dist(v, D1(.))
  double r2 = 0.0;    // Dist(Wv/T, D2(S(Wv/T))), layerwise only
  std::size_t predicted = 0;
  bool degenerate = false;  // |v| or |Wv| under the guard
};

RawStatistics raw_statistics(const DetectorModel& model, std::span<const double> v,
                             Distance distance);

struct ScoreBundle {
  double conf = 0.0;
  double r1 = 0.0;
  double r2 = 0.0;
  double phi0 = 0.0;
  double psi1 = 0.0;
  double psi2 = 0.0;
  double score = 0.0;  // phi0 * psi1 * psi2
  std::size_t predicted = 0;
  bool flagged = false;  // degenerate input, scored 0
};

/// Combines raw statistics into the three factors and their product.
/// Degenerate statistics give score 0 and the flag.
ScoreBundle score_from_statistics(const RawStatistics& stats, const Calibration& calibration,
                                  Framework framework, const ScoreOptions& options = {});

/// Normality score of one AV vector. Degenerate inputs are not an error:
/// they come back flagged with score 0.
ScoreBundle normality_score(const DetectorModel& model, const Calibration& calibration,
                            std::span<const double> v, const ScoreOptions& options = {});

/// Scores every row of `set`, in order. Throws kDimension if H differs.
std::vector<ScoreBundle> score_features(const DetectorModel& model, const Calibration& calibration,
                                        const FeatureSet& set, const ScoreOptions& options = {});

/// Lower-interpolated (1 - target_tpr) quantile of ID validation scores.
double threshold_from_validation(std::span<const double> scores, double target_tpr = 0.95);

/// Samples strictly below the threshold are OoD.
inline bool is_ood(double score, double threshold) { return score < threshold; }

}  // namespace olsr
