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

#include "olsr/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "olsr/error.hpp"

namespace olsr {

double nl2(std::span<const double> f, std::span<const double> f_hat) {
  if (f.size() != f_hat.size()) fail(ErrorCode::kShape, "nl2: length mismatch");
  const double norm = l2_norm(f);
  if (!(norm > kNormGuard)) fail(ErrorCode::kScoring, "nl2: target norm under guard (degenerate feature)");
  double ss = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double d = f[i] / norm - f_hat[i] / norm;
    ss += d * d;
  }
  return std::sqrt(ss);
}

double l2_distance(std::span<const double> f, std::span<const double> f_hat) {
  if (f.size() != f_hat.size()) fail(ErrorCode::kShape, "l2: length mismatch");
  double ss = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) ss += (f[i] - f_hat[i]) * (f[i] - f_hat[i]);
  return std::sqrt(ss);
}

double gaussian_cdf(double x, double mu, double scale) {
  if (scale <= 0.0) return x < mu ? 0.0 : (x > mu ? 1.0 : 0.5);
  return 0.5 * std::erfc(-(x - mu) / (scale * std::numbers::sqrt2));
}

double gaussian_ccdf(double x, double mu, double scale) {
  if (scale <= 0.0) return x < mu ? 1.0 : (x > mu ? 0.0 : 0.5);
  return 0.5 * std::erfc((x - mu) / (scale * std::numbers::sqrt2));
}

double phi(double x, const GaussianFit& g, bool use_epsilon) {
  return gaussian_cdf(x, g.mu, g.sigma + (use_epsilon ? g.epsilon : 0.0));
}

double psi(double x, const GaussianFit& g, bool use_epsilon) {
  return gaussian_ccdf(x, g.mu, g.sigma + (use_epsilon ? g.epsilon : 0.0));
}

RawStatistics raw_statistics(const DetectorModel& model, std::span<const double> v,
                             Distance distance) {
  if (v.size() != model.h) {
    fail(ErrorCode::kDimension, "feature has " + std::to_string(v.size()) +
                                    " dims, model expects " + std::to_string(model.h));
  }
  RawStatistics s;
  const Vector logits = matvec(model.encoder, v);
  const Vector probs = softmax_t(logits, model.temperature);
  s.predicted = argmax(probs);
  s.conf = probs[s.predicted];
  if (!(l2_norm(v) > kNormGuard) || !(l2_norm(logits) > kNormGuard)) {
    s.degenerate = true;
    return s;
  }
  auto dist = [distance](std::span<const double> f, std::span<const double> f_hat) {
    return distance == Distance::kNl2 ? nl2(f, f_hat) : l2_distance(f, f_hat);
  };
  if (model.framework == Framework::kLayerwise) {
    s.r1 = dist(v, forward(model.d1, logits).output);
    Vector scaled = logits;
    for (double& z : scaled) z /= model.temperature;
    s.r2 = dist(scaled, forward(model.d2, probs).output);
  } else {
    s.r1 = dist(v, forward(model.d1, softmax_t(logits, 1.0)).output);
  }
  return s;
}

ScoreBundle score_from_statistics(const RawStatistics& s, const Calibration& calibration,
                                  Framework framework, const ScoreOptions& options) {
  ScoreBundle out;
  out.predicted = s.predicted;
  out.conf = s.conf;
  if (s.degenerate) {
    out.flagged = true;
    return out;
  }
  out.r1 = s.r1;
  out.r2 = s.r2;
  const auto& fits = calibration.fits;
  out.phi0 = phi(s.conf, fits[0], options.use_epsilon);
  out.psi1 = psi(s.r1, fits[1], options.use_epsilon);
  out.psi2 = framework == Framework::kLayerwise ? psi(s.r2, fits[2], options.use_epsilon) : 1.0;
  out.score = out.phi0 * out.psi1 * out.psi2;
  return out;
}

ScoreBundle normality_score(const DetectorModel& model, const Calibration& calibration,
                            std::span<const double> v, const ScoreOptions& options) {
  return score_from_statistics(raw_statistics(model, v, calibration.distance), calibration,
                               model.framework, options);
}

std::vector<ScoreBundle> score_features(const DetectorModel& model, const Calibration& calibration,
                                        const FeatureSet& set, const ScoreOptions& options) {
  if (set.h != model.h) {
    fail(ErrorCode::kDimension, "features have H=" + std::to_string(set.h) +
                                    ", model expects H=" + std::to_string(model.h));
  }
  std::vector<ScoreBundle> out;
  out.reserve(set.n());
  for (std::size_t i = 0; i < set.n(); ++i)
    out.push_back(normality_score(model, calibration, set.row_as_double(i), options));
  return out;
}

double threshold_from_validation(std::span<const double> scores, double target_tpr) {
  if (scores.empty()) fail(ErrorCode::kCalibration, "threshold: no validation scores");
  if (!(target_tpr > 0.0 && target_tpr <= 1.0)) {
    fail(ErrorCode::kParameter, "threshold: target TPR must lie in (0, 1]");
  }
  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());
  const double q = 1.0 - target_tpr;
  const auto index = static_cast<std::size_t>(std::floor(q * static_cast<double>(sorted.size() - 1)));
  return sorted[std::min(index, sorted.size() - 1)];
}

}  // namespace olsr
