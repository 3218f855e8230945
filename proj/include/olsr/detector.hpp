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

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "olsr/data.hpp"
#include "olsr/matrix.hpp"
#include "olsr/nn.hpp"

namespace olsr {

/// Residual guard: norms at or below this are treated as zero.
inline constexpr double kNormGuard = 1e-12;

/// `layerwise`: D1 recovers v from Wv and D2 recovers Wv/T from S(Wv/T).
/// `basic`: a single decoder recovers v straight from the latent S(Wv).
enum class Framework : std::uint32_t { kLayerwise = 0, kBasic = 1 };

/// Distance used for the reconstruction factors at scoring time.
enum class Distance : std::uint32_t { kNl2 = 0, kL2 = 1 };

/// Per-sample reconstruction loss: unsquared L2 norm, or mean squared error.
enum class LossKind : std::uint32_t { kNorm = 0, kSquared = 1 };

const char* framework_name(Framework f);
const char* distance_name(Distance d);
const char* loss_kind_name(LossKind k);
Framework parse_framework(const std::string& s);
Distance parse_distance(const std::string& s);
LossKind parse_loss_kind(const std::string& s);

struct TrainConfig {
  double lambda = 1.0;
  double temperature = 100.0;
  double lr = 1e-4;
  std::size_t batch = 128;
  std::size_t epochs = 300;
  std::uint64_t seed = 0;
  /// Decoder hidden width; 0 selects max(H, 4C).
  std::size_t hidden = 0;
  LossKind loss = LossKind::kNorm;
  /// epsilon_i = k_i * sigma_i for the confidence, D1 and D2 factors.
  std::array<double, 3> epsilon_k{10.0, 10.0, 10.0};
  double val_fraction = 0.04;
  Framework framework = Framework::kLayerwise;
  Distance distance = Distance::kNl2;
  bool detach_l2_target = false;
  double target_tpr = 0.95;

  void validate() const;
};

/// Encoder W (C x H, no bias) with its decoders and temperature.
struct DetectorModel {
  std::uint32_t h = 0;
  std::uint32_t c = 0;
  double temperature = 100.0;
  Framework framework = Framework::kLayerwise;
  DenseMatrix encoder;  // C x H
  Network d1;           // C -> ... -> H
  Network d2;           // C -> ... -> C, layerwise only

  /// Same architecture, every parameter zero. Used as a gradient buffer.
  DetectorModel zeros_like() const;

  /// Parameter tensors in storage order: W, then (weight, bias) of every D1
  /// layer, then of every D2 layer.
  std::vector<std::span<double>> parameters();
  std::vector<std::span<const double>> parameters() const;
  std::size_t parameter_count() const;

  void validate() const;

  friend bool operator==(const DetectorModel&, const DetectorModel&);
};

bool operator==(const FcLayer& a, const FcLayer& b);

/// Three-layer decoder in -> hidden -> hidden -> out (ReLU, ReLU, linear).
Network make_decoder(std::size_t in, std::size_t hidden, std::size_t out);

/// Fresh model with fan-in initialisation from `seed`. When `init_encoder`
/// is given (C x H, e.g. an upstream classifier's final FC layer) it
/// replaces the random encoder.
DetectorModel make_model(std::uint32_t h, std::uint32_t c, const TrainConfig& config,
                         const DenseMatrix* init_encoder = nullptr);

struct LossTerms {
  double l1 = 0.0;
  double l2 = 0.0;
  double reg = 0.0;
  double total = 0.0;
};

struct LossOptions {
  double lambda = 1.0;
  LossKind loss = LossKind::kNorm;
  bool detach_l2_target = false;
};

/// Batch-mean of L1 + L2 + lambda * L_reg for the rows of `v`.
///
///   L1    = |v - D1(Wv)|                 (basic: |v - D1(S(Wv))|)
///   L2    = |Wv/T - D2(S(Wv/T))|          (layerwise only)
///   L_reg = -log S(Wv)[y]                 (no temperature)
///
/// When `grads` is non-null the gradients are accumulated into it. A
/// residual with norm <= kNormGuard contributes a zero gradient.
LossTerms loss_batch(const DetectorModel& model, const DenseMatrix& v,
                     std::span<const std::int32_t> labels, const LossOptions& options,
                     DetectorModel* grads);

/// Single-sample loss with gradients (accumulated into *grads when given).
LossTerms loss_total(const DetectorModel& model, std::span<const double> v, std::int32_t label,
                     const LossOptions& options, DetectorModel* grads);

struct EpochLog {
  std::size_t epoch = 0;  // 0 = evaluation before the first update
  LossTerms loss;
  double lr = 0.0;
};

struct TrainResult {
  DetectorModel model;
  std::vector<EpochLog> log;
  std::size_t updates = 0;
};

/// Learning rate for update `index` (0-based) out of `total`: base before
/// 50 %, base/10 from 50 %, base/100 from 75 %.
double scheduled_lr(double base, std::size_t index, std::size_t total);

/// Mini-batch Adam training over shuffled batches. Deterministic in
/// config.seed. Throws kNumeric with epoch/batch context on divergence.
TrainResult train(const FeatureSet& train_set, const TrainConfig& config,
                  const DenseMatrix* init_encoder = nullptr);

/// Mean over every sample of `set` (no gradients).
LossTerms evaluate_loss(const DetectorModel& model, const FeatureSet& set,
                        const LossOptions& options);

struct GaussianFit {
  double mu = 0.0;
  double sigma = 0.0;
  double epsilon = 0.0;

  friend bool operator==(const GaussianFit&, const GaussianFit&) = default;
};

/// Maximum-likelihood normal fit (population sigma) with epsilon = k*sigma.
/// Values are summed in sorted order, so the fit does not depend on input
/// order. Throws kCalibration for fewer than two values.
GaussianFit fit_gaussian(std::span<const double> values, double k);

/// Everything the scorer needs besides the network weights.
struct Calibration {
  std::array<GaussianFit, 3> fits{};  // confidence, D1 residual, D2 residual
  Distance distance = Distance::kNl2;
  std::array<double, 3> epsilon_k{10.0, 10.0, 10.0};
  double target_tpr = 0.95;
  double threshold = 0.0;             // with epsilon terms
  double threshold_no_epsilon = 0.0;  // epsilon terms zeroed

  friend bool operator==(const Calibration&, const Calibration&) = default;
};

/// Fits the confidence and residual Gaussians on validation features.
/// Basic-framework models leave the D2 fit at zero.
std::array<GaussianFit, 3> fit_gaussians(const DetectorModel& model, const FeatureSet& val,
                                         std::array<double, 3> k, Distance distance);

/// fit_gaussians plus the validation-quantile thresholds.
Calibration calibrate(const DetectorModel& model, const FeatureSet& val, const TrainConfig& config);

}  // namespace olsr
