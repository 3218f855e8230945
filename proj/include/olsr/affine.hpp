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

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "olsr/data.hpp"
#include "olsr/detector.hpp"
#include "olsr/nn.hpp"

namespace olsr {

/// Local affine form f(x) = gamma x + b of a ReLU network at one input.
struct AffineDecomp {
  DenseMatrix gamma;                               // out x in
  Vector b;                                        // out
  std::vector<std::vector<std::uint8_t>> pattern;  // per layer; 1 = unit passes
};

/// Composes gamma and b from the activation pattern recorded at x. A unit
/// whose pre-activation is exactly 0 is off. Throws kUnsupported when a
/// layer uses softmax.
AffineDecomp decompose(std::span<const FcLayer> layers, std::span<const double> x);

/// Same composition for a given pattern (one mask per layer).
AffineDecomp compose_pattern(std::span<const FcLayer> layers,
                             const std::vector<std::vector<std::uint8_t>>& pattern);

enum class OperatorNorm { kSpectral, kFrobenius };

/// Largest singular value by power iteration on M^T M from a fixed-seed start
/// vector; stops after `iterations` or when the relative change drops below
/// `tolerance`.
double spectral_norm(const DenseMatrix& m, int iterations = 30, double tolerance = 1e-9);
double frobenius_norm(const DenseMatrix& m);

struct BoundCheck {
  double bound = 0.0;   // |I - gamma| |x| + |b|
  double actual = 0.0;  // |x - (gamma x + b)|
  double operator_norm = 0.0;
  bool violated = false;  // actual > bound + 1e-9
};

/// Reconstruction-error bound for a square map. Throws kShape otherwise.
BoundCheck recon_error_bound(const AffineDecomp& decomp, std::span<const double> x,
                             OperatorNorm norm = OperatorNorm::kSpectral);

/// The autoencoder path v -> D1(Wv) as a plain network (W as a bias-free
/// linear layer). Layerwise models only.
Network reconstruction_path(const DetectorModel& model);

struct NormBiasRow {
  double norm = 0.0;
  double mean_l2 = 0.0;
  std::optional<double> mean_nl2;  // undefined at norm 0
};

/// Rescales each (normalised) row of `directions` to every grid norm and
/// reports the mean raw-L2 and NL2 reconstruction error of the D1 path.
std::vector<NormBiasRow> norm_bias_demo(const DetectorModel& model, const FeatureSet& directions,
                                        std::span<const double> norm_grid);

struct AffineReport {
  std::size_t samples = 0;
  double max_equality_residual = 0.0;  // max |f(x) - (gamma x + b)| / (1 + |f(x)|)
  std::size_t bound_violations = 0;
  double max_bound_ratio = 0.0;  // max actual / bound
  std::vector<NormBiasRow> norm_bias;
};

/// Runs decomposition equality and bound checks on every row of `inputs`.
AffineReport verify_affine(std::span<const FcLayer> layers, const FeatureSet& inputs,
                           OperatorNorm norm = OperatorNorm::kSpectral);

/// A random ReLU network in -> hidden... -> out (last layer linear).
Network random_relu_network(std::span<const std::size_t> widths, std::uint64_t seed);

}  // namespace olsr
