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

#include "olsr/affine.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "olsr/error.hpp"
#include "olsr/rng.hpp"
#include "olsr/scoring.hpp"

namespace olsr {
namespace {

constexpr std::uint64_t kPowerIterationSeed = 0x706F776572ULL;  // "power"
constexpr double kBoundSlack = 1e-9;

void require_piecewise_affine(std::span<const FcLayer> layers) {
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (layers[l].activation == Activation::kSoftmax) {
      fail(ErrorCode::kUnsupported, "layer " + std::to_string(l) +
                                        " applies softmax; only FC + ReLU paths decompose");
    }
  }
}

}  // namespace

AffineDecomp compose_pattern(std::span<const FcLayer> layers,
                             const std::vector<std::vector<std::uint8_t>>& pattern) {
  validate_network(layers);
  require_piecewise_affine(layers);
  if (pattern.size() != layers.size()) fail(ErrorCode::kShape, "pattern needs one mask per layer");
  const std::size_t in = layers.front().in();
  AffineDecomp d;
  d.gamma = DenseMatrix::identity(in);
  d.b.assign(in, 0.0);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    if (pattern[l].size() != layer.out()) fail(ErrorCode::kShape, "mask width mismatch");
    DenseMatrix gamma = matmul(layer.weight, d.gamma);
    Vector b = matvec(layer.weight, d.b);
    for (std::size_t o = 0; o < b.size(); ++o) {
      b[o] += layer.bias[o];
      if (!pattern[l][o]) {
        b[o] = 0.0;
        for (double& g : gamma.row(o)) g = 0.0;
      }
    }
    d.gamma = std::move(gamma);
    d.b = std::move(b);
  }
  d.pattern = pattern;
  return d;
}

AffineDecomp decompose(std::span<const FcLayer> layers, std::span<const double> x) {
  require_piecewise_affine(layers);
  const ForwardResult fwd = forward(layers, x);
  std::vector<std::vector<std::uint8_t>> pattern(layers.size());
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& pre = fwd.cache[l].pre;
    pattern[l].assign(pre.size(), 1);
    if (layers[l].activation == Activation::kRelu)
      for (std::size_t o = 0; o < pre.size(); ++o) pattern[l][o] = pre[o] > 0.0 ? 1 : 0;
  }
  return compose_pattern(layers, pattern);
}

double frobenius_norm(const DenseMatrix& m) { return l2_norm(m.flat()); }

double spectral_norm(const DenseMatrix& m, int iterations, double tolerance) {
  if (m.size() == 0) return 0.0;
  CounterRng rng(kPowerIterationSeed);
  Vector v(m.cols());
  for (double& x : v) x = rng.normal();
  double norm_v = l2_norm(v);
  for (double& x : v) x /= norm_v;
  const DenseMatrix mt = m.transposed();
  double sigma = l2_norm(matvec(m, v));
  for (int it = 0; it < iterations; ++it) {
    Vector w = matvec(mt, matvec(m, v));
    const double nw = l2_norm(w);
    if (nw == 0.0) return 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) v[i] = w[i] / nw;
    const double next = l2_norm(matvec(m, v));
    const bool converged = std::abs(next - sigma) <= tolerance * std::max(next, 1e-300);
    sigma = next;
    if (converged) break;
  }
  return sigma;
}

BoundCheck recon_error_bound(const AffineDecomp& decomp, std::span<const double> x,
                             OperatorNorm norm) {
  const std::size_t n = decomp.gamma.rows();
  if (n != decomp.gamma.cols()) {
    fail(ErrorCode::kShape, "reconstruction bound needs a square map, got " + std::to_string(n) +
                                "x" + std::to_string(decomp.gamma.cols()));
  }
  if (x.size() != n) fail(ErrorCode::kShape, "input length does not match the map");
  DenseMatrix residual_map = DenseMatrix::identity(n);
  for (std::size_t k = 0; k < residual_map.size(); ++k) residual_map.flat()[k] -= decomp.gamma.flat()[k];

  BoundCheck out;
  out.operator_norm = norm == OperatorNorm::kSpectral ? spectral_norm(residual_map)
                                                      : frobenius_norm(residual_map);
  out.bound = out.operator_norm * l2_norm(x) + l2_norm(decomp.b);
  const Vector fx = matvec(decomp.gamma, x);
  Vector diff(n);
  for (std::size_t i = 0; i < n; ++i) diff[i] = x[i] - (fx[i] + decomp.b[i]);
  out.actual = l2_norm(diff);
  out.violated = out.actual > out.bound + kBoundSlack;
  return out;
}

Network reconstruction_path(const DetectorModel& model) {
  if (model.framework != Framework::kLayerwise) {
    fail(ErrorCode::kUnsupported, "the v -> D1(Wv) path exists only in layerwise models");
  }
  Network path;
  FcLayer enc(model.h, model.c, Activation::kNone);
  enc.weight = model.encoder;
  path.push_back(std::move(enc));
  path.insert(path.end(), model.d1.begin(), model.d1.end());
  return path;
}

std::vector<NormBiasRow> norm_bias_demo(const DetectorModel& model, const FeatureSet& directions,
                                        std::span<const double> norm_grid) {
  if (directions.h != model.h) fail(ErrorCode::kDimension, "direction set width differs from model H");
  const Network path = reconstruction_path(model);
  std::vector<Vector> units;
  for (std::size_t i = 0; i < directions.n(); ++i) {
    Vector d = directions.row_as_double(i);
    const double n = l2_norm(d);
    if (!(n > kNormGuard)) continue;
    for (double& x : d) x /= n;
    units.push_back(std::move(d));
  }
  if (units.empty()) fail(ErrorCode::kParameter, "norm-bias demo needs at least one nonzero direction");

  std::vector<NormBiasRow> table;
  for (double norm : norm_grid) {
    if (!(norm >= 0.0)) fail(ErrorCode::kParameter, "norm grid entries must be >= 0");
    NormBiasRow row;
    row.norm = norm;
    double sum_l2 = 0.0, sum_nl2 = 0.0;
    Vector x(model.h);
    for (const auto& u : units) {
      for (std::size_t j = 0; j < x.size(); ++j) x[j] = norm * u[j];
      const Vector rec = forward(path, x).output;
      sum_l2 += l2_distance(x, rec);
      if (norm > 0.0) sum_nl2 += nl2(x, rec);
    }
    const double count = static_cast<double>(units.size());
    row.mean_l2 = sum_l2 / count;
    if (norm > 0.0) row.mean_nl2 = sum_nl2 / count;
    table.push_back(row);
  }
  return table;
}

AffineReport verify_affine(std::span<const FcLayer> layers, const FeatureSet& inputs,
                           OperatorNorm norm) {
  validate_network(layers);
  if (inputs.h != layers.front().in()) fail(ErrorCode::kDimension, "inputs do not match network width");
  const bool square = layers.front().in() == layers.back().out();
  AffineReport report;
  for (std::size_t i = 0; i < inputs.n(); ++i) {
    const Vector x = inputs.row_as_double(i);
    const Vector fx = forward(layers, x).output;
    const AffineDecomp d = decompose(layers, x);
    Vector g = matvec(d.gamma, x);
    double ss = 0.0;
    for (std::size_t o = 0; o < g.size(); ++o) {
      const double e = fx[o] - (g[o] + d.b[o]);
      ss += e * e;
    }
    report.max_equality_residual =
        std::max(report.max_equality_residual, std::sqrt(ss) / (1.0 + l2_norm(fx)));
    if (square) {
      const BoundCheck b = recon_error_bound(d, x, norm);
      if (b.violated) ++report.bound_violations;
      if (b.bound > 0.0) report.max_bound_ratio = std::max(report.max_bound_ratio, b.actual / b.bound);
    }
    ++report.samples;
  }
  return report;
}

Network random_relu_network(std::span<const std::size_t> widths, std::uint64_t seed) {
  if (widths.size() < 2) fail(ErrorCode::kParameter, "network needs at least input and output widths");
  CounterRng rng(seed, 7);
  Network net;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const bool last = l + 2 == widths.size();
    net.emplace_back(widths[l], widths[l + 1], last ? Activation::kNone : Activation::kRelu);
    init_fan_in(net.back(), rng);
  }
  return net;
}

}  // namespace olsr
