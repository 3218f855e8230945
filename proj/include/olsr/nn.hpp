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

#include <span>
#include <vector>

#include "olsr/matrix.hpp"
#include "olsr/rng.hpp"

namespace olsr {

enum class Activation { kNone, kRelu, kSoftmax };

/// Fully connected layer: post = activation(weight * input + bias).
struct FcLayer {
  DenseMatrix weight;  // out x in
  Vector bias;         // out
  Activation activation = Activation::kNone;

  FcLayer() = default;
  FcLayer(std::size_t in, std::size_t out, Activation act)
      : weight(out, in), bias(out, 0.0), activation(act) {}

  std::size_t in() const noexcept { return weight.cols(); }
  std::size_t out() const noexcept { return weight.rows(); }

  /// Same shape, all parameters zero.
  FcLayer zeros_like() const { return FcLayer(in(), out(), activation); }
};

using Network = std::vector<FcLayer>;

struct LayerCache {
  Vector input;
  Vector pre;
  Vector post;
};

struct ForwardResult {
  Vector output;
  std::vector<LayerCache> cache;
};

/// Checks bias lengths and that consecutive widths chain.
void validate_network(std::span<const FcLayer> layers);

ForwardResult forward(std::span<const FcLayer> layers, std::span<const double> x);

/// softmax(logits / temperature), max-subtracted.
Vector softmax_t(std::span<const double> logits, double temperature);

/// log softmax(logits)[index], via log-sum-exp.
double log_softmax_at(std::span<const double> logits, std::size_t index);

/// Uniform fan-in initialisation U(-1/sqrt(in), 1/sqrt(in)) for weights and
/// biases, drawn row-major, weights before biases.
void init_fan_in(FcLayer& layer, CounterRng& rng);

// Batched evaluation: rows of the matrices are samples.

struct BatchCache {
  std::vector<DenseMatrix> inputs;  // per layer, B x in
  std::vector<DenseMatrix> pre;     // per layer, B x out
  DenseMatrix output;               // B x out of last layer
};

const DenseMatrix& forward_batch(std::span<const FcLayer> layers, const DenseMatrix& x,
                                 BatchCache& cache);

/// Back-propagates grad_out (B x out, consumed) through the cached pass.
/// Parameter gradients are accumulated into `grads` (same shapes as layers);
/// the input gradient is written to *grad_in when it is non-null.
void backward_batch(std::span<const FcLayer> layers, const BatchCache& cache,
                    DenseMatrix grad_out, std::span<FcLayer> grads, DenseMatrix* grad_in);

/// Row-wise softmax of (x / temperature).
DenseMatrix softmax_rows(const DenseMatrix& x, double temperature);

}  // namespace olsr
