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

#include "olsr/nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "olsr/error.hpp"

namespace olsr {
namespace {

void softmax_inplace(std::span<double> v) {
  const double m = *std::max_element(v.begin(), v.end());
  double sum = 0.0;
  for (double& x : v) {
    x = std::exp(x - m);
    sum += x;
  }
  for (double& x : v) x /= sum;
}

void apply_activation(Activation act, std::span<double> v) {
  switch (act) {
    case Activation::kNone:
      break;
    case Activation::kRelu:
      for (double& x : v) x = x > 0.0 ? x : 0.0;
      break;
    case Activation::kSoftmax:
      softmax_inplace(v);
      break;
  }
}

}  // namespace

void validate_network(std::span<const FcLayer> layers) {
  if (layers.empty()) fail(ErrorCode::kShape, "network has no layers");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    if (layer.bias.size() != layer.out()) {
      fail(ErrorCode::kShape, "layer " + std::to_string(l) + ": bias length " +
                                  std::to_string(layer.bias.size()) + " != " +
                                  std::to_string(layer.out()));
    }
    if (l > 0 && layers[l - 1].out() != layer.in()) {
      fail(ErrorCode::kShape, "layer " + std::to_string(l) + " expects " +
                                  std::to_string(layer.in()) + " inputs, previous layer emits " +
                                  std::to_string(layers[l - 1].out()));
    }
  }
}

ForwardResult forward(std::span<const FcLayer> layers, std::span<const double> x) {
  validate_network(layers);
  if (x.size() != layers.front().in()) {
    fail(ErrorCode::kShape, "input length " + std::to_string(x.size()) +
                                " != network input width " +
                                std::to_string(layers.front().in()));
  }
  ForwardResult result;
  result.cache.reserve(layers.size());
  Vector current(x.begin(), x.end());
  for (const auto& layer : layers) {
    LayerCache lc;
    lc.input = current;
    lc.pre = matvec(layer.weight, current);
    for (std::size_t o = 0; o < lc.pre.size(); ++o) lc.pre[o] += layer.bias[o];
    lc.post = lc.pre;
    apply_activation(layer.activation, lc.post);
    current = lc.post;
    result.cache.push_back(std::move(lc));
  }
  result.output = std::move(current);
  return result;
}

Vector softmax_t(std::span<const double> logits, double temperature) {
  if (!(temperature > 0.0)) fail(ErrorCode::kParameter, "softmax temperature must be > 0");
  if (logits.empty()) fail(ErrorCode::kShape, "softmax of empty vector");
  Vector out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] / temperature;
  softmax_inplace(out);
  return out;
}

double log_softmax_at(std::span<const double> logits, std::size_t index) {
  const double m = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double z : logits) sum += std::exp(z - m);
  return logits[index] - m - std::log(sum);
}

void init_fan_in(FcLayer& layer, CounterRng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(layer.in()));
  for (double& w : layer.weight.flat()) w = rng.uniform(-bound, bound);
  for (double& b : layer.bias) b = rng.uniform(-bound, bound);
}

const DenseMatrix& forward_batch(std::span<const FcLayer> layers, const DenseMatrix& x,
                                 BatchCache& cache) {
  const std::size_t batch = x.rows();
  cache.inputs.resize(layers.size());
  cache.pre.resize(layers.size());
  const DenseMatrix* current = &x;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    if (current->cols() != layer.in()) {
      fail(ErrorCode::kShape, "batch input width " + std::to_string(current->cols()) +
                                  " != layer input width " + std::to_string(layer.in()));
    }
    cache.inputs[l] = *current;
    const DenseMatrix wt = layer.weight.transposed();  // in x out
    DenseMatrix& pre = cache.pre[l];
    pre.resize(batch, layer.out());
    for (std::size_t b = 0; b < batch; ++b) {
      auto out = pre.row(b);
      std::copy(layer.bias.begin(), layer.bias.end(), out.begin());
      auto in = cache.inputs[l].row(b);
      for (std::size_t i = 0; i < in.size(); ++i) {
        const double xv = in[i];
        if (xv == 0.0) continue;
        auto wrow = wt.row(i);
        for (std::size_t o = 0; o < out.size(); ++o) out[o] += wrow[o] * xv;
      }
    }
    cache.output = pre;
    for (std::size_t b = 0; b < batch; ++b) apply_activation(layer.activation, cache.output.row(b));
    current = &cache.output;
  }
  return cache.output;
}

void backward_batch(std::span<const FcLayer> layers, const BatchCache& cache,
                    DenseMatrix grad_out, std::span<FcLayer> grads, DenseMatrix* grad_in) {
  const std::size_t batch = grad_out.rows();
  DenseMatrix delta = std::move(grad_out);
  for (std::size_t l = layers.size(); l-- > 0;) {
    const auto& layer = layers[l];
    auto& grad = grads[l];
    const DenseMatrix& pre = cache.pre[l];
    const DenseMatrix& input = cache.inputs[l];

    // delta: dL/dpost -> dL/dpre
    switch (layer.activation) {
      case Activation::kNone:
        break;
      case Activation::kRelu:
        for (std::size_t k = 0; k < delta.size(); ++k)
          if (!(pre.flat()[k] > 0.0)) delta.flat()[k] = 0.0;
        break;
      case Activation::kSoftmax: {
        // post of this layer is the input of the next one, or the output.
        const DenseMatrix& post = (l + 1 < layers.size()) ? cache.inputs[l + 1] : cache.output;
        for (std::size_t b = 0; b < batch; ++b) {
          auto d = delta.row(b);
          auto p = post.row(b);
          const double s = dot(d, p);
          for (std::size_t o = 0; o < d.size(); ++o) d[o] = p[o] * (d[o] - s);
        }
        break;
      }
    }

    for (std::size_t b = 0; b < batch; ++b) {
      auto d = delta.row(b);
      auto in = input.row(b);
      for (std::size_t o = 0; o < d.size(); ++o) {
        const double g = d[o];
        if (g == 0.0) continue;
        grad.bias[o] += g;
        auto grow = grad.weight.row(o);
        for (std::size_t i = 0; i < in.size(); ++i) grow[i] += g * in[i];
      }
    }

    if (l == 0 && grad_in == nullptr) break;
    DenseMatrix next(batch, layer.in());
    for (std::size_t b = 0; b < batch; ++b) {
      auto d = delta.row(b);
      auto out = next.row(b);
      for (std::size_t o = 0; o < d.size(); ++o) {
        const double g = d[o];
        if (g == 0.0) continue;
        auto wrow = layer.weight.row(o);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += g * wrow[i];
      }
    }
    delta = std::move(next);
  }
  if (grad_in != nullptr) *grad_in = std::move(delta);
}

DenseMatrix softmax_rows(const DenseMatrix& x, double temperature) {
  if (!(temperature > 0.0)) fail(ErrorCode::kParameter, "softmax temperature must be > 0");
  DenseMatrix out = x;
  for (std::size_t b = 0; b < out.rows(); ++b) {
    auto r = out.row(b);
    for (double& v : r) v /= temperature;
    softmax_inplace(r);
  }
  return out;
}

}  // namespace olsr
