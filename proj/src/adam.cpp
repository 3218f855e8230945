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

#include "olsr/adam.hpp"

#include <cmath>
#include <string>

#include "olsr/error.hpp"

namespace olsr {

void AdamState::update(std::span<const std::span<double>> params,
                       std::span<const std::span<const double>> grads, double lr) {
  if (params.size() != grads.size()) {
    fail(ErrorCode::kShape, "adam: " + std::to_string(params.size()) + " parameter tensors, " +
                                std::to_string(grads.size()) + " gradient tensors");
  }
  if (first_.empty()) {
    first_.resize(params.size());
    second_.resize(params.size());
    for (std::size_t t = 0; t < params.size(); ++t) {
      first_[t].assign(params[t].size(), 0.0);
      second_[t].assign(params[t].size(), 0.0);
    }
  }
  if (first_.size() != params.size()) fail(ErrorCode::kShape, "adam: parameter list changed");
  for (std::size_t t = 0; t < params.size(); ++t) {
    if (params[t].size() != first_[t].size() || grads[t].size() != first_[t].size()) {
      fail(ErrorCode::kShape, "adam: tensor " + std::to_string(t) + " changed shape");
    }
    for (std::size_t i = 0; i < grads[t].size(); ++i) {
      if (!std::isfinite(grads[t][i])) {
        fail(ErrorCode::kNumeric, "adam: non-finite gradient in tensor " + std::to_string(t) +
                                      " at index " + std::to_string(i) + " (step " +
                                      std::to_string(step_ + 1) + ")");
      }
    }
  }

  ++step_;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  for (std::size_t t = 0; t < params.size(); ++t) {
    auto p = params[t];
    auto g = grads[t];
    auto& m = first_[t];
    auto& v = second_[t];
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      p[i] -= lr * mhat / (std::sqrt(vhat) + config_.eps);
    }
  }
}

}  // namespace olsr
