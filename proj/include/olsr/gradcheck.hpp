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
#include <cstdint>
#include <span>

#include "olsr/detector.hpp"
#include "olsr/nn.hpp"

namespace olsr {

struct GradCheckOptions {
  double step = 1e-5;
  /// Coordinates whose +-step perturbation brings a ReLU pre-activation
  /// within this distance of zero (or flips it) are skipped.
  double kink_margin = 1e-6;
};

struct GradCheckResult {
  /// max |analytic - numeric| / (|analytic| + |numeric| + 1e-12)
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;
};

/// Central finite differences of loss_total against its analytic gradient,
/// over every parameter of the model.
GradCheckResult grad_check(const DetectorModel& model, std::span<const double> v, std::int32_t label,
                           const LossOptions& options, const GradCheckOptions& check = {});

/// Same check for a bare network under 0.5 |f(x) - target|^2.
GradCheckResult grad_check(const Network& layers, std::span<const double> x,
                           std::span<const double> target, const GradCheckOptions& check = {});

}  // namespace olsr
