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

#include "json.hpp"
#include "olsr/affine.hpp"
#include "olsr/detector.hpp"
#include "olsr/metrics.hpp"
#include "olsr/scoring.hpp"

namespace olsr {

nlohmann::ordered_json to_json(const TrainConfig& config);
nlohmann::ordered_json to_json(const Calibration& calibration);
/// Training curve plus summary flags ("regularizer_disabled" when lambda = 0).
nlohmann::ordered_json training_log_json(const TrainResult& result, const TrainConfig& config,
                                         const Calibration& calibration);
/// Metrics as percentages at full precision.
nlohmann::ordered_json to_json(const EvalReport& report);
nlohmann::ordered_json to_json(const AffineReport& report);

}  // namespace olsr
