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
#include <filesystem>
#include <optional>

#include "olsr/detector.hpp"

namespace olsr {

// Model file, little-endian:
//   "OLSR" | version u32 | H u32 | C u32 | T f64 | k0 k1 k2 f64
//   | framework u32 | distance u32 | D1 widths u32 x2 | D2 widths u32 x2
//   | W (C*H f64) | per decoder layer: weight (out*in f64), bias (out f64)
//   | (mu, sigma, epsilon) f64 x3 | target TPR f64 | threshold f64
//   | threshold without epsilon f64
inline constexpr std::uint32_t kModelFormatVersion = 1;

struct SavedModel {
  DetectorModel model;
  Calibration calibration;
};

void save_model(const std::filesystem::path& path, const DetectorModel& model,
                const Calibration& calibration);

/// Throws kFormat on bad magic/version/truncation and kDimension when
/// `expected_h` is given and differs from the stored feature width.
SavedModel load_model(const std::filesystem::path& path,
                      std::optional<std::uint32_t> expected_h = std::nullopt);

}  // namespace olsr
