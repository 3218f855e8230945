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
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "olsr/matrix.hpp"

namespace olsr {

/// Label value used for unlabeled (OoD) samples.
inline constexpr std::int32_t kUnlabeled = -1;

/// N x H activation-vector features with integer labels.
struct FeatureSet {
  std::uint32_t h = 0;
  std::uint32_t c = 0;
  std::vector<float> features;  // N x H, row-major
  std::vector<std::int32_t> labels;

  std::size_t n() const noexcept { return labels.size(); }
  std::span<const float> row(std::size_t i) const { return {features.data() + i * h, h}; }
  Vector row_as_double(std::size_t i) const;
  /// N x H copy in double precision.
  DenseMatrix to_matrix() const;

  FeatureSet subset(std::span<const std::size_t> indices) const;

  /// Throws kFormat on non-finite entries or out-of-range labels, kShape on
  /// inconsistent lengths.
  void validate() const;
  /// validate() plus: every label in [0, C).
  void validate_labeled() const;

  friend bool operator==(const FeatureSet&, const FeatureSet&) = default;
};

// AVF1 binary format, little-endian:
//   "AVF1" | version u32 | N u64 | H u32 | C u32 | N*H f32 | N i32
inline constexpr std::uint32_t kFeatureFormatVersion = 1;

void write_features(const std::filesystem::path& path, const FeatureSet& set);
FeatureSet read_features(const std::filesystem::path& path);

/// CSV with header `label,f0,...,f{H-1}`. C is max label + 1 unless
/// `classes` is non-zero.
FeatureSet read_features_csv(const std::filesystem::path& path, std::uint32_t classes = 0);

struct Split {
  std::vector<std::size_t> train;  // ascending
  std::vector<std::size_t> val;    // ascending
};

/// Stratified, seeded hold-out split. Each label stratum (including -1)
/// contributes round(fraction * count) samples to the validation side.
Split split_indices(const FeatureSet& set, double val_fraction, std::uint64_t seed);
std::pair<FeatureSet, FeatureSet> split(const FeatureSet& set, double val_fraction,
                                        std::uint64_t seed);

enum class OodKind { kShifted, kScaledNorm, kUniform };

const char* ood_kind_name(OodKind kind);
OodKind parse_ood_kind(const std::string& name);

/// Synthetic AV-feature generator.
///
/// Class means are mean_scale * relu(g)/|relu(g)| for g ~ N(0, I_H); ID
/// samples are relu(mean[label] + within_sigma * N(0, I_H)) with label
/// = i mod C. Means for classes C..2C-1 are held out for `shifted` OoD.
struct SynthSpec {
  std::uint32_t c = 10;
  std::uint32_t h = 64;
  double mean_scale = 10.0;
  double within_sigma = 1.0;
  OodKind ood_kind = OodKind::kScaledNorm;
  double ood_norm_multiplier = 0.5;
  /// Interpolation toward the held-out means for `shifted` (0 = ID means).
  double shift = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Stream ids keep train/val/test draws independent under one seed.
FeatureSet synth_id(const SynthSpec& spec, std::size_t n, std::uint64_t stream = 0);
FeatureSet synth_ood(const SynthSpec& spec, std::size_t n, std::uint64_t stream = 0);

/// The 2C class mean vectors (first C are in-distribution).
DenseMatrix synth_class_means(const SynthSpec& spec);

}  // namespace olsr
