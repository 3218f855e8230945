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

#include <algorithm>
#include <cmath>
#include <string>

#include "olsr/data.hpp"
#include "olsr/error.hpp"
#include "olsr/rng.hpp"

namespace olsr {
namespace {

constexpr std::uint64_t kMeanStream = 0x6D65616EULL;  // "mean"
constexpr std::uint64_t kIdStreamBase = 0x1000;
constexpr std::uint64_t kOodStreamBase = 0x2000;

std::vector<float> draw_around(std::span<const double> mean, double sigma, CounterRng& rng) {
  std::vector<float> x(mean.size());
  for (std::size_t j = 0; j < mean.size(); ++j) {
    const double v = mean[j] + sigma * rng.normal();
    x[j] = static_cast<float>(v > 0.0 ? v : 0.0);
  }
  return x;
}

}  // namespace

const char* ood_kind_name(OodKind kind) {
  switch (kind) {
    case OodKind::kShifted: return "shifted";
    case OodKind::kScaledNorm: return "scaled-norm";
    case OodKind::kUniform: return "uniform";
  }
  return "?";
}

OodKind parse_ood_kind(const std::string& name) {
  if (name == "shifted") return OodKind::kShifted;
  if (name == "scaled-norm") return OodKind::kScaledNorm;
  if (name == "uniform") return OodKind::kUniform;
  fail(ErrorCode::kConfig, "unknown OoD kind '" + name + "' (shifted|scaled-norm|uniform)");
}

void SynthSpec::validate() const {
  if (c == 0 || h == 0) fail(ErrorCode::kParameter, "synth: C and H must be positive");
  if (!(mean_scale > 0.0)) fail(ErrorCode::kParameter, "synth: mean scale must be > 0");
  if (!(within_sigma > 0.0)) fail(ErrorCode::kParameter, "synth: within-class sigma must be > 0");
  if (!(ood_norm_multiplier > 0.0)) fail(ErrorCode::kParameter, "synth: OoD norm multiplier must be > 0");
  if (!(shift >= 0.0 && shift <= 1.0)) fail(ErrorCode::kParameter, "synth: shift must lie in [0, 1]");
}

DenseMatrix synth_class_means(const SynthSpec& spec) {
  spec.validate();
  CounterRng rng(spec.seed, kMeanStream);
  DenseMatrix means(2 * spec.c, spec.h);
  for (std::size_t k = 0; k < means.rows(); ++k) {
    auto m = means.row(k);
    for (double& x : m) {
      const double g = rng.normal();
      x = g > 0.0 ? g : 0.0;
    }
    double norm = l2_norm(m);
    if (norm == 0.0) {
      m[k % spec.h] = 1.0;
      norm = 1.0;
    }
    for (double& x : m) x *= spec.mean_scale / norm;
  }
  return means;
}

FeatureSet synth_id(const SynthSpec& spec, std::size_t n, std::uint64_t stream) {
  const DenseMatrix means = synth_class_means(spec);
  CounterRng rng(spec.seed, kIdStreamBase + stream);
  FeatureSet set;
  set.h = spec.h;
  set.c = spec.c;
  set.features.reserve(n * spec.h);
  set.labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto label = static_cast<std::int32_t>(i % spec.c);
    auto x = draw_around(means.row(label), spec.within_sigma, rng);
    set.features.insert(set.features.end(), x.begin(), x.end());
    set.labels.push_back(label);
  }
  return set;
}

FeatureSet synth_ood(const SynthSpec& spec, std::size_t n, std::uint64_t stream) {
  const DenseMatrix means = synth_class_means(spec);
  CounterRng rng(spec.seed, kOodStreamBase + stream);
  FeatureSet set;
  set.h = spec.h;
  set.c = spec.c;
  set.features.reserve(n * spec.h);
  set.labels.assign(n, kUnlabeled);

  double upper = 0.0;
  for (std::size_t k = 0; k < spec.c; ++k)
    for (double x : means.row(k)) upper = std::max(upper, x);
  upper += 3.0 * spec.within_sigma;

  Vector mean(spec.h);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t cls = i % spec.c;
    switch (spec.ood_kind) {
      case OodKind::kScaledNorm: {
        auto x = draw_around(means.row(cls), spec.within_sigma, rng);
        for (float& v : x) v = static_cast<float>(static_cast<double>(v) * spec.ood_norm_multiplier);
        set.features.insert(set.features.end(), x.begin(), x.end());
        break;
      }
      case OodKind::kShifted: {
        auto id_mean = means.row(cls);
        auto held_out = means.row(spec.c + cls);
        for (std::size_t j = 0; j < spec.h; ++j)
          mean[j] = (1.0 - spec.shift) * id_mean[j] + spec.shift * held_out[j];
        auto x = draw_around(mean, spec.within_sigma, rng);
        set.features.insert(set.features.end(), x.begin(), x.end());
        break;
      }
      case OodKind::kUniform:
        for (std::size_t j = 0; j < spec.h; ++j)
          set.features.push_back(static_cast<float>(rng.uniform(0.0, upper)));
        break;
    }
  }
  return set;
}

}  // namespace olsr
