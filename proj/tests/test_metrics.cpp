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

#include <cmath>

#include "olsr/metrics.hpp"
#include "oracles.hpp"
#include "support.hpp"

namespace {

std::vector<double> draw(olsr::CounterRng& rng, std::size_t n, double shift, int levels) {
  std::vector<double> v(n);
  for (auto& x : v) {
    const double u = rng.uniform() + shift;
    x = levels > 0 ? std::floor(u * levels) / levels : u;  // quantised draws produce ties
  }
  return v;
}

TEST(Metrics, PerfectSeparation) {
  const std::vector<double> id{0.9, 0.8, 0.95, 0.7};
  const std::vector<double> ood{0.1, 0.2, 0.3};
  const auto r = olsr::evaluate(id, ood);
  EXPECT_EQ(r.fpr_at_95tpr, 0.0);
  EXPECT_EQ(r.auroc, 1.0);
  EXPECT_EQ(r.aupr_in, 1.0);
  EXPECT_EQ(r.detection_error, 0.0);
  EXPECT_EQ(r.id_count, 4u);
  EXPECT_EQ(r.ood_count, 3u);
}

TEST(Metrics, IdenticalDistributions) {
  std::vector<double> s;
  for (int i = 0; i < 100; ++i) s.push_back(i / 100.0);
  const auto r = olsr::evaluate(s, s);
  EXPECT_DOUBLE_EQ(r.auroc, 0.5);
  EXPECT_NEAR(r.fpr_at_95tpr, 0.95, 1e-12);
  EXPECT_NEAR(r.aupr_in, 0.5, 0.02);
  EXPECT_DOUBLE_EQ(r.detection_error, 0.5);
}

TEST(Metrics, InterleavedTwentyMatchesSweep) {
  std::vector<double> id, ood;
  for (int i = 0; i < 20; ++i) id.push_back(0.9 - 0.03 * i);
  for (int i = 0; i < 20; ++i) ood.push_back(0.885 - 0.03 * i);
  EXPECT_DOUBLE_EQ(olsr::fpr_at_tpr(id, ood, 0.95), oracle::fpr_at_tpr_sweep(id, ood, 0.95));
  EXPECT_DOUBLE_EQ(olsr::fpr_at_tpr(id, ood, 0.95), 18.0 / 20.0);
}

TEST(Metrics, RandomInstancesMatchOracles) {
  olsr::CounterRng rng(31);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 1 + rng.below(600), m = 1 + rng.below(600);
    const int levels = trial % 3 == 0 ? 0 : static_cast<int>(5 + rng.below(50));
    const auto id = draw(rng, n, 0.3, levels);
    const auto ood = draw(rng, m, 0.0, levels);
    ASSERT_NEAR(olsr::auroc(id, ood), oracle::auroc_pairwise(id, ood), 1e-9);
    ASSERT_NEAR(olsr::aupr_in(id, ood), oracle::aupr_in_sweep(id, ood), 1e-9);
    ASSERT_NEAR(olsr::fpr_at_tpr(id, ood), oracle::fpr_at_tpr_sweep(id, ood, 0.95), 1e-9);
    ASSERT_NEAR(olsr::detection_error(id, ood), oracle::detection_error_sweep(id, ood), 1e-9);
  }
}

TEST(Metrics, AurocAntisymmetry) {
  olsr::CounterRng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const auto id = draw(rng, 50 + rng.below(50), 0.2, 10);
    const auto ood = draw(rng, 50 + rng.below(50), 0.0, 10);
    EXPECT_DOUBLE_EQ(olsr::auroc(id, ood), 1.0 - olsr::auroc(ood, id));
  }
}

TEST(Metrics, InvariantUnderIncreasingTransform) {
  olsr::CounterRng rng(12);
  const auto id = draw(rng, 300, 0.2, 40);
  const auto ood = draw(rng, 200, 0.0, 40);
  std::vector<double> ti, to;
  for (double x : id) ti.push_back(std::exp(3 * x) - 7);
  for (double x : ood) to.push_back(std::exp(3 * x) - 7);
  const auto a = olsr::evaluate(id, ood);
  const auto b = olsr::evaluate(ti, to);
  EXPECT_EQ(a.auroc, b.auroc);
  EXPECT_EQ(a.aupr_in, b.aupr_in);
  EXPECT_EQ(a.fpr_at_95tpr, b.fpr_at_95tpr);
  EXPECT_EQ(a.detection_error, b.detection_error);
}

TEST(Metrics, BoundsHold) {
  olsr::CounterRng rng(2);
  for (int trial = 0; trial < 30; ++trial) {
    const auto r = olsr::evaluate(draw(rng, 40, rng.uniform(-0.5, 0.5), 8), draw(rng, 40, 0, 8));
    EXPECT_GE(r.auroc, 0.0);
    EXPECT_LE(r.auroc, 1.0);
    EXPECT_LE(r.detection_error, 0.5);
    EXPECT_GE(r.aupr_in, 0.0);
    EXPECT_LE(r.aupr_in, 1.0);
    EXPECT_GE(r.fpr_at_95tpr, 0.0);
    EXPECT_LE(r.fpr_at_95tpr, 1.0);
  }
}

TEST(Metrics, EmptySetsAreErrors) {
  const std::vector<double> some{0.5};
  EXPECT_OLSR_ERROR(olsr::auroc(std::vector<double>{}, some), kEvaluation);
  EXPECT_OLSR_ERROR(olsr::evaluate(some, std::vector<double>{}), kEvaluation);
}

TEST(Histogram, SixtyFourBins) {
  const std::vector<double> s{0.0, 0.5, 1.0, 1.0 / 64, 0.999, -0.1, 1.5};
  const auto h = olsr::histogram(s);
  ASSERT_EQ(h.size(), 64u);
  EXPECT_EQ(h[0], 2u);   // 0.0 and the clamp of -0.1
  EXPECT_EQ(h[1], 1u);   // 1/64 opens bin 1
  EXPECT_EQ(h[32], 1u);  // 0.5
  EXPECT_EQ(h[63], 3u);  // 0.999, 1.0 and the clamp of 1.5
  std::size_t total = 0;
  for (auto c : h) total += c;
  EXPECT_EQ(total, s.size());
  EXPECT_OLSR_ERROR(olsr::histogram(s, 0), kParameter);
}

}  // namespace
