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

#include "olsr/gradcheck.hpp"

#include <cmath>
#include <functional>
#include <vector>

#include "olsr/error.hpp"

namespace olsr {
namespace {

/// Signs of every ReLU pre-activation plus the smallest |pre-activation|.
struct KinkProbe {
  std::vector<std::uint8_t> pattern;
  double closest = INFINITY;
};

void probe_network(std::span<const FcLayer> layers, std::span<const double> x, KinkProbe& out) {
  const ForwardResult fwd = forward(layers, x);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (layers[l].activation != Activation::kRelu) continue;
    for (double p : fwd.cache[l].pre) {
      out.pattern.push_back(p > 0.0 ? 1 : 0);
      out.closest = std::min(out.closest, std::abs(p));
    }
  }
}

KinkProbe probe_model(const DetectorModel& model, std::span<const double> v) {
  KinkProbe probe;
  const Vector logits = matvec(model.encoder, v);
  const Vector probs = softmax_t(logits, model.temperature);
  if (model.framework == Framework::kLayerwise) {
    probe_network(model.d1, logits, probe);
    probe_network(model.d2, probs, probe);
  } else {
    probe_network(model.d1, softmax_t(logits, 1.0), probe);
  }
  return probe;
}

GradCheckResult run_check(std::vector<std::span<double>> params,
                          std::vector<std::span<const double>> analytic,
                          const std::function<double()>& loss,
                          const std::function<KinkProbe()>& probe, const GradCheckOptions& opt) {
  GradCheckResult result;
  const KinkProbe base = probe();
  for (std::size_t t = 0; t < params.size(); ++t) {
    for (std::size_t i = 0; i < params[t].size(); ++i) {
      double& p = params[t][i];
      const double saved = p;
      p = saved + opt.step;
      const KinkProbe up = probe();
      const double f_up = loss();
      p = saved - opt.step;
      const KinkProbe down = probe();
      const double f_down = loss();
      p = saved;
      const bool near_kink = up.pattern != base.pattern || down.pattern != base.pattern ||
                             up.closest < opt.kink_margin || down.closest < opt.kink_margin;
      if (near_kink) {
        ++result.skipped;
        continue;
      }
      const double numeric = (f_up - f_down) / (2.0 * opt.step);
      const double a = analytic[t][i];
      const double rel = std::abs(a - numeric) / (std::abs(a) + std::abs(numeric) + 1e-12);
      result.max_rel_error = std::max(result.max_rel_error, rel);
      ++result.checked;
    }
  }
  return result;
}

}  // namespace

GradCheckResult grad_check(const DetectorModel& model, std::span<const double> v, std::int32_t label,
                           const LossOptions& options, const GradCheckOptions& check) {
  DetectorModel work = model;
  DetectorModel grads = model.zeros_like();
  loss_total(work, v, label, options, &grads);
  const DetectorModel& cgrads = grads;
  return run_check(
      work.parameters(), cgrads.parameters(),
      [&] { return loss_total(work, v, label, options, nullptr).total; },
      [&] { return probe_model(work, v); }, check);
}

GradCheckResult grad_check(const Network& layers, std::span<const double> x,
                           std::span<const double> target, const GradCheckOptions& check) {
  validate_network(layers);
  if (target.size() != layers.back().out()) fail(ErrorCode::kShape, "target width mismatch");
  Network work = layers;
  auto loss = [&] {
    const Vector out = forward(work, x).output;
    double s = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) s += 0.5 * (out[i] - target[i]) * (out[i] - target[i]);
    return s;
  };

  Network grads;
  for (const auto& l : work) grads.push_back(l.zeros_like());
  BatchCache cache;
  DenseMatrix xin(1, x.size(), Vector(x.begin(), x.end()));
  const DenseMatrix& out = forward_batch(work, xin, cache);
  DenseMatrix d_out(1, out.cols());
  for (std::size_t i = 0; i < out.cols(); ++i) d_out(0, i) = out(0, i) - target[i];
  backward_batch(work, cache, std::move(d_out), grads, nullptr);

  std::vector<std::span<double>> params;
  std::vector<std::span<const double>> analytic;
  for (std::size_t l = 0; l < work.size(); ++l) {
    params.push_back(work[l].weight.flat());
    params.push_back(work[l].bias);
    analytic.push_back(std::as_const(grads[l]).weight.flat());
    analytic.push_back(grads[l].bias);
  }
  return run_check(
      params, analytic, loss,
      [&] {
        KinkProbe p;
        probe_network(work, x, p);
        return p;
      },
      check);
}

}  // namespace olsr
