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

// Reference implementations used only by the tests. Everything here is
// written out scalar by scalar and shares no code with the library beyond the
// model/feature containers it reads.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "olsr/detector.hpp"

namespace oracle {

using Quad = boost::multiprecision::cpp_bin_float_quad;

// ---------------------------------------------------------------- metrics

inline double auroc_pairwise(const std::vector<double>& id, const std::vector<double>& ood) {
  double wins = 0.0;
  for (double a : id)
    for (double b : ood) wins += a > b ? 1.0 : (a == b ? 0.5 : 0.0);
  return wins / (static_cast<double>(id.size()) * static_cast<double>(ood.size()));
}

struct Rates {
  double threshold;
  double tpr;
  double fpr;
  std::size_t tp;
  std::size_t fp;
};

// Every distinct score as an acceptance threshold (score >= t), descending.
inline std::vector<Rates> sweep(const std::vector<double>& id, const std::vector<double>& ood) {
  std::set<double, std::greater<>> thresholds(id.begin(), id.end());
  thresholds.insert(ood.begin(), ood.end());
  std::vector<Rates> out;
  for (double t : thresholds) {
    Rates r{t, 0, 0, 0, 0};
    for (double a : id) r.tp += a >= t;
    for (double b : ood) r.fp += b >= t;
    r.tpr = static_cast<double>(r.tp) / static_cast<double>(id.size());
    r.fpr = static_cast<double>(r.fp) / static_cast<double>(ood.size());
    out.push_back(r);
  }
  return out;
}

inline double fpr_at_tpr_sweep(const std::vector<double>& id, const std::vector<double>& ood, double tpr) {
  double best_t = -std::numeric_limits<double>::infinity();
  double fpr = 1.0;
  for (const auto& r : sweep(id, ood)) {
    if (r.tpr >= tpr && r.threshold > best_t) {
      best_t = r.threshold;
      fpr = r.fpr;
    }
  }
  return fpr;
}

inline double aupr_in_sweep(const std::vector<double>& id, const std::vector<double>& ood) {
  double area = 0.0, prev = 0.0;
  for (const auto& r : sweep(id, ood)) {
    if (r.tpr == prev) continue;
    area += (r.tpr - prev) * static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fp);
    prev = r.tpr;
  }
  return area;
}

inline double detection_error_sweep(const std::vector<double>& id, const std::vector<double>& ood) {
  double best = 0.5;
  for (const auto& r : sweep(id, ood)) best = std::min(best, 0.5 * (1.0 - r.tpr) + 0.5 * r.fpr);
  return best;
}

// ---------------------------------------------------------------- network

template <typename R>
struct Layer {
  std::size_t in = 0, out = 0;
  std::vector<R> w;  // out x in
  std::vector<R> b;
  bool relu = false;
};

template <typename R>
struct Model {
  std::size_t h = 0, c = 0;
  R temperature = 1;
  bool layerwise = true;
  std::vector<R> encoder;  // c x h
  std::vector<Layer<R>> d1, d2;
};

template <typename R>
std::vector<Layer<R>> convert(const olsr::Network& net) {
  std::vector<Layer<R>> out;
  for (const auto& l : net) {
    Layer<R> x;
    x.in = l.weight.cols();
    x.out = l.weight.rows();
    for (double v : l.weight.flat()) x.w.push_back(R(v));
    for (double v : l.bias) x.b.push_back(R(v));
    x.relu = l.activation == olsr::Activation::kRelu;
    out.push_back(std::move(x));
  }
  return out;
}

template <typename R>
Model<R> convert(const olsr::DetectorModel& m) {
  Model<R> out;
  out.h = m.h;
  out.c = m.c;
  out.temperature = R(m.temperature);
  out.layerwise = m.framework == olsr::Framework::kLayerwise;
  for (double v : m.encoder.flat()) out.encoder.push_back(R(v));
  out.d1 = convert<R>(m.d1);
  out.d2 = convert<R>(m.d2);
  return out;
}

// Pointers to every scalar parameter in the library's parameters() order.
template <typename R>
std::vector<R*> parameter_slots(Model<R>& m) {
  std::vector<R*> out;
  for (auto& v : m.encoder) out.push_back(&v);
  for (auto* net : {&m.d1, &m.d2}) {
    for (auto& l : *net) {
      for (auto& v : l.w) out.push_back(&v);
      for (auto& v : l.b) out.push_back(&v);
    }
  }
  return out;
}

template <typename R>
std::vector<R> run(const std::vector<Layer<R>>& net, std::vector<R> x, std::vector<std::uint8_t>* signs) {
  for (const auto& l : net) {
    std::vector<R> y(l.out);
    for (std::size_t o = 0; o < l.out; ++o) {
      R acc = l.b[o];
      for (std::size_t i = 0; i < l.in; ++i) acc += l.w[o * l.in + i] * x[i];
      if (l.relu) {
        if (signs) signs->push_back(acc > 0 ? 1 : 0);
        if (!(acc > 0)) acc = 0;
      }
      y[o] = acc;
    }
    x = std::move(y);
  }
  return x;
}

template <typename R>
std::vector<R> softmax(const std::vector<R>& z, R t) {
  R mx = z[0];
  for (const auto& v : z) mx = v > mx ? v : mx;
  std::vector<R> e(z.size());
  R sum = 0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    using std::exp;
    e[i] = exp((z[i] - mx) / t);
    sum += e[i];
  }
  for (auto& v : e) v /= sum;
  return e;
}

template <typename R>
R norm(const std::vector<R>& x) {
  using std::sqrt;
  R ss = 0;
  for (const auto& v : x) ss += v * v;
  return sqrt(ss);
}

// Per-sample loss L1 + L2 + lambda * L_reg written from the definitions.
template <typename R>
R loss(const Model<R>& m, const std::vector<R>& v, std::size_t y, R lambda, bool squared,
       std::vector<std::uint8_t>* signs = nullptr) {
  using std::log;
  std::vector<R> z(m.c);
  for (std::size_t k = 0; k < m.c; ++k) {
    R acc = 0;
    for (std::size_t j = 0; j < m.h; ++j) acc += m.encoder[k * m.h + j] * v[j];
    z[k] = acc;
  }
  auto residual = [&](const std::vector<R>& a, const std::vector<R>& b) {
    std::vector<R> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    const R n = norm(d);
    return squared ? n * n / R(static_cast<double>(a.size())) : n;
  };
  R total = 0;
  if (m.layerwise) {
    const auto p = softmax(z, m.temperature);
    total += residual(v, run(m.d1, z, signs));
    std::vector<R> scaled(m.c);
    for (std::size_t k = 0; k < m.c; ++k) scaled[k] = z[k] / m.temperature;
    total += residual(scaled, run(m.d2, p, signs));
  } else {
    total += residual(v, run(m.d1, softmax(z, R(1)), signs));
  }
  total += -lambda * log(softmax(z, R(1))[y]);
  return total;
}

struct FdResult {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;
};

// Central differences of the quad-precision loss against the analytic gradient
// from the library. Coordinates whose perturbation flips any ReLU are skipped.
inline FdResult finite_difference_check(const olsr::DetectorModel& model, const std::vector<double>& v,
                                        std::size_t y, double lambda, bool squared,
                                        const olsr::DetectorModel& analytic, double step = 1e-5) {
  Model<Quad> m = convert<Quad>(model);
  std::vector<Quad> vq(v.begin(), v.end());
  auto slots = parameter_slots(m);
  std::vector<double> grad;
  for (auto span : analytic.parameters())
    for (double g : span) grad.push_back(g);
  std::vector<std::uint8_t> base_signs;
  loss(m, vq, y, Quad(lambda), squared, &base_signs);
  FdResult out;
  const Quad h(step);
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const Quad saved = *slots[i];
    std::vector<std::uint8_t> s_up, s_down;
    *slots[i] = saved + h;
    const Quad up = loss(m, vq, y, Quad(lambda), squared, &s_up);
    *slots[i] = saved - h;
    const Quad down = loss(m, vq, y, Quad(lambda), squared, &s_down);
    *slots[i] = saved;
    if (s_up != base_signs || s_down != base_signs) {
      ++out.skipped;
      continue;
    }
    const double numeric = static_cast<double>((up - down) / (2 * h));
    const double a = grad[i];
    const double rel = std::abs(a - numeric) / (std::abs(a) + std::abs(numeric) + 1e-12);
    out.max_rel_error = std::max(out.max_rel_error, rel);
    ++out.checked;
  }
  return out;
}

// ---------------------------------------------------------------- scoring

// Straight-line normality score: max softmax, NL2 residuals, erfc-based CDFs.
struct Score {
  long double conf, r1, r2, score;
};

inline long double cdf(long double x, long double mu, long double scale) {
  if (scale == 0.0L) return x < mu ? 0.0L : (x > mu ? 1.0L : 0.5L);
  return 0.5L * std::erfc(-(x - mu) / (scale * std::sqrt(2.0L)));
}

inline Score straight_line_score(const olsr::DetectorModel& dm, const olsr::Calibration& cal,
                                 const std::vector<double>& v, bool use_epsilon = true) {
  const Model<long double> m = convert<long double>(dm);
  std::vector<long double> x(v.begin(), v.end());
  std::vector<long double> z(m.c);
  for (std::size_t k = 0; k < m.c; ++k) {
    long double acc = 0;
    for (std::size_t j = 0; j < m.h; ++j) acc += m.encoder[k * m.h + j] * x[j];
    z[k] = acc;
  }
  const auto p = softmax(z, m.temperature);
  const bool l2 = cal.distance == olsr::Distance::kL2;
  auto dist = [&](const std::vector<long double>& f, const std::vector<long double>& g) {
    const long double nf = norm(f);
    long double ss = 0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      const long double d = l2 ? f[i] - g[i] : f[i] / nf - g[i] / nf;
      ss += d * d;
    }
    return std::sqrt(ss);
  };
  Score s{};
  s.conf = *std::max_element(p.begin(), p.end());
  auto scale = [&](int i) {
    return static_cast<long double>(cal.fits[i].sigma) + (use_epsilon ? cal.fits[i].epsilon : 0.0);
  };
  long double psi2 = 1.0L;
  if (m.layerwise) {
    s.r1 = dist(x, run(m.d1, z, nullptr));
    std::vector<long double> scaled(m.c);
    for (std::size_t k = 0; k < m.c; ++k) scaled[k] = z[k] / m.temperature;
    s.r2 = dist(scaled, run(m.d2, p, nullptr));
    psi2 = 1.0L - cdf(s.r2, cal.fits[2].mu, scale(2));
  } else {
    s.r1 = dist(x, run(m.d1, softmax(z, 1.0L), nullptr));
  }
  const long double phi0 = cdf(s.conf, cal.fits[0].mu, scale(0));
  const long double psi1 = 1.0L - cdf(s.r1, cal.fits[1].mu, scale(1));
  s.score = phi0 * psi1 * psi2;
  return s;
}

}  // namespace oracle
