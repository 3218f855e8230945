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

#include "olsr/detector.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "olsr/adam.hpp"
#include "olsr/error.hpp"
#include "olsr/rng.hpp"
#include "olsr/scoring.hpp"

namespace olsr {
namespace {

constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kShuffleStream = 2;

/// dLoss/dresidual for one residual row; returns the per-sample loss.
double residual_loss(std::span<const double> r, LossKind kind, double scale, std::span<double> grad) {
  if (kind == LossKind::kSquared) {
    const double dim = static_cast<double>(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) grad[i] = scale * 2.0 * r[i] / dim;
    return dot(r, r) / dim;
  }
  const double norm = l2_norm(r);
  if (norm <= kNormGuard) {
    for (double& g : grad) g = 0.0;
  } else {
    for (std::size_t i = 0; i < r.size(); ++i) grad[i] = scale * r[i] / norm;
  }
  return norm;
}

void add_layers(std::vector<std::span<double>>& out, Network& net) {
  for (auto& layer : net) {
    out.push_back(layer.weight.flat());
    out.push_back(layer.bias);
  }
}

void add_layers(std::vector<std::span<const double>>& out, const Network& net) {
  for (const auto& layer : net) {
    out.push_back(layer.weight.flat());
    out.push_back(layer.bias);
  }
}

Network zeros_like(const Network& net) {
  Network out;
  out.reserve(net.size());
  for (const auto& layer : net) out.push_back(layer.zeros_like());
  return out;
}

}  // namespace

const char* framework_name(Framework f) {
  return f == Framework::kBasic ? "basic" : "layerwise";
}
const char* distance_name(Distance d) { return d == Distance::kL2 ? "l2" : "nl2"; }
const char* loss_kind_name(LossKind k) { return k == LossKind::kSquared ? "squared" : "norm"; }

Framework parse_framework(const std::string& s) {
  if (s == "layerwise") return Framework::kLayerwise;
  if (s == "basic") return Framework::kBasic;
  fail(ErrorCode::kConfig, "unknown score framework '" + s + "' (layerwise|basic)");
}

Distance parse_distance(const std::string& s) {
  if (s == "nl2") return Distance::kNl2;
  if (s == "l2") return Distance::kL2;
  fail(ErrorCode::kConfig, "unknown distance '" + s + "' (nl2|l2)");
}

LossKind parse_loss_kind(const std::string& s) {
  if (s == "norm") return LossKind::kNorm;
  if (s == "squared") return LossKind::kSquared;
  fail(ErrorCode::kConfig, "unknown loss variant '" + s + "' (norm|squared)");
}

void TrainConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) fail(ErrorCode::kParameter, what);
  };
  require(std::isfinite(lambda) && lambda >= 0.0, "lambda must be finite and >= 0");
  require(std::isfinite(temperature) && temperature > 0.0, "temperature must be > 0");
  require(std::isfinite(lr) && lr > 0.0, "learning rate must be > 0");
  require(batch > 0, "batch size must be > 0");
  require(epochs > 0, "epoch count must be > 0");
  for (double k : epsilon_k) require(std::isfinite(k) && k >= 0.0, "epsilon multiplier must be >= 0");
  require(val_fraction > 0.0 && val_fraction <= 0.5, "validation fraction must lie in (0, 0.5]");
  require(target_tpr > 0.0 && target_tpr <= 1.0, "target TPR must lie in (0, 1]");
}

bool operator==(const FcLayer& a, const FcLayer& b) {
  return a.activation == b.activation && a.weight == b.weight && a.bias == b.bias;
}

bool operator==(const DetectorModel& a, const DetectorModel& b) {
  return a.h == b.h && a.c == b.c && a.temperature == b.temperature &&
         a.framework == b.framework && a.encoder == b.encoder && a.d1 == b.d1 && a.d2 == b.d2;
}

DetectorModel DetectorModel::zeros_like() const {
  DetectorModel z;
  z.h = h;
  z.c = c;
  z.temperature = temperature;
  z.framework = framework;
  z.encoder = DenseMatrix(encoder.rows(), encoder.cols());
  z.d1 = olsr::zeros_like(d1);
  z.d2 = olsr::zeros_like(d2);
  return z;
}

std::vector<std::span<double>> DetectorModel::parameters() {
  std::vector<std::span<double>> out{encoder.flat()};
  add_layers(out, d1);
  add_layers(out, d2);
  return out;
}

std::vector<std::span<const double>> DetectorModel::parameters() const {
  std::vector<std::span<const double>> out{encoder.flat()};
  add_layers(out, d1);
  add_layers(out, d2);
  return out;
}

std::size_t DetectorModel::parameter_count() const {
  std::size_t n = 0;
  for (auto p : parameters()) n += p.size();
  return n;
}

void DetectorModel::validate() const {
  if (h == 0 || c == 0) fail(ErrorCode::kShape, "model dimensions must be positive");
  if (!(temperature > 0.0)) fail(ErrorCode::kParameter, "model temperature must be > 0");
  if (encoder.rows() != c || encoder.cols() != h) {
    fail(ErrorCode::kShape, "encoder must be C x H = " + std::to_string(c) + "x" +
                                std::to_string(h));
  }
  validate_network(d1);
  if (d1.front().in() != c || d1.back().out() != h) {
    fail(ErrorCode::kShape, "D1 must map C -> H");
  }
  if (framework == Framework::kLayerwise) {
    validate_network(d2);
    if (d2.front().in() != c || d2.back().out() != c) fail(ErrorCode::kShape, "D2 must map C -> C");
  } else if (!d2.empty()) {
    fail(ErrorCode::kShape, "basic-framework model must not carry D2");
  }
}

Network make_decoder(std::size_t in, std::size_t hidden, std::size_t out) {
  Network net;
  net.emplace_back(in, hidden, Activation::kRelu);
  net.emplace_back(hidden, hidden, Activation::kRelu);
  net.emplace_back(hidden, out, Activation::kNone);
  return net;
}

DetectorModel make_model(std::uint32_t h, std::uint32_t c, const TrainConfig& config,
                         const DenseMatrix* init_encoder) {
  config.validate();
  if (h == 0 || c == 0) fail(ErrorCode::kShape, "model dimensions must be positive");
  const std::size_t hidden = config.hidden != 0 ? config.hidden : std::max<std::size_t>(h, 4 * c);

  DetectorModel model;
  model.h = h;
  model.c = c;
  model.temperature = config.temperature;
  model.framework = config.framework;

  CounterRng rng(config.seed, kInitStream);
  const double bound = 1.0 / std::sqrt(static_cast<double>(h));
  model.encoder = DenseMatrix(c, h);
  for (double& w : model.encoder.flat()) w = rng.uniform(-bound, bound);
  if (init_encoder != nullptr) {
    if (init_encoder->rows() != c || init_encoder->cols() != h) {
      fail(ErrorCode::kDimension, "initial encoder is " + std::to_string(init_encoder->rows()) +
                                      "x" + std::to_string(init_encoder->cols()) +
                                      ", expected C x H = " + std::to_string(c) + "x" +
                                      std::to_string(h));
    }
    if (!init_encoder->all_finite()) fail(ErrorCode::kNumeric, "initial encoder is not finite");
    model.encoder = *init_encoder;
  }
  model.d1 = make_decoder(c, hidden, h);
  for (auto& layer : model.d1) init_fan_in(layer, rng);
  if (model.framework == Framework::kLayerwise) {
    model.d2 = make_decoder(c, hidden, c);
    for (auto& layer : model.d2) init_fan_in(layer, rng);
  }
  return model;
}

LossTerms loss_batch(const DetectorModel& model, const DenseMatrix& v,
                     std::span<const std::int32_t> labels, const LossOptions& options,
                     DetectorModel* grads) {
  const std::size_t batch = v.rows();
  if (v.cols() != model.h) {
    fail(ErrorCode::kShape, "features have " + std::to_string(v.cols()) + " dims, model expects " +
                                std::to_string(model.h));
  }
  if (labels.size() != batch) fail(ErrorCode::kShape, "label count does not match batch");
  if (batch == 0) return {};
  for (auto y : labels) {
    if (y < 0 || static_cast<std::uint32_t>(y) >= model.c) {
      fail(ErrorCode::kParameter, "label " + std::to_string(y) + " outside [0, " +
                                      std::to_string(model.c) + ")");
    }
  }
  const bool layerwise = model.framework == Framework::kLayerwise;
  const double inv_t = 1.0 / model.temperature;
  const double scale = 1.0 / static_cast<double>(batch);
  const std::size_t c = model.c;

  // Encoder: logits = v W^T.
  DenseMatrix logits(batch, c);
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t k = 0; k < c; ++k) logits(b, k) = dot(v.row(b), model.encoder.row(k));
  // Layerwise: D2 reads S(Wv/T). Basic: the only decoder reads the latent S(Wv).
  const DenseMatrix probs = softmax_rows(logits, layerwise ? model.temperature : 1.0);

  BatchCache cache1;
  BatchCache cache2;
  const DenseMatrix& rec1 = forward_batch(model.d1, layerwise ? logits : probs, cache1);
  const DenseMatrix* rec2 = layerwise ? &forward_batch(model.d2, probs, cache2) : nullptr;

  DenseMatrix d_rec1(batch, model.h);
  DenseMatrix d_rec2(layerwise ? batch : 0, c);
  DenseMatrix d_scaled(batch, c);  // dL/d(Wv/T) through the L2 target
  DenseMatrix d_logits(batch, c);
  LossTerms sum;
  Vector residual(std::max<std::size_t>(model.h, c));
  Vector grad(residual.size());

  for (std::size_t b = 0; b < batch; ++b) {
    {
      auto r = std::span(residual).first(model.h);
      auto g = std::span(grad).first(model.h);
      for (std::size_t j = 0; j < model.h; ++j) r[j] = v(b, j) - rec1(b, j);
      sum.l1 += residual_loss(r, options.loss, scale, g);
      for (std::size_t j = 0; j < model.h; ++j) d_rec1(b, j) = -g[j];
    }
    if (layerwise) {
      auto r = std::span(residual).first(c);
      auto g = std::span(grad).first(c);
      for (std::size_t k = 0; k < c; ++k) r[k] = logits(b, k) * inv_t - (*rec2)(b, k);
      sum.l2 += residual_loss(r, options.loss, scale, g);
      for (std::size_t k = 0; k < c; ++k) {
        d_rec2(b, k) = -g[k];
        if (!options.detach_l2_target) d_scaled(b, k) = g[k];
      }
    }
    const auto y = static_cast<std::size_t>(labels[b]);
    sum.reg -= log_softmax_at(logits.row(b), y);
    if (options.lambda != 0.0) {
      const Vector p = softmax_t(logits.row(b), 1.0);
      for (std::size_t k = 0; k < c; ++k)
        d_logits(b, k) += options.lambda * scale * (p[k] - (k == y ? 1.0 : 0.0));
    }
  }

  LossTerms out;
  out.l1 = sum.l1 * scale;
  out.l2 = sum.l2 * scale;
  out.reg = sum.reg * scale;
  out.total = out.l1 + out.l2 + options.lambda * out.reg;
  if (grads == nullptr) return out;

  DenseMatrix d_probs(batch, c);
  DenseMatrix d_in1;
  backward_batch(model.d1, cache1, std::move(d_rec1), grads->d1, &d_in1);
  if (layerwise) {
    for (std::size_t k = 0; k < d_logits.size(); ++k) d_logits.flat()[k] += d_in1.flat()[k];
    DenseMatrix d_in2;
    backward_batch(model.d2, cache2, std::move(d_rec2), grads->d2, &d_in2);
    d_probs = std::move(d_in2);
  } else {
    d_probs = std::move(d_in1);
  }
  // Softmax Jacobian, then the 1/T of the temperature scaling (layerwise).
  const double probs_scale = layerwise ? inv_t : 1.0;
  for (std::size_t b = 0; b < batch; ++b) {
    auto p = probs.row(b);
    auto dp = d_probs.row(b);
    const double s = dot(dp, p);
    for (std::size_t k = 0; k < c; ++k) {
      const double d_scaled_total = d_scaled(b, k) + p[k] * (dp[k] - s);
      d_logits(b, k) += d_scaled_total * probs_scale;
    }
  }
  for (std::size_t b = 0; b < batch; ++b) {
    auto vrow = v.row(b);
    for (std::size_t k = 0; k < c; ++k) {
      const double g = d_logits(b, k);
      if (g == 0.0) continue;
      auto wrow = grads->encoder.row(k);
      for (std::size_t j = 0; j < model.h; ++j) wrow[j] += g * vrow[j];
    }
  }
  return out;
}

LossTerms loss_total(const DetectorModel& model, std::span<const double> v, std::int32_t label,
                     const LossOptions& options, DetectorModel* grads) {
  if (v.size() != model.h) {
    fail(ErrorCode::kShape, "feature has " + std::to_string(v.size()) + " dims, model expects " +
                                std::to_string(model.h));
  }
  DenseMatrix x(1, v.size(), Vector(v.begin(), v.end()));
  const std::int32_t y[1] = {label};
  return loss_batch(model, x, y, options, grads);
}

double scheduled_lr(double base, std::size_t index, std::size_t total) {
  if (4 * index >= 3 * total) return base * 0.01;
  if (2 * index >= total) return base * 0.1;
  return base;
}

LossTerms evaluate_loss(const DetectorModel& model, const FeatureSet& set,
                        const LossOptions& options) {
  constexpr std::size_t kChunk = 256;
  LossTerms sum;
  const DenseMatrix all = set.to_matrix();
  for (std::size_t start = 0; start < set.n(); start += kChunk) {
    const std::size_t len = std::min(kChunk, set.n() - start);
    DenseMatrix chunk(len, set.h);
    std::copy_n(all.flat().begin() + static_cast<std::ptrdiff_t>(start * set.h), len * set.h,
                chunk.flat().begin());
    const auto t = loss_batch(model, chunk, std::span(set.labels).subspan(start, len), options, nullptr);
    const double w = static_cast<double>(len);
    sum.l1 += t.l1 * w;
    sum.l2 += t.l2 * w;
    sum.reg += t.reg * w;
  }
  const double n = static_cast<double>(std::max<std::size_t>(set.n(), 1));
  LossTerms out{sum.l1 / n, sum.l2 / n, sum.reg / n, 0.0};
  out.total = out.l1 + out.l2 + options.lambda * out.reg;
  return out;
}

TrainResult train(const FeatureSet& train_set, const TrainConfig& config,
                  const DenseMatrix* init_encoder) {
  config.validate();
  train_set.validate_labeled();
  if (train_set.c == 0) fail(ErrorCode::kParameter, "feature set declares zero classes");
  if (train_set.n() < config.batch) {
    fail(ErrorCode::kParameter, "training set has " + std::to_string(train_set.n()) +
                                    " samples, fewer than one batch of " +
                                    std::to_string(config.batch));
  }

  TrainResult result;
  result.model = make_model(train_set.h, train_set.c, config, init_encoder);
  DetectorModel& model = result.model;
  const LossOptions options{config.lambda, config.loss, config.detach_l2_target};

  const std::size_t n = train_set.n();
  const std::size_t batches = (n + config.batch - 1) / config.batch;
  const std::size_t total_updates = batches * config.epochs;
  const DenseMatrix all = train_set.to_matrix();

  result.log.push_back({0, evaluate_loss(model, train_set, options), config.lr});

  AdamState adam(AdamConfig{config.lr, 0.9, 0.999, 1e-8});
  CounterRng shuffle_rng(config.seed, kShuffleStream);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  DetectorModel grads = model.zeros_like();
  std::size_t update = 0;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    for (std::size_t i = n; i > 1; --i) {
      const auto j = static_cast<std::size_t>(shuffle_rng.below(i));
      std::swap(order[i - 1], order[j]);
    }
    LossTerms epoch_sum;
    double lr = config.lr;
    for (std::size_t bi = 0; bi < batches; ++bi) {
      const std::size_t start = bi * config.batch;
      const std::size_t len = std::min(config.batch, n - start);
      DenseMatrix x(len, train_set.h);
      std::vector<std::int32_t> y(len);
      for (std::size_t r = 0; r < len; ++r) {
        const std::size_t src = order[start + r];
        std::copy_n(all.row(src).begin(), train_set.h, x.row(r).begin());
        y[r] = train_set.labels[src];
      }
      for (auto p : grads.parameters()) std::fill(p.begin(), p.end(), 0.0);
      const LossTerms terms = loss_batch(model, x, y, options, &grads);
      if (!std::isfinite(terms.total)) {
        fail(ErrorCode::kNumeric, "training diverged at epoch " + std::to_string(epoch) +
                                      ", batch " + std::to_string(bi) + " (L1=" +
                                      std::to_string(terms.l1) + ", L2=" + std::to_string(terms.l2) +
                                      ", Lreg=" + std::to_string(terms.reg) + ")");
      }
      lr = scheduled_lr(config.lr, update, total_updates);
      try {
        const auto params = model.parameters();
        const auto& cgrads = grads;
        const auto gspans = cgrads.parameters();
        adam.update(params, gspans, lr);
      } catch (const Error& e) {
        fail(e.code(), std::string(e.what()) + " at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(bi));
      }
      ++update;
      const double w = static_cast<double>(len);
      epoch_sum.l1 += terms.l1 * w;
      epoch_sum.l2 += terms.l2 * w;
      epoch_sum.reg += terms.reg * w;
    }
    const double dn = static_cast<double>(n);
    LossTerms mean{epoch_sum.l1 / dn, epoch_sum.l2 / dn, epoch_sum.reg / dn, 0.0};
    mean.total = mean.l1 + mean.l2 + config.lambda * mean.reg;
    result.log.push_back({epoch, mean, lr});
  }
  result.updates = update;
  return result;
}

GaussianFit fit_gaussian(std::span<const double> values, double k) {
  if (values.size() < 2) {
    fail(ErrorCode::kCalibration, "need at least 2 validation samples, got " +
                                      std::to_string(values.size()));
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  // Shifted by the smallest value so identical samples fit sigma = 0 exactly.
  const double ref = sorted.front();
  double sum = 0.0;
  for (double x : sorted) sum += x - ref;
  const double mean_shift = sum / n;
  const double mu = ref + mean_shift;
  double ss = 0.0;
  for (double x : sorted) ss += (x - ref - mean_shift) * (x - ref - mean_shift);
  GaussianFit fit;
  fit.mu = mu;
  fit.sigma = std::sqrt(ss / n);
  fit.epsilon = k * fit.sigma;
  return fit;
}

std::array<GaussianFit, 3> fit_gaussians(const DetectorModel& model, const FeatureSet& val,
                                         std::array<double, 3> k, Distance distance) {
  if (val.h != model.h) {
    fail(ErrorCode::kDimension, "validation features have H=" + std::to_string(val.h) +
                                    ", model expects H=" + std::to_string(model.h));
  }
  if (val.n() < 2) {
    fail(ErrorCode::kCalibration, "need at least 2 validation samples, got " +
                                      std::to_string(val.n()));
  }
  std::vector<double> conf, r1, r2;
  for (std::size_t i = 0; i < val.n(); ++i) {
    const auto stats = raw_statistics(model, val.row_as_double(i), distance);
    if (stats.degenerate) continue;
    conf.push_back(stats.conf);
    r1.push_back(stats.r1);
    r2.push_back(stats.r2);
  }
  std::array<GaussianFit, 3> fits{};
  fits[0] = fit_gaussian(conf, k[0]);
  fits[1] = fit_gaussian(r1, k[1]);
  if (model.framework == Framework::kLayerwise) fits[2] = fit_gaussian(r2, k[2]);
  return fits;
}

Calibration calibrate(const DetectorModel& model, const FeatureSet& val, const TrainConfig& config) {
  Calibration cal;
  cal.distance = config.distance;
  cal.epsilon_k = config.epsilon_k;
  cal.target_tpr = config.target_tpr;
  cal.fits = fit_gaussians(model, val, config.epsilon_k, config.distance);

  std::vector<double> with_eps, without_eps;
  for (std::size_t i = 0; i < val.n(); ++i) {
    const Vector v = val.row_as_double(i);
    with_eps.push_back(normality_score(model, cal, v, {true}).score);
    without_eps.push_back(normality_score(model, cal, v, {false}).score);
  }
  cal.threshold = threshold_from_validation(with_eps, config.target_tpr);
  cal.threshold_no_epsilon = threshold_from_validation(without_eps, config.target_tpr);
  return cal;
}

}  // namespace olsr
