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

#include "olsr/olsr.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <string>
#include <utility>

#include "olsr/affine.hpp"
#include "olsr/data.hpp"
#include "olsr/detector.hpp"
#include "olsr/error.hpp"
#include "olsr/metrics.hpp"
#include "olsr/model_io.hpp"
#include "olsr/report.hpp"
#include "olsr/rng.hpp"
#include "olsr/scoring.hpp"

struct olsr_features {
  olsr::FeatureSet set;
};

struct olsr_model {
  olsr::DetectorModel model;
  olsr::Calibration calibration;
};

namespace {

thread_local std::string g_last_error;

olsr_status set_error(olsr_status status, const char* msg) {
  g_last_error = msg;
  return status;
}

template <typename F>
olsr_status guarded(F&& body) {
  try {
    body();
    return OLSR_OK;
  } catch (const olsr::Error& e) {
    return set_error(static_cast<olsr_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(OLSR_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(OLSR_ERR_INTERNAL, e.what());
  } catch (...) {
    return set_error(OLSR_ERR_INTERNAL, "unknown exception");
  }
}

#define OLSR_REQUIRE(ptr)                                                        \
  do {                                                                           \
    if ((ptr) == nullptr) return set_error(OLSR_ERR_INVALID_ARGUMENT, #ptr " is null"); \
  } while (0)

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

olsr::SynthSpec to_cpp(const olsr_synth_spec& s) {
  olsr::SynthSpec out;
  out.c = s.classes;
  out.h = s.dim;
  out.mean_scale = s.mean_scale;
  out.within_sigma = s.within_sigma;
  switch (s.ood_kind) {
    case OLSR_OOD_SHIFTED: out.ood_kind = olsr::OodKind::kShifted; break;
    case OLSR_OOD_SCALED_NORM: out.ood_kind = olsr::OodKind::kScaledNorm; break;
    case OLSR_OOD_UNIFORM: out.ood_kind = olsr::OodKind::kUniform; break;
    default: olsr::fail(olsr::ErrorCode::kConfig, "unknown ood kind");
  }
  out.ood_norm_multiplier = s.ood_norm_multiplier;
  out.shift = s.shift;
  out.seed = s.seed;
  return out;
}

olsr::TrainConfig to_cpp(const olsr_train_config& c) {
  olsr::TrainConfig out;
  out.lambda = c.lambda;
  out.temperature = c.temperature;
  out.lr = c.lr;
  out.batch = c.batch;
  out.epochs = c.epochs;
  out.seed = c.seed;
  out.hidden = c.hidden;
  if (c.loss != OLSR_LOSS_NORM && c.loss != OLSR_LOSS_SQUARED)
    olsr::fail(olsr::ErrorCode::kConfig, "unknown loss kind");
  out.loss = static_cast<olsr::LossKind>(c.loss);
  for (int i = 0; i < 3; ++i) out.epsilon_k[i] = c.epsilon_k[i];
  out.val_fraction = c.val_fraction;
  if (c.framework != OLSR_FRAMEWORK_LAYERWISE && c.framework != OLSR_FRAMEWORK_BASIC)
    olsr::fail(olsr::ErrorCode::kConfig, "unknown framework");
  out.framework = static_cast<olsr::Framework>(c.framework);
  if (c.distance != OLSR_DISTANCE_NL2 && c.distance != OLSR_DISTANCE_L2)
    olsr::fail(olsr::ErrorCode::kConfig, "unknown distance");
  out.distance = static_cast<olsr::Distance>(c.distance);
  out.detach_l2_target = c.detach_l2_target != 0;
  out.target_tpr = c.target_tpr;
  return out;
}

void fill_row(const olsr::ScoreBundle& b, double threshold, olsr_score_row* row) {
  row->conf = b.conf;
  row->r1 = b.r1;
  row->r2 = b.r2;
  row->phi0 = b.phi0;
  row->psi1 = b.psi1;
  row->psi2 = b.psi2;
  row->score = b.score;
  row->predicted = static_cast<uint32_t>(b.predicted);
  row->flagged = b.flagged ? 1 : 0;
  row->is_ood = olsr::is_ood(b.score, threshold) ? 1 : 0;
}

double model_threshold(const olsr_model& m, bool use_epsilon) {
  return use_epsilon ? m.calibration.threshold : m.calibration.threshold_no_epsilon;
}

}  // namespace

extern "C" {

const char* olsr_version(void) { return "1.0.0"; }

const char* olsr_last_error(void) { return g_last_error.c_str(); }

const char* olsr_status_name(olsr_status status) {
  switch (status) {
    case OLSR_OK: return "ok";
    case OLSR_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case OLSR_ERR_INTERNAL: return "internal";
    default:
      if (status >= OLSR_ERR_SHAPE && status <= OLSR_ERR_CONFIG)
        return olsr::error_code_name(static_cast<olsr::ErrorCode>(status));
      return "unknown";
  }
}

void olsr_string_free(char* s) { std::free(s); }

olsr_status olsr_features_read(const char* path, olsr_features** out) {
  OLSR_REQUIRE(path);
  OLSR_REQUIRE(out);
  *out = nullptr;
  return guarded([&] { *out = new olsr_features{olsr::read_features(path)}; });
}

olsr_status olsr_features_read_csv(const char* path, uint32_t classes, olsr_features** out) {
  OLSR_REQUIRE(path);
  OLSR_REQUIRE(out);
  *out = nullptr;
  return guarded([&] { *out = new olsr_features{olsr::read_features_csv(path, classes)}; });
}

olsr_status olsr_features_write(const olsr_features* set, const char* path) {
  OLSR_REQUIRE(set);
  OLSR_REQUIRE(path);
  return guarded([&] { olsr::write_features(path, set->set); });
}

olsr_status olsr_features_create(uint64_t n, uint32_t h, uint32_t c, const float* data,
                                 const int32_t* labels, olsr_features** out) {
  OLSR_REQUIRE(out);
  *out = nullptr;
  if (n > 0) {
    OLSR_REQUIRE(data);
    OLSR_REQUIRE(labels);
  }
  return guarded([&] {
    olsr::FeatureSet s;
    s.h = h;
    s.c = c;
    s.features.assign(data, data + n * h);
    s.labels.assign(labels, labels + n);
    s.validate();
    *out = new olsr_features{std::move(s)};
  });
}

void olsr_features_free(olsr_features* set) { delete set; }

uint64_t olsr_features_count(const olsr_features* set) { return set ? set->set.n() : 0; }
uint32_t olsr_features_dim(const olsr_features* set) { return set ? set->set.h : 0; }
uint32_t olsr_features_classes(const olsr_features* set) { return set ? set->set.c : 0; }
const float* olsr_features_data(const olsr_features* set) {
  return set ? set->set.features.data() : nullptr;
}
const int32_t* olsr_features_labels(const olsr_features* set) {
  return set ? set->set.labels.data() : nullptr;
}

olsr_status olsr_features_split(const olsr_features* set, double val_fraction, uint64_t seed,
                                olsr_features** train, olsr_features** val) {
  OLSR_REQUIRE(set);
  OLSR_REQUIRE(train);
  OLSR_REQUIRE(val);
  *train = nullptr;
  *val = nullptr;
  return guarded([&] {
    auto [tr, va] = olsr::split(set->set, val_fraction, seed);
    auto* t = new olsr_features{std::move(tr)};
    try {
      *val = new olsr_features{std::move(va)};
    } catch (...) {
      delete t;
      throw;
    }
    *train = t;
  });
}

void olsr_synth_spec_default(olsr_synth_spec* spec) {
  if (spec == nullptr) return;
  const olsr::SynthSpec d;
  spec->classes = d.c;
  spec->dim = d.h;
  spec->mean_scale = d.mean_scale;
  spec->within_sigma = d.within_sigma;
  spec->ood_kind = OLSR_OOD_SCALED_NORM;
  spec->ood_norm_multiplier = d.ood_norm_multiplier;
  spec->shift = d.shift;
  spec->seed = d.seed;
}

olsr_status olsr_synth_id(const olsr_synth_spec* spec, uint64_t n, uint64_t stream,
                          olsr_features** out) {
  OLSR_REQUIRE(spec);
  OLSR_REQUIRE(out);
  *out = nullptr;
  return guarded([&] { *out = new olsr_features{olsr::synth_id(to_cpp(*spec), n, stream)}; });
}

olsr_status olsr_synth_ood(const olsr_synth_spec* spec, uint64_t n, uint64_t stream,
                           olsr_features** out) {
  OLSR_REQUIRE(spec);
  OLSR_REQUIRE(out);
  *out = nullptr;
  return guarded([&] { *out = new olsr_features{olsr::synth_ood(to_cpp(*spec), n, stream)}; });
}

void olsr_train_config_default(olsr_train_config* config) {
  if (config == nullptr) return;
  const olsr::TrainConfig d;
  config->lambda = d.lambda;
  config->temperature = d.temperature;
  config->lr = d.lr;
  config->batch = d.batch;
  config->epochs = d.epochs;
  config->seed = d.seed;
  config->hidden = d.hidden;
  config->loss = static_cast<olsr_loss>(d.loss);
  for (int i = 0; i < 3; ++i) config->epsilon_k[i] = d.epsilon_k[i];
  config->val_fraction = d.val_fraction;
  config->framework = static_cast<olsr_framework>(d.framework);
  config->distance = static_cast<olsr_distance>(d.distance);
  config->detach_l2_target = d.detach_l2_target ? 1 : 0;
  config->target_tpr = d.target_tpr;
}

olsr_status olsr_train(const olsr_features* train, const olsr_features* val,
                       const olsr_train_config* config, const double* init_encoder,
                       olsr_model** out, char** log_json) {
  OLSR_REQUIRE(train);
  OLSR_REQUIRE(config);
  OLSR_REQUIRE(out);
  *out = nullptr;
  if (log_json != nullptr) *log_json = nullptr;
  return guarded([&] {
    const olsr::TrainConfig cfg = to_cpp(*config);
    cfg.validate();
    const olsr::FeatureSet* fit_set = &train->set;
    const olsr::FeatureSet* cal_set = val ? &val->set : nullptr;
    std::pair<olsr::FeatureSet, olsr::FeatureSet> parts;
    if (cal_set == nullptr) {
      parts = olsr::split(train->set, cfg.val_fraction, cfg.seed);
      fit_set = &parts.first;
      cal_set = &parts.second;
    } else if (cal_set->h != fit_set->h || cal_set->c != fit_set->c) {
      olsr::fail(olsr::ErrorCode::kDimension, "validation set dimensions differ from training set");
    }
    olsr::DenseMatrix init;
    if (init_encoder != nullptr) {
      init.resize(fit_set->c, fit_set->h);
      std::memcpy(init.flat().data(), init_encoder,
                  sizeof(double) * static_cast<std::size_t>(fit_set->c) * fit_set->h);
    }
    olsr::TrainResult result = olsr::train(*fit_set, cfg, init_encoder ? &init : nullptr);
    olsr::Calibration cal = olsr::calibrate(result.model, *cal_set, cfg);
    char* log = nullptr;
    if (log_json != nullptr) {
      auto j = olsr::training_log_json(result, cfg, cal);
      j["train_samples"] = fit_set->n();
      j["validation_samples"] = cal_set->n();
      log = dup_string(j.dump(2));
    }
    try {
      *out = new olsr_model{std::move(result.model), cal};
    } catch (...) {
      std::free(log);
      throw;
    }
    if (log_json != nullptr) *log_json = log;
  });
}

olsr_status olsr_model_save(const olsr_model* model, const char* path) {
  OLSR_REQUIRE(model);
  OLSR_REQUIRE(path);
  return guarded([&] { olsr::save_model(path, model->model, model->calibration); });
}

olsr_status olsr_model_load(const char* path, olsr_model** out) {
  OLSR_REQUIRE(path);
  OLSR_REQUIRE(out);
  *out = nullptr;
  return guarded([&] {
    olsr::SavedModel s = olsr::load_model(path);
    *out = new olsr_model{std::move(s.model), s.calibration};
  });
}

void olsr_model_free(olsr_model* model) { delete model; }
uint32_t olsr_model_dim(const olsr_model* model) { return model ? model->model.h : 0; }
uint32_t olsr_model_classes(const olsr_model* model) { return model ? model->model.c : 0; }

olsr_status olsr_model_info_json(const olsr_model* model, char** json) {
  OLSR_REQUIRE(model);
  OLSR_REQUIRE(json);
  *json = nullptr;
  return guarded([&] {
    const auto& m = model->model;
    nlohmann::ordered_json j;
    j["h"] = m.h;
    j["c"] = m.c;
    j["temperature"] = m.temperature;
    j["framework"] = olsr::framework_name(m.framework);
    auto widths = [](const olsr::Network& net) {
      nlohmann::ordered_json w = nlohmann::ordered_json::array();
      if (net.empty()) return w;
      w.push_back(net.front().in());
      for (const auto& l : net) w.push_back(l.out());
      return w;
    };
    j["d1_widths"] = widths(m.d1);
    j["d2_widths"] = widths(m.d2);
    j["parameters"] = m.parameter_count();
    j["calibration"] = olsr::to_json(model->calibration);
    *json = dup_string(j.dump(2));
  });
}

olsr_status olsr_score(const olsr_model* model, const olsr_features* set, int use_epsilon,
                       olsr_score_row* rows, size_t capacity) {
  OLSR_REQUIRE(model);
  OLSR_REQUIRE(set);
  if (set->set.n() > 0) OLSR_REQUIRE(rows);
  if (capacity < set->set.n())
    return set_error(OLSR_ERR_INVALID_ARGUMENT, "row buffer smaller than the feature count");
  return guarded([&] {
    if (set->set.h != model->model.h)
      olsr::fail(olsr::ErrorCode::kDimension,
                 "feature width " + std::to_string(set->set.h) + " does not match model width " +
                     std::to_string(model->model.h));
    const olsr::ScoreOptions opts{use_epsilon != 0};
    const auto bundles = olsr::score_features(model->model, model->calibration, set->set, opts);
    const double thr = model_threshold(*model, opts.use_epsilon);
    for (std::size_t i = 0; i < bundles.size(); ++i) fill_row(bundles[i], thr, &rows[i]);
  });
}

olsr_status olsr_score_vector(const olsr_model* model, const double* v, size_t len, int use_epsilon,
                              olsr_score_row* row) {
  OLSR_REQUIRE(model);
  OLSR_REQUIRE(v);
  OLSR_REQUIRE(row);
  return guarded([&] {
    const olsr::ScoreOptions opts{use_epsilon != 0};
    const auto b = olsr::normality_score(model->model, model->calibration, {v, len}, opts);
    fill_row(b, model_threshold(*model, opts.use_epsilon), row);
  });
}

olsr_status olsr_threshold_from_validation(const double* scores, size_t n, double target_tpr,
                                           double* threshold) {
  if (n > 0) OLSR_REQUIRE(scores);
  OLSR_REQUIRE(threshold);
  return guarded([&] { *threshold = olsr::threshold_from_validation({scores, n}, target_tpr); });
}

olsr_status olsr_evaluate(const double* id_scores, size_t n, const double* ood_scores, size_t m,
                          olsr_eval_report* report) {
  if (n > 0) OLSR_REQUIRE(id_scores);
  if (m > 0) OLSR_REQUIRE(ood_scores);
  OLSR_REQUIRE(report);
  return guarded([&] {
    const auto r = olsr::evaluate({id_scores, n}, {ood_scores, m});
    report->fpr_at_95tpr = r.fpr_at_95tpr;
    report->auroc = r.auroc;
    report->aupr_in = r.aupr_in;
    report->detection_error = r.detection_error;
    report->id_count = r.id_count;
    report->ood_count = r.ood_count;
  });
}

olsr_status olsr_histogram(const double* scores, size_t n, size_t bins, uint64_t* counts) {
  if (n > 0) OLSR_REQUIRE(scores);
  OLSR_REQUIRE(counts);
  return guarded([&] {
    const auto h = olsr::histogram({scores, n}, bins);
    for (std::size_t i = 0; i < h.size(); ++i) counts[i] = h[i];
  });
}

olsr_status olsr_verify_affine_model(const olsr_model* model, const olsr_features* inputs,
                                     const double* norm_grid, size_t grid_len, int frobenius,
                                     char** report_json) {
  OLSR_REQUIRE(model);
  OLSR_REQUIRE(inputs);
  OLSR_REQUIRE(report_json);
  if (grid_len > 0) OLSR_REQUIRE(norm_grid);
  *report_json = nullptr;
  return guarded([&] {
    if (inputs->set.h != model->model.h)
      olsr::fail(olsr::ErrorCode::kDimension, "input width does not match model width");
    const olsr::Network path = olsr::reconstruction_path(model->model);
    const auto norm = frobenius ? olsr::OperatorNorm::kFrobenius : olsr::OperatorNorm::kSpectral;
    olsr::AffineReport r = olsr::verify_affine(path, inputs->set, norm);
    if (grid_len > 0) r.norm_bias = olsr::norm_bias_demo(model->model, inputs->set, {norm_grid, grid_len});
    auto j = olsr::to_json(r);
    j["operator_norm"] = frobenius ? "frobenius" : "spectral";
    *report_json = dup_string(j.dump(2));
  });
}

olsr_status olsr_verify_affine_random(const uint32_t* widths, size_t count, uint64_t seed,
                                      uint64_t samples, int frobenius, char** report_json) {
  OLSR_REQUIRE(widths);
  OLSR_REQUIRE(report_json);
  *report_json = nullptr;
  return guarded([&] {
    if (count < 2 || widths[0] != widths[count - 1])
      olsr::fail(olsr::ErrorCode::kShape, "reconstruction network needs equal input and output widths");
    std::vector<std::size_t> w(widths, widths + count);
    const olsr::Network net = olsr::random_relu_network(w, seed);
    olsr::FeatureSet inputs;
    inputs.h = widths[0];
    inputs.c = 1;
    inputs.labels.assign(samples, olsr::kUnlabeled);
    inputs.features.resize(samples * inputs.h);
    olsr::CounterRng rng(seed, 8);
    for (auto& x : inputs.features) x = static_cast<float>(2.0 * rng.normal());
    const auto norm = frobenius ? olsr::OperatorNorm::kFrobenius : olsr::OperatorNorm::kSpectral;
    auto j = olsr::to_json(olsr::verify_affine(net, inputs, norm));
    j["operator_norm"] = frobenius ? "frobenius" : "spectral";
    *report_json = dup_string(j.dump(2));
  });
}

}  // extern "C"
