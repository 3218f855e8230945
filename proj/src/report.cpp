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

#include "olsr/report.hpp"

namespace olsr {

using nlohmann::ordered_json;

ordered_json to_json(const TrainConfig& c) {
  ordered_json j;
  j["lambda"] = c.lambda;
  j["temperature"] = c.temperature;
  j["lr"] = c.lr;
  j["batch"] = c.batch;
  j["epochs"] = c.epochs;
  j["seed"] = c.seed;
  j["hidden"] = c.hidden;
  j["loss"] = loss_kind_name(c.loss);
  j["epsilon_k"] = c.epsilon_k;
  j["val_fraction"] = c.val_fraction;
  j["framework"] = framework_name(c.framework);
  j["distance"] = distance_name(c.distance);
  j["detach_l2_target"] = c.detach_l2_target;
  j["target_tpr"] = c.target_tpr;
  return j;
}

ordered_json to_json(const Calibration& cal) {
  ordered_json j;
  const char* names[3] = {"confidence", "d1_residual", "d2_residual"};
  for (std::size_t i = 0; i < 3; ++i) {
    j["fits"][names[i]] = {{"mu", cal.fits[i].mu},
                           {"sigma", cal.fits[i].sigma},
                           {"epsilon", cal.fits[i].epsilon}};
  }
  j["distance"] = distance_name(cal.distance);
  j["target_tpr"] = cal.target_tpr;
  j["threshold"] = cal.threshold;
  j["threshold_no_epsilon"] = cal.threshold_no_epsilon;
  return j;
}

ordered_json training_log_json(const TrainResult& result, const TrainConfig& config,
                               const Calibration& calibration) {
  ordered_json j;
  j["config"] = to_json(config);
  j["regularizer_disabled"] = config.lambda == 0.0;
  j["updates"] = result.updates;
  j["parameters"] = result.model.parameter_count();
  ordered_json epochs = ordered_json::array();
  for (const auto& e : result.log) {
    epochs.push_back({{"epoch", e.epoch},
                      {"l1", e.loss.l1},
                      {"l2", e.loss.l2},
                      {"l_reg", e.loss.reg},
                      {"total", e.loss.total},
                      {"lr", e.lr}});
  }
  j["epochs"] = std::move(epochs);
  j["calibration"] = to_json(calibration);
  return j;
}

ordered_json to_json(const EvalReport& r) {
  return {{"fpr_at_95tpr", 100.0 * r.fpr_at_95tpr},
          {"auroc", 100.0 * r.auroc},
          {"aupr_in", 100.0 * r.aupr_in},
          {"detection_error", 100.0 * r.detection_error},
          {"id_count", r.id_count},
          {"ood_count", r.ood_count}};
}

ordered_json to_json(const AffineReport& r) {
  ordered_json table = ordered_json::array();
  for (const auto& row : r.norm_bias) {
    ordered_json jr{{"norm", row.norm}, {"mean_l2", row.mean_l2}};
    jr["mean_nl2"] = row.mean_nl2 ? ordered_json(*row.mean_nl2) : ordered_json(nullptr);
    table.push_back(std::move(jr));
  }
  return {{"samples", r.samples},
          {"max_equality_residual", r.max_equality_residual},
          {"bound_violations", r.bound_violations},
          {"max_bound_ratio", r.max_bound_ratio},
          {"norm_bias_table", std::move(table)}};
}

}  // namespace olsr
