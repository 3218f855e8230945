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

// olsr command-line front end. Talks to the detector only through olsr.h.

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "olsr/olsr.h"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitConfig = 2,
  kExitIo = 3,
  kExitNumeric = 4,
  kExitDimension = 5,
  kExitFormat = 6,
  kExitCalibration = 7,
  kExitScoring = 8,
  kExitEvaluation = 9,
  kExitUnsupported = 10,
};

struct CliError : std::runtime_error {
  CliError(int c, const std::string& msg) : std::runtime_error(msg), code(c) {}
  int code;
};

[[noreturn]] void die(int code, const std::string& msg) { throw CliError(code, msg); }

int exit_code_for(olsr_status s) {
  switch (s) {
    case OLSR_OK: return kExitOk;
    case OLSR_ERR_CONFIG:
    case OLSR_ERR_PARAMETER:
    case OLSR_ERR_INVALID_ARGUMENT: return kExitConfig;
    case OLSR_ERR_IO: return kExitIo;
    case OLSR_ERR_NUMERIC: return kExitNumeric;
    case OLSR_ERR_SHAPE:
    case OLSR_ERR_DIMENSION: return kExitDimension;
    case OLSR_ERR_FORMAT: return kExitFormat;
    case OLSR_ERR_CALIBRATION: return kExitCalibration;
    case OLSR_ERR_SCORING: return kExitScoring;
    case OLSR_ERR_EVALUATION: return kExitEvaluation;
    case OLSR_ERR_UNSUPPORTED: return kExitUnsupported;
    default: return kExitInternal;
  }
}

void check(olsr_status s, const std::string& what) {
  if (s != OLSR_OK) die(exit_code_for(s), what + ": " + olsr_last_error());
}

// ---- logging (OLSR_LOG = quiet | info | debug) ----

enum class Level { kQuiet = 0, kInfo = 1, kDebug = 2 };

Level log_level() {
  static const Level level = [] {
    const char* env = std::getenv("OLSR_LOG");
    if (env == nullptr) return Level::kInfo;
    const std::string v = env;
    if (v == "quiet" || v == "0") return Level::kQuiet;
    if (v == "debug" || v == "2") return Level::kDebug;
    return Level::kInfo;
  }();
  return level;
}

void log(Level at, const std::string& msg) {
  if (static_cast<int>(log_level()) >= static_cast<int>(at)) std::cerr << "[olsr] " << msg << "\n";
}

// ---- handles ----

struct FeaturesFree {
  void operator()(olsr_features* p) const { olsr_features_free(p); }
};
struct ModelFree {
  void operator()(olsr_model* p) const { olsr_model_free(p); }
};
struct StringFree {
  void operator()(char* p) const { olsr_string_free(p); }
};
using Features = std::unique_ptr<olsr_features, FeaturesFree>;
using Model = std::unique_ptr<olsr_model, ModelFree>;
using OwnedString = std::unique_ptr<char, StringFree>;

// ---- files ----

void require_input(const std::string& path, const char* what) {
  std::error_code ec;
  if (path.empty()) die(kExitConfig, std::string("missing ") + what + " path");
  if (!fs::is_regular_file(path, ec)) die(kExitIo, std::string(what) + " not found: " + path);
}

void require_output(const std::string& path, const char* what) {
  if (path.empty() || path == "-") return;
  const fs::path parent = fs::path(path).parent_path();
  std::error_code ec;
  if (!parent.empty() && !fs::is_directory(parent, ec))
    die(kExitIo, std::string(what) + " directory does not exist: " + parent.string());
}

// "-" or empty writes to stdout. Files are replaced atomically.
void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) die(kExitIo, "cannot open " + tmp + " for writing");
    out << text;
    out.flush();
    if (!out) die(kExitIo, "write failed: " + tmp);
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    die(kExitIo, "cannot rename onto " + path);
  }
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) die(kExitIo, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Features load_features(const std::string& path, const char* what) {
  require_input(path, what);
  olsr_features* f = nullptr;
  const bool csv = fs::path(path).extension() == ".csv";
  check(csv ? olsr_features_read_csv(path.c_str(), 0, &f) : olsr_features_read(path.c_str(), &f),
        std::string("reading ") + what);
  log(Level::kDebug, std::string(what) + ": " + std::to_string(olsr_features_count(f)) + " x " +
                         std::to_string(olsr_features_dim(f)));
  return Features(f);
}

Model load_model(const std::string& path) {
  require_input(path, "model file");
  olsr_model* m = nullptr;
  check(olsr_model_load(path.c_str(), &m), "loading model");
  return Model(m);
}

std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string fmt_fixed1(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.1f", x);
  return buf;
}

std::vector<double> parse_double_list(const std::string& s, const char* what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(item.c_str(), &end);
    if (item.empty() || *end != '\0' || errno != 0)
      die(kExitConfig, std::string("bad number in ") + what + ": '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) die(kExitConfig, std::string(what) + " is empty");
  return out;
}

// ---- enum names ----

olsr_framework parse_framework(const std::string& s) {
  if (s == "layerwise") return OLSR_FRAMEWORK_LAYERWISE;
  if (s == "basic") return OLSR_FRAMEWORK_BASIC;
  die(kExitConfig, "unknown score framework '" + s + "' (layerwise|basic)");
}
const char* framework_name(olsr_framework f) { return f == OLSR_FRAMEWORK_BASIC ? "basic" : "layerwise"; }

olsr_distance parse_distance(const std::string& s) {
  if (s == "nl2") return OLSR_DISTANCE_NL2;
  if (s == "l2") return OLSR_DISTANCE_L2;
  die(kExitConfig, "unknown distance '" + s + "' (nl2|l2)");
}
const char* distance_name(olsr_distance d) { return d == OLSR_DISTANCE_L2 ? "l2" : "nl2"; }

olsr_loss parse_loss(const std::string& s) {
  if (s == "norm") return OLSR_LOSS_NORM;
  if (s == "squared") return OLSR_LOSS_SQUARED;
  die(kExitConfig, "unknown loss '" + s + "' (norm|squared)");
}
const char* loss_name(olsr_loss l) { return l == OLSR_LOSS_SQUARED ? "squared" : "norm"; }

olsr_ood_kind parse_ood_kind(const std::string& s) {
  if (s == "shifted") return OLSR_OOD_SHIFTED;
  if (s == "scaled-norm") return OLSR_OOD_SCALED_NORM;
  if (s == "uniform") return OLSR_OOD_UNIFORM;
  die(kExitConfig, "unknown ood kind '" + s + "' (shifted|scaled-norm|uniform)");
}
const char* ood_kind_name(olsr_ood_kind k) {
  switch (k) {
    case OLSR_OOD_SHIFTED: return "shifted";
    case OLSR_OOD_UNIFORM: return "uniform";
    default: return "scaled-norm";
  }
}

bool parse_on_off(const std::string& s) {
  if (s == "on") return true;
  if (s == "off") return false;
  die(kExitConfig, "expected on|off, got '" + s + "'");
}

// ---- config file ----
//
// {
//   "synth": {classes, dim, mean_scale, within_sigma, ood_kind, ood_norm_multiplier, shift, seed},
//   "train": {lambda, temperature, lr, batch, epochs, seed, hidden, loss, epsilon_k,
//             val_fraction, framework, distance, detach_l2_target, target_tpr},
//   "score": {epsilon},
//   "sweep": {lambdas}
// }

struct RunConfig {
  olsr_synth_spec synth{};
  olsr_train_config train{};
  bool epsilon = true;
  std::vector<double> lambdas{0.1, 1.0, 10.0};

  RunConfig() {
    olsr_synth_spec_default(&synth);
    olsr_train_config_default(&train);
  }
};

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) die(kExitConfig, where + ": expected an object");
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (const char* k : allowed) ok = ok || item.key() == k;
    if (!ok) die(kExitConfig, where + ": unknown key '" + item.key() + "'");
  }
}

template <typename T>
T take(const json& obj, const char* key, const std::string& where) {
  const json& v = obj.at(key);
  try {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw std::invalid_argument("");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw std::invalid_argument("");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_unsigned() && !(v.is_number_integer() && v.template get<long long>() >= 0))
        throw std::invalid_argument("");
    } else {
      if (!v.is_number()) throw std::invalid_argument("");
    }
    return v.template get<T>();
  } catch (const std::exception&) {
    die(kExitConfig, where + "." + key + ": wrong type");
  }
}

void apply_config_file(const std::string& path, RunConfig& rc) {
  if (path.empty()) return;
  require_input(path, "config file");
  json root;
  try {
    root = json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    die(kExitConfig, "config " + path + ": " + e.what());
  }
  reject_unknown(root, {"synth", "train", "score", "sweep"}, "config");
  if (root.contains("synth")) {
    const json& s = root["synth"];
    reject_unknown(s, {"classes", "dim", "mean_scale", "within_sigma", "ood_kind", "ood_norm_multiplier",
                       "shift", "seed"},
                   "synth");
    auto& o = rc.synth;
    if (s.contains("classes")) o.classes = take<uint32_t>(s, "classes", "synth");
    if (s.contains("dim")) o.dim = take<uint32_t>(s, "dim", "synth");
    if (s.contains("mean_scale")) o.mean_scale = take<double>(s, "mean_scale", "synth");
    if (s.contains("within_sigma")) o.within_sigma = take<double>(s, "within_sigma", "synth");
    if (s.contains("ood_kind")) o.ood_kind = parse_ood_kind(take<std::string>(s, "ood_kind", "synth"));
    if (s.contains("ood_norm_multiplier"))
      o.ood_norm_multiplier = take<double>(s, "ood_norm_multiplier", "synth");
    if (s.contains("shift")) o.shift = take<double>(s, "shift", "synth");
    if (s.contains("seed")) o.seed = take<uint64_t>(s, "seed", "synth");
  }
  if (root.contains("train")) {
    const json& t = root["train"];
    reject_unknown(t, {"lambda", "temperature", "lr", "batch", "epochs", "seed", "hidden", "loss", "epsilon_k",
                       "val_fraction", "framework", "distance", "detach_l2_target", "target_tpr"},
                   "train");
    auto& o = rc.train;
    if (t.contains("lambda")) o.lambda = take<double>(t, "lambda", "train");
    if (t.contains("temperature")) o.temperature = take<double>(t, "temperature", "train");
    if (t.contains("lr")) o.lr = take<double>(t, "lr", "train");
    if (t.contains("batch")) o.batch = take<uint64_t>(t, "batch", "train");
    if (t.contains("epochs")) o.epochs = take<uint64_t>(t, "epochs", "train");
    if (t.contains("seed")) o.seed = take<uint64_t>(t, "seed", "train");
    if (t.contains("hidden")) o.hidden = take<uint64_t>(t, "hidden", "train");
    if (t.contains("loss")) o.loss = parse_loss(take<std::string>(t, "loss", "train"));
    if (t.contains("epsilon_k")) {
      const json& k = t["epsilon_k"];
      if (k.is_number()) {
        o.epsilon_k[0] = o.epsilon_k[1] = o.epsilon_k[2] = k.get<double>();
      } else if (k.is_array() && k.size() == 3 && k[0].is_number() && k[1].is_number() && k[2].is_number()) {
        for (int i = 0; i < 3; ++i) o.epsilon_k[i] = k[i].get<double>();
      } else {
        die(kExitConfig, "train.epsilon_k: expected a number or an array of 3 numbers");
      }
    }
    if (t.contains("val_fraction")) o.val_fraction = take<double>(t, "val_fraction", "train");
    if (t.contains("framework")) o.framework = parse_framework(take<std::string>(t, "framework", "train"));
    if (t.contains("distance")) o.distance = parse_distance(take<std::string>(t, "distance", "train"));
    if (t.contains("detach_l2_target"))
      o.detach_l2_target = take<bool>(t, "detach_l2_target", "train") ? 1 : 0;
    if (t.contains("target_tpr")) o.target_tpr = take<double>(t, "target_tpr", "train");
  }
  if (root.contains("score")) {
    const json& s = root["score"];
    reject_unknown(s, {"epsilon"}, "score");
    if (s.contains("epsilon")) {
      const json& e = s["epsilon"];
      if (e.is_boolean()) rc.epsilon = e.get<bool>();
      else if (e.is_string()) rc.epsilon = parse_on_off(e.get<std::string>());
      else die(kExitConfig, "score.epsilon: expected on|off or a boolean");
    }
  }
  if (root.contains("sweep")) {
    const json& s = root["sweep"];
    reject_unknown(s, {"lambdas"}, "sweep");
    if (s.contains("lambdas")) {
      const json& l = s["lambdas"];
      if (!l.is_array() || l.empty()) die(kExitConfig, "sweep.lambdas: expected a non-empty array");
      rc.lambdas.clear();
      for (const auto& x : l) {
        if (!x.is_number()) die(kExitConfig, "sweep.lambdas: expected numbers");
        rc.lambdas.push_back(x.get<double>());
      }
    }
  }
}

json synth_json(const olsr_synth_spec& s) {
  return {{"classes", s.classes},
          {"dim", s.dim},
          {"mean_scale", s.mean_scale},
          {"within_sigma", s.within_sigma},
          {"ood_kind", ood_kind_name(s.ood_kind)},
          {"ood_norm_multiplier", s.ood_norm_multiplier},
          {"shift", s.shift},
          {"seed", s.seed}};
}

json train_json(const olsr_train_config& c) {
  return {{"lambda", c.lambda},
          {"temperature", c.temperature},
          {"lr", c.lr},
          {"batch", c.batch},
          {"epochs", c.epochs},
          {"seed", c.seed},
          {"hidden", c.hidden},
          {"loss", loss_name(c.loss)},
          {"epsilon_k", {c.epsilon_k[0], c.epsilon_k[1], c.epsilon_k[2]}},
          {"val_fraction", c.val_fraction},
          {"framework", framework_name(c.framework)},
          {"distance", distance_name(c.distance)},
          {"detach_l2_target", c.detach_l2_target != 0},
          {"target_tpr", c.target_tpr}};
}

// ---- flag overrides ----

struct SynthFlags {
  uint32_t classes = 0, dim = 0;
  double mean_scale = 0, within_sigma = 0, multiplier = 0, shift = 0;
  std::string ood_kind;
  uint64_t seed = 0;
  std::vector<CLI::Option*> opts;

  void add(CLI::App* app) {
    opts = {app->add_option("--classes", classes, "number of classes C"),
            app->add_option("--dim", dim, "feature width H"),
            app->add_option("--mean-scale", mean_scale, "norm of the class means"),
            app->add_option("--within-sigma", within_sigma, "within-class standard deviation"),
            app->add_option("--ood-kind", ood_kind, "shifted | scaled-norm | uniform"),
            app->add_option("--ood-multiplier", multiplier, "norm multiplier for scaled-norm"),
            app->add_option("--shift", shift, "interpolation toward the held-out means for shifted"),
            app->add_option("--synth-seed", seed, "seed for the synthetic generator")};
  }
  void apply(olsr_synth_spec& s) const {
    if (opts[0]->count()) s.classes = classes;
    if (opts[1]->count()) s.dim = dim;
    if (opts[2]->count()) s.mean_scale = mean_scale;
    if (opts[3]->count()) s.within_sigma = within_sigma;
    if (opts[4]->count()) s.ood_kind = parse_ood_kind(ood_kind);
    if (opts[5]->count()) s.ood_norm_multiplier = multiplier;
    if (opts[6]->count()) s.shift = shift;
    if (opts[7]->count()) s.seed = seed;
  }
};

struct TrainFlags {
  double lambda = 0, temperature = 0, lr = 0, val_fraction = 0, target_tpr = 0;
  uint64_t batch = 0, epochs = 0, seed = 0, hidden = 0;
  std::string loss, framework, distance, epsilon_k;
  bool detach = false;
  std::vector<CLI::Option*> opts;

  void add(CLI::App* app, bool with_lambda = true) {
    opts = {with_lambda ? app->add_option("--lambda", lambda, "weight of the classification regulariser")
                        : nullptr,
            app->add_option("--temperature", temperature, "softmax temperature T"),
            app->add_option("--lr", lr, "initial Adam learning rate"),
            app->add_option("--batch", batch, "mini-batch size"),
            app->add_option("--epochs", epochs, "training epochs"),
            app->add_option("--seed", seed, "training seed"),
            app->add_option("--hidden", hidden, "decoder hidden width (0 = max(H, 4C))"),
            app->add_option("--loss", loss, "norm | squared"),
            app->add_option("--epsilon-k", epsilon_k, "epsilon multiplier k, one value or k0,k1,k2"),
            app->add_option("--val-fraction", val_fraction, "held-out calibration fraction"),
            app->add_option("--framework,--score", framework, "layerwise | basic"),
            app->add_option("--distance", distance, "nl2 | l2"),
            app->add_flag("--detach-l2-target", detach, "stop the D2 loss gradient at Wv/T"),
            app->add_option("--target-tpr", target_tpr, "validation TPR for the threshold")};
  }
  void apply(olsr_train_config& c) const {
    if (opts[0] && opts[0]->count()) c.lambda = lambda;
    if (opts[1]->count()) c.temperature = temperature;
    if (opts[2]->count()) c.lr = lr;
    if (opts[3]->count()) c.batch = batch;
    if (opts[4]->count()) c.epochs = epochs;
    if (opts[5]->count()) c.seed = seed;
    if (opts[6]->count()) c.hidden = hidden;
    if (opts[7]->count()) c.loss = parse_loss(loss);
    if (opts[8]->count()) {
      const auto k = parse_double_list(epsilon_k, "--epsilon-k");
      if (k.size() == 1) {
        c.epsilon_k[0] = c.epsilon_k[1] = c.epsilon_k[2] = k[0];
      } else if (k.size() == 3) {
        for (int i = 0; i < 3; ++i) c.epsilon_k[i] = k[i];
      } else {
        die(kExitConfig, "--epsilon-k takes one or three values");
      }
    }
    if (opts[9]->count()) c.val_fraction = val_fraction;
    if (opts[10]->count()) c.framework = parse_framework(framework);
    if (opts[11]->count()) c.distance = parse_distance(distance);
    if (opts[12]->count()) c.detach_l2_target = detach ? 1 : 0;
    if (opts[13]->count()) c.target_tpr = target_tpr;
  }
};

struct EpsilonFlag {
  std::string value;
  CLI::Option* opt = nullptr;
  void add(CLI::App* app) {
    opt = app->add_option("--epsilon", value, "on | off: include the epsilon widening in the score");
    app->add_flag_callback("--no-epsilon", [this] { value = "off"; }, "same as --epsilon off");
  }
  void apply(RunConfig& rc) const {
    if (!value.empty()) rc.epsilon = parse_on_off(value);
  }
};

// ---- scoring helpers ----

std::vector<olsr_score_row> score_all(const olsr_model* model, const olsr_features* set, bool epsilon) {
  const uint64_t n = olsr_features_count(set);
  if (olsr_features_dim(set) != olsr_model_dim(model))
    die(kExitDimension, "feature width " + std::to_string(olsr_features_dim(set)) +
                            " does not match model width " + std::to_string(olsr_model_dim(model)));
  std::vector<olsr_score_row> rows(n);
  check(olsr_score(model, set, epsilon ? 1 : 0, rows.data(), rows.size()), "scoring");
  return rows;
}

std::vector<double> scores_of(const std::vector<olsr_score_row>& rows) {
  std::vector<double> s;
  s.reserve(rows.size());
  for (const auto& r : rows) s.push_back(r.score);
  return s;
}

olsr_eval_report evaluate(const std::vector<double>& id, const std::vector<double>& ood) {
  olsr_eval_report r{};
  check(olsr_evaluate(id.data(), id.size(), ood.data(), ood.size(), &r), "evaluating");
  return r;
}

json report_json(const olsr_eval_report& r) {
  return {{"fpr_at_95tpr", 100.0 * r.fpr_at_95tpr},
          {"auroc", 100.0 * r.auroc},
          {"aupr_in", 100.0 * r.aupr_in},
          {"detection_error", 100.0 * r.detection_error},
          {"id_count", r.id_count},
          {"ood_count", r.ood_count}};
}

std::string metrics_table(const olsr_eval_report& r) {
  std::ostringstream ss;
  ss << "FPR@95TPR  AUROC  AUPR-In  DetErr\n";
  char line[96];
  std::snprintf(line, sizeof line, "%9s  %5s  %7s  %6s\n", fmt_fixed1(100.0 * r.fpr_at_95tpr).c_str(),
                fmt_fixed1(100.0 * r.auroc).c_str(), fmt_fixed1(100.0 * r.aupr_in).c_str(),
                fmt_fixed1(100.0 * r.detection_error).c_str());
  ss << line;
  return ss.str();
}

// Reads the "score" column from a CSV with a header, or one number per line, or
// the JSON written by `olsr score`.
std::vector<double> read_scores(const std::string& path) {
  require_input(path, "score file");
  const std::string text = read_text(path);
  std::vector<double> out;
  if (fs::path(path).extension() == ".json") {
    json j;
    try {
      j = json::parse(text);
      for (const auto& row : j.at("rows")) out.push_back(row.at("score").get<double>());
    } catch (const json::exception& e) {
      die(kExitFormat, "score file " + path + ": " + e.what());
    }
    return out;
  }
  std::istringstream in(text);
  std::string line;
  long column = -1;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) cells.push_back(cell);
    if (line_no == 1) {
      for (std::size_t i = 0; i < cells.size(); ++i)
        if (cells[i] == "score") column = static_cast<long>(i);
      if (column >= 0) continue;
      if (cells.size() != 1) die(kExitFormat, path + ": no 'score' column");
      column = 0;
    }
    if (static_cast<std::size_t>(column) >= cells.size())
      die(kExitFormat, path + ":" + std::to_string(line_no) + ": missing score column");
    const std::string& cell = cells[static_cast<std::size_t>(column)];
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (cell.empty() || *end != '\0')
      die(kExitFormat, path + ":" + std::to_string(line_no) + ": not a number: '" + cell + "'");
    out.push_back(v);
  }
  return out;
}

std::vector<uint64_t> histogram(const std::vector<double>& s, std::size_t bins) {
  std::vector<uint64_t> counts(bins);
  check(olsr_histogram(s.data(), s.size(), bins, counts.data()), "histogram");
  return counts;
}

// ---- subcommands ----

struct Common {
  std::string config_path;
};

int cmd_synth(const Common& common, const SynthFlags& flags, const std::string& kind, uint64_t n,
              uint64_t stream, const std::string& out) {
  RunConfig rc;
  apply_config_file(common.config_path, rc);
  flags.apply(rc.synth);
  if (out.empty()) die(kExitConfig, "--out is required");
  require_output(out, "output");
  olsr_features* f = nullptr;
  if (kind == "id") {
    check(olsr_synth_id(&rc.synth, n, stream, &f), "synth");
  } else if (kind == "ood") {
    check(olsr_synth_ood(&rc.synth, n, stream, &f), "synth");
  } else {
    die(kExitConfig, "--kind must be id or ood");
  }
  Features set(f);
  log(Level::kDebug, "synth config " + synth_json(rc.synth).dump());
  check(olsr_features_write(set.get(), out.c_str()), "writing " + out);
  log(Level::kInfo, "wrote " + std::to_string(n) + " " + kind + " samples (" + ood_kind_name(rc.synth.ood_kind) +
                        ") to " + out);
  return kExitOk;
}

int cmd_train(const Common& common, const TrainFlags& flags, const std::string& features_path,
              const std::string& val_path, const std::string& model_path, std::string log_path) {
  RunConfig rc;
  apply_config_file(common.config_path, rc);
  flags.apply(rc.train);
  if (model_path.empty()) die(kExitConfig, "--model is required");
  if (log_path.empty()) log_path = model_path + ".log.json";
  require_input(features_path, "feature file");
  if (!val_path.empty()) require_input(val_path, "validation file");
  require_output(model_path, "model");
  require_output(log_path, "log");

  Features train = load_features(features_path, "feature file");
  Features val = val_path.empty() ? Features() : load_features(val_path, "validation file");
  log(Level::kInfo, "training " + std::string(framework_name(rc.train.framework)) + " detector on " +
                        std::to_string(olsr_features_count(train.get())) + " samples, lambda " +
                        fmt_double(rc.train.lambda) + ", " + std::to_string(rc.train.epochs) + " epochs");
  olsr_model* m = nullptr;
  char* log_raw = nullptr;
  check(olsr_train(train.get(), val.get(), &rc.train, nullptr, &m, &log_raw), "training");
  Model model(m);
  OwnedString log_text(log_raw);

  json log_json = json::parse(log_text.get());
  json inputs = {{"features", features_path}, {"model", model_path}};
  if (!val_path.empty()) inputs["validation"] = val_path;
  log_json["inputs"] = std::move(inputs);
  if (rc.train.lambda == 0.0) log(Level::kInfo, "regularizer disabled (lambda = 0)");

  check(olsr_model_save(model.get(), model_path.c_str()), "writing model");
  write_text(log_path, log_json.dump(2) + "\n");
  const json& cal = log_json["calibration"];
  log(Level::kInfo, "model written to " + model_path + ", threshold " + fmt_double(cal["threshold"].get<double>()));
  return kExitOk;
}

int cmd_score(const Common& common, const EpsilonFlag& eps, const std::string& model_path,
              const std::string& features_path, const std::string& out, std::string format) {
  RunConfig rc;
  apply_config_file(common.config_path, rc);
  eps.apply(rc);
  require_input(model_path, "model file");
  require_input(features_path, "feature file");
  require_output(out, "output");
  if (format.empty()) format = fs::path(out).extension() == ".json" ? "json" : "csv";
  if (format != "csv" && format != "json") die(kExitConfig, "--format must be csv or json");

  Model model = load_model(model_path);
  Features set = load_features(features_path, "feature file");
  const auto rows = score_all(model.get(), set.get(), rc.epsilon);
  const int32_t* labels = olsr_features_labels(set.get());

  std::string text;
  std::size_t flagged = 0, ood = 0;
  for (const auto& r : rows) {
    flagged += r.flagged != 0;
    ood += r.is_ood != 0;
  }
  if (format == "csv") {
    std::ostringstream ss;
    ss << "index,label,predicted,conf,r1,r2,phi0,psi1,psi2,score,flagged,decision\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& r = rows[i];
      ss << i << ',' << labels[i] << ',' << r.predicted << ',' << fmt_double(r.conf) << ',' << fmt_double(r.r1)
         << ',' << fmt_double(r.r2) << ',' << fmt_double(r.phi0) << ',' << fmt_double(r.psi1) << ','
         << fmt_double(r.psi2) << ',' << fmt_double(r.score) << ',' << r.flagged << ','
         << (r.is_ood ? "ood" : "id") << '\n';
    }
    text = ss.str();
  } else {
    json j;
    j["config"] = {{"model", model_path}, {"features", features_path}, {"epsilon", rc.epsilon ? "on" : "off"}};
    json arr = json::array();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& r = rows[i];
      arr.push_back({{"index", i},
                     {"label", labels[i]},
                     {"predicted", r.predicted},
                     {"conf", r.conf},
                     {"r1", r.r1},
                     {"r2", r.r2},
                     {"phi0", r.phi0},
                     {"psi1", r.psi1},
                     {"psi2", r.psi2},
                     {"score", r.score},
                     {"flagged", r.flagged != 0},
                     {"decision", r.is_ood ? "ood" : "id"}});
    }
    j["rows"] = std::move(arr);
    text = j.dump(2) + "\n";
  }
  write_text(out, text);
  log(Level::kInfo, "scored " + std::to_string(rows.size()) + " samples, " + std::to_string(ood) +
                        " below threshold, " + std::to_string(flagged) + " flagged degenerate");
  return kExitOk;
}

int cmd_eval(const std::string& id_path, const std::string& ood_path, const std::string& out, std::size_t bins) {
  require_input(id_path, "ID score file");
  require_input(ood_path, "OoD score file");
  require_output(out, "report");
  if (bins == 0) die(kExitConfig, "--bins must be positive");
  const auto id = read_scores(id_path);
  const auto ood = read_scores(ood_path);
  const auto r = evaluate(id, ood);
  json j;
  j["config"] = {{"id_scores", id_path}, {"ood_scores", ood_path}, {"bins", bins}};
  j["metrics"] = report_json(r);
  j["display"] = {{"fpr_at_95tpr", fmt_fixed1(100.0 * r.fpr_at_95tpr)},
                  {"auroc", fmt_fixed1(100.0 * r.auroc)},
                  {"aupr_in", fmt_fixed1(100.0 * r.aupr_in)},
                  {"detection_error", fmt_fixed1(100.0 * r.detection_error)}};
  j["histogram"] = {{"bins", bins}, {"range", {0.0, 1.0}}, {"id", histogram(id, bins)}, {"ood", histogram(ood, bins)}};
  if (out.empty() || out == "-") {
    write_text("-", j.dump(2) + "\n");
  } else {
    write_text(out, j.dump(2) + "\n");
    std::cout << metrics_table(r);
  }
  return kExitOk;
}

int cmd_sweep(const Common& common, const TrainFlags& flags, const EpsilonFlag& eps, const std::string& lambdas,
              const std::string& features_path, const std::string& val_path, const std::string& id_path,
              const std::string& ood_path, const std::string& out) {
  RunConfig rc;
  apply_config_file(common.config_path, rc);
  flags.apply(rc.train);
  eps.apply(rc);
  if (!lambdas.empty()) rc.lambdas = parse_double_list(lambdas, "--lambdas");
  require_input(features_path, "feature file");
  if (!val_path.empty()) require_input(val_path, "validation file");
  require_input(id_path, "ID test file");
  require_input(ood_path, "OoD test file");
  require_output(out, "report");

  Features train = load_features(features_path, "feature file");
  Features val = val_path.empty() ? Features() : load_features(val_path, "validation file");
  Features id_set = load_features(id_path, "ID test file");
  Features ood_set = load_features(ood_path, "OoD test file");

  const olsr_framework frameworks[2] = {OLSR_FRAMEWORK_LAYERWISE, OLSR_FRAMEWORK_BASIC};
  json rows = json::array();
  double lo[2] = {0, 0}, hi[2] = {0, 0};
  for (int f = 0; f < 2; ++f) {
    json cells = json::array();
    json auroc = json::array();
    for (std::size_t li = 0; li < rc.lambdas.size(); ++li) {
      olsr_train_config cfg = rc.train;
      cfg.framework = frameworks[f];
      cfg.lambda = rc.lambdas[li];
      log(Level::kInfo, std::string("sweep: ") + framework_name(cfg.framework) + " lambda " + fmt_double(cfg.lambda));
      olsr_model* m = nullptr;
      check(olsr_train(train.get(), val.get(), &cfg, nullptr, &m, nullptr), "training");
      Model model(m);
      const auto r = evaluate(scores_of(score_all(model.get(), id_set.get(), rc.epsilon)),
                              scores_of(score_all(model.get(), ood_set.get(), rc.epsilon)));
      cells.push_back(report_json(r));
      auroc.push_back(100.0 * r.auroc);
      lo[f] = li == 0 ? r.auroc : std::min(lo[f], r.auroc);
      hi[f] = li == 0 ? r.auroc : std::max(hi[f], r.auroc);
    }
    rows.push_back({{"framework", framework_name(frameworks[f])},
                    {"auroc", auroc},
                    {"auroc_range", 100.0 * (hi[f] - lo[f])},
                    {"metrics", cells}});
  }
  json j;
  j["config"] = {{"train", train_json(rc.train)},
                 {"score", {{"epsilon", rc.epsilon ? "on" : "off"}}},
                 {"sweep", {{"lambdas", rc.lambdas}}},
                 {"inputs", {{"features", features_path}, {"id_test", id_path}, {"ood_test", ood_path}}}};
  if (!val_path.empty()) j["config"]["inputs"]["validation"] = val_path;
  j["lambdas"] = rc.lambdas;
  j["rows"] = rows;
  // Statistical check: reported, never an error.
  j["layerwise_range_le_basic_range"] = hi[0] - lo[0] <= hi[1] - lo[1];

  std::ostringstream table;
  table << "lambda     ";
  for (double l : rc.lambdas) {
    char cell[32];
    std::snprintf(cell, sizeof cell, "%8g", l);
    table << cell;
  }
  table << "   range\n";
  for (const auto& row : rows) {
    char head[32];
    std::snprintf(head, sizeof head, "%-11s", row["framework"].get<std::string>().c_str());
    table << head;
    for (const auto& a : row["auroc"]) {
      char cell[32];
      std::snprintf(cell, sizeof cell, "%8s", fmt_fixed1(a.get<double>()).c_str());
      table << cell;
    }
    char range[32];
    std::snprintf(range, sizeof range, "%8s", fmt_fixed1(row["auroc_range"].get<double>()).c_str());
    table << range << "\n";
  }
  if (out.empty() || out == "-") {
    write_text("-", j.dump(2) + "\n");
  } else {
    write_text(out, j.dump(2) + "\n");
    std::cout << table.str();
  }
  return kExitOk;
}

int cmd_verify_affine(const std::string& model_path, const std::string& features_path, const std::string& grid,
                      const std::string& widths, uint64_t samples, uint64_t seed, bool frobenius,
                      const std::string& out) {
  require_output(out, "report");
  char* raw = nullptr;
  json config;
  if (!model_path.empty()) {
    require_input(model_path, "model file");
    require_input(features_path, "feature file");
    Model model = load_model(model_path);
    Features set = load_features(features_path, "feature file");
    const auto norms = grid.empty() ? std::vector<double>{0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0}
                                    : parse_double_list(grid, "--norm-grid");
    check(olsr_verify_affine_model(model.get(), set.get(), norms.data(), norms.size(), frobenius ? 1 : 0, &raw),
          "verify-affine");
    config = {{"model", model_path}, {"features", features_path}, {"norm_grid", norms}};
  } else {
    if (widths.empty()) die(kExitConfig, "either --model/--features or --widths is required");
    std::vector<uint32_t> w;
    for (double x : parse_double_list(widths, "--widths")) {
      if (x < 1 || x != static_cast<double>(static_cast<uint32_t>(x)))
        die(kExitConfig, "--widths must be positive integers");
      w.push_back(static_cast<uint32_t>(x));
    }
    check(olsr_verify_affine_random(w.data(), w.size(), seed, samples, frobenius ? 1 : 0, &raw), "verify-affine");
    config = {{"widths", w}, {"samples", samples}, {"seed", seed}};
  }
  OwnedString text(raw);
  json j;
  j["config"] = std::move(config);
  j["report"] = json::parse(text.get());
  write_text(out, j.dump(2) + "\n");
  const auto& r = j["report"];
  log(Level::kInfo, "affine check over " + std::to_string(r["samples"].get<uint64_t>()) +
                        " inputs: max residual " + fmt_double(r["max_equality_residual"].get<double>()) + ", " +
                        std::to_string(r["bound_violations"].get<uint64_t>()) + " bound violations");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"olsr: layerwise semantic reconstruction OoD detector"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(olsr_version()));
  Common common;
  const auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "JSON config file (flags override it)");
  };

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic ID or OoD feature file");
  SynthFlags synth_flags;
  std::string synth_kind = "id", synth_out;
  uint64_t synth_n = 1000, synth_stream = 0;
  add_config(synth);
  synth_flags.add(synth);
  synth->add_option("--kind", synth_kind, "id | ood");
  synth->add_option("-n,--count", synth_n, "number of samples");
  synth->add_option("--stream", synth_stream, "sample stream (use distinct streams for train/test)");
  synth->add_option("-o,--out", synth_out, "output AVF1 file")->required();

  // train
  auto* train = app.add_subcommand("train", "train and calibrate a detector");
  TrainFlags train_flags;
  std::string train_features, train_val, train_model, train_log;
  add_config(train);
  train_flags.add(train);
  train->add_option("-f,--features", train_features, "training features (AVF1 or CSV)")->required();
  train->add_option("--val", train_val, "calibration features (default: stratified split of --features)");
  train->add_option("-m,--model", train_model, "output model file")->required();
  train->add_option("--log", train_log, "training log JSON (default: <model>.log.json)");

  // score
  auto* score = app.add_subcommand("score", "score a feature file");
  EpsilonFlag score_eps;
  std::string score_model, score_features, score_out = "-", score_format;
  add_config(score);
  score_eps.add(score);
  score->add_option("-m,--model", score_model, "model file")->required();
  score->add_option("-f,--features", score_features, "features (AVF1 or CSV)")->required();
  score->add_option("-o,--out", score_out, "output file, '-' for stdout");
  score->add_option("--format", score_format, "csv | json (default from the output extension)");

  // eval
  auto* eval = app.add_subcommand("eval", "detection metrics from two score files");
  std::string eval_id, eval_ood, eval_out = "-";
  std::size_t eval_bins = 64;
  eval->add_option("--id", eval_id, "scores of in-distribution samples")->required();
  eval->add_option("--ood", eval_ood, "scores of out-of-distribution samples")->required();
  eval->add_option("-o,--out", eval_out, "report JSON, '-' for stdout");
  eval->add_option("--bins", eval_bins, "histogram bins over [0, 1]");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "AUROC over a list of lambda values for both frameworks");
  TrainFlags sweep_flags;
  EpsilonFlag sweep_eps;
  std::string sweep_lambdas, sweep_features, sweep_val, sweep_id, sweep_ood, sweep_out = "-";
  add_config(sweep);
  sweep_flags.add(sweep, false);
  sweep_eps.add(sweep);
  sweep->add_option("--lambdas", sweep_lambdas, "comma-separated lambda values");
  sweep->add_option("-f,--features", sweep_features, "training features")->required();
  sweep->add_option("--val", sweep_val, "calibration features");
  sweep->add_option("--id-test", sweep_id, "in-distribution test features")->required();
  sweep->add_option("--ood-test", sweep_ood, "out-of-distribution test features")->required();
  sweep->add_option("-o,--out", sweep_out, "report JSON, '-' for stdout");

  // verify-affine
  auto* verify = app.add_subcommand("verify-affine", "check the piecewise-affine reconstruction identity");
  std::string va_model, va_features, va_grid, va_widths, va_out = "-";
  uint64_t va_samples = 100, va_seed = 0;
  bool va_frobenius = false;
  verify->add_option("-m,--model", va_model, "model whose v -> D1(Wv) path is checked");
  verify->add_option("-f,--features", va_features, "inputs (and norm-bias directions)");
  verify->add_option("--norm-grid", va_grid, "comma-separated norms for the norm-bias table");
  verify->add_option("--widths", va_widths, "random ReLU network widths, e.g. 16,32,16");
  verify->add_option("--samples", va_samples, "random inputs for --widths");
  verify->add_option("--seed", va_seed, "seed for --widths");
  verify->add_flag("--frobenius", va_frobenius, "use the Frobenius norm in the bound");
  verify->add_option("-o,--out", va_out, "report JSON, '-' for stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (synth->parsed()) return cmd_synth(common, synth_flags, synth_kind, synth_n, synth_stream, synth_out);
    if (train->parsed())
      return cmd_train(common, train_flags, train_features, train_val, train_model, train_log);
    if (score->parsed()) return cmd_score(common, score_eps, score_model, score_features, score_out, score_format);
    if (eval->parsed()) return cmd_eval(eval_id, eval_ood, eval_out, eval_bins);
    if (sweep->parsed())
      return cmd_sweep(common, sweep_flags, sweep_eps, sweep_lambdas, sweep_features, sweep_val, sweep_id,
                       sweep_ood, sweep_out);
    if (verify->parsed())
      return cmd_verify_affine(va_model, va_features, va_grid, va_widths, va_samples, va_seed, va_frobenius,
                               va_out);
  } catch (const CliError& e) {
    std::cerr << "olsr: error: " << e.what() << "\n";
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "olsr: internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}
