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

#include "olsr/model_io.hpp"

#include <string>

#include "binary_io.hpp"
#include "olsr/error.hpp"

namespace olsr {
namespace {

void write_layers(detail::ByteWriter& w, const Network& net) {
  for (const auto& layer : net) {
    for (double x : layer.weight.flat()) w.f64(x);
    for (double x : layer.bias) w.f64(x);
  }
}

void read_layers(detail::ByteReader& r, Network& net) {
  for (auto& layer : net) {
    for (double& x : layer.weight.flat()) x = r.f64();
    for (double& x : layer.bias) x = r.f64();
  }
}

}  // namespace

void save_model(const std::filesystem::path& path, const DetectorModel& model,
                const Calibration& calibration) {
  model.validate();
  detail::ByteWriter w;
  w.bytes("OLSR");
  w.u32(kModelFormatVersion);
  w.u32(model.h);
  w.u32(model.c);
  w.f64(model.temperature);
  for (double k : calibration.epsilon_k) w.f64(k);
  w.u32(static_cast<std::uint32_t>(model.framework));
  w.u32(static_cast<std::uint32_t>(calibration.distance));
  w.u32(static_cast<std::uint32_t>(model.d1[0].out()));
  w.u32(static_cast<std::uint32_t>(model.d1[1].out()));
  const bool layerwise = model.framework == Framework::kLayerwise;
  w.u32(layerwise ? static_cast<std::uint32_t>(model.d2[0].out()) : 0);
  w.u32(layerwise ? static_cast<std::uint32_t>(model.d2[1].out()) : 0);
  for (double x : model.encoder.flat()) w.f64(x);
  write_layers(w, model.d1);
  write_layers(w, model.d2);
  for (const auto& g : calibration.fits) {
    w.f64(g.mu);
    w.f64(g.sigma);
    w.f64(g.epsilon);
  }
  w.f64(calibration.target_tpr);
  w.f64(calibration.threshold);
  w.f64(calibration.threshold_no_epsilon);
  detail::write_file_atomic(path, w.buffer());
}

SavedModel load_model(const std::filesystem::path& path, std::optional<std::uint32_t> expected_h) {
  const auto data = detail::read_file(path);
  const std::string name = path.string();
  detail::ByteReader r(data, name);
  if (r.remaining() < 4 || r.bytes(4) != "OLSR") {
    fail(ErrorCode::kFormat, name + ": not a model file (bad magic)");
  }
  const auto version = r.u32();
  if (version != kModelFormatVersion) {
    fail(ErrorCode::kFormat, name + ": unsupported model version " + std::to_string(version));
  }
  SavedModel saved;
  DetectorModel& m = saved.model;
  Calibration& cal = saved.calibration;
  m.h = r.u32();
  m.c = r.u32();
  if (expected_h && *expected_h != m.h) {
    fail(ErrorCode::kDimension, name + ": model was trained on H=" + std::to_string(m.h) +
                                    " features, expected H=" + std::to_string(*expected_h));
  }
  m.temperature = r.f64();
  for (double& k : cal.epsilon_k) k = r.f64();
  const auto framework = r.u32();
  const auto distance = r.u32();
  if (framework > 1 || distance > 1) fail(ErrorCode::kFormat, name + ": bad framework/distance tag");
  m.framework = static_cast<Framework>(framework);
  cal.distance = static_cast<Distance>(distance);
  const std::uint32_t d1a = r.u32(), d1b = r.u32(), d2a = r.u32(), d2b = r.u32();
  if (m.h == 0 || m.c == 0 || d1a == 0 || d1b == 0) fail(ErrorCode::kFormat, name + ": zero dimension");
  const bool layerwise = m.framework == Framework::kLayerwise;
  if (layerwise && (d2a == 0 || d2b == 0)) fail(ErrorCode::kFormat, name + ": zero D2 width");

  // Check the payload length before allocating anything sized by the header.
  auto layer_bytes = [](std::uint64_t in, std::uint64_t out) { return 8 * (in * out + out); };
  std::uint64_t expected = 8ULL * m.c * m.h + layer_bytes(m.c, d1a) + layer_bytes(d1a, d1b) +
                           layer_bytes(d1b, m.h);
  if (layerwise) expected += layer_bytes(m.c, d2a) + layer_bytes(d2a, d2b) + layer_bytes(d2b, m.c);
  expected += 8 * 9 + 8 * 3;
  if (r.remaining() != expected) {
    fail(ErrorCode::kFormat, name + ": size mismatch, header implies " + std::to_string(expected) +
                                 " payload bytes, file has " + std::to_string(r.remaining()));
  }

  m.encoder = DenseMatrix(m.c, m.h);
  for (double& x : m.encoder.flat()) x = r.f64();
  m.d1 = make_decoder(m.c, d1a, m.h);
  m.d1[1] = FcLayer(d1a, d1b, Activation::kRelu);
  m.d1[2] = FcLayer(d1b, m.h, Activation::kNone);
  read_layers(r, m.d1);
  if (layerwise) {
    m.d2 = make_decoder(m.c, d2a, m.c);
    m.d2[1] = FcLayer(d2a, d2b, Activation::kRelu);
    m.d2[2] = FcLayer(d2b, m.c, Activation::kNone);
    read_layers(r, m.d2);
  }
  for (auto& g : cal.fits) {
    g.mu = r.f64();
    g.sigma = r.f64();
    g.epsilon = r.f64();
  }
  cal.target_tpr = r.f64();
  cal.threshold = r.f64();
  cal.threshold_no_epsilon = r.f64();
  m.validate();
  return saved;
}

}  // namespace olsr
