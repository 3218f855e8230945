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

#include "olsr/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>

#include "binary_io.hpp"
#include "olsr/error.hpp"
#include "olsr/rng.hpp"

namespace olsr {

namespace detail {

std::vector<char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path.string());
  std::vector<char> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) fail(ErrorCode::kIo, "read error on " + path.string());
  return data;
}

void write_file_atomic(const std::filesystem::path& path, const std::vector<char>& bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::kIo, "cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
      out.close();
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      fail(ErrorCode::kIo, "write error on " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    fail(ErrorCode::kIo, "cannot rename into " + path.string());
  }
}

}  // namespace detail

Vector FeatureSet::row_as_double(std::size_t i) const {
  auto r = row(i);
  return Vector(r.begin(), r.end());
}

DenseMatrix FeatureSet::to_matrix() const {
  DenseMatrix m(n(), h);
  for (std::size_t k = 0; k < features.size(); ++k) m.flat()[k] = features[k];
  return m;
}

FeatureSet FeatureSet::subset(std::span<const std::size_t> indices) const {
  FeatureSet out;
  out.h = h;
  out.c = c;
  out.features.reserve(indices.size() * h);
  out.labels.reserve(indices.size());
  for (std::size_t i : indices) {
    if (i >= n()) fail(ErrorCode::kShape, "subset index " + std::to_string(i) + " out of range");
    auto r = row(i);
    out.features.insert(out.features.end(), r.begin(), r.end());
    out.labels.push_back(labels[i]);
  }
  return out;
}

void FeatureSet::validate() const {
  if (features.size() != labels.size() * h) {
    fail(ErrorCode::kShape, "feature payload " + std::to_string(features.size()) +
                                " != N*H = " + std::to_string(labels.size() * h));
  }
  for (std::size_t k = 0; k < features.size(); ++k) {
    if (!std::isfinite(features[k])) {
      fail(ErrorCode::kFormat, "non-finite feature at sample " + std::to_string(k / h) +
                                   ", dim " + std::to_string(k % h));
    }
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto y = labels[i];
    if (y != kUnlabeled && (y < 0 || static_cast<std::uint32_t>(y) >= c)) {
      fail(ErrorCode::kFormat, "label " + std::to_string(y) + " of sample " + std::to_string(i) +
                                   " outside [0, " + std::to_string(c) + ")");
    }
  }
}

void FeatureSet::validate_labeled() const {
  validate();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == kUnlabeled) {
      fail(ErrorCode::kFormat, "sample " + std::to_string(i) + " is unlabeled");
    }
  }
}

void write_features(const std::filesystem::path& path, const FeatureSet& set) {
  set.validate();
  detail::ByteWriter w;
  w.bytes("AVF1");
  w.u32(kFeatureFormatVersion);
  w.u64(set.n());
  w.u32(set.h);
  w.u32(set.c);
  for (float x : set.features) w.f32(x);
  for (auto y : set.labels) w.i32(y);
  detail::write_file_atomic(path, w.buffer());
}

FeatureSet read_features(const std::filesystem::path& path) {
  const auto data = detail::read_file(path);
  detail::ByteReader r(data, path.string());
  if (r.remaining() < 4 || r.bytes(4) != "AVF1") {
    fail(ErrorCode::kFormat, path.string() + ": not an AVF1 feature file (bad magic)");
  }
  const auto version = r.u32();
  if (version != kFeatureFormatVersion) {
    fail(ErrorCode::kFormat, path.string() + ": unsupported AVF1 version " + std::to_string(version));
  }
  const std::uint64_t n = r.u64();
  FeatureSet set;
  set.h = r.u32();
  set.c = r.u32();
  const std::uint64_t payload = n * set.h * 4 + n * 4;
  if (r.remaining() != payload) {
    fail(ErrorCode::kFormat, path.string() + ": size mismatch, header declares " +
                                 std::to_string(payload) + " payload bytes, file has " +
                                 std::to_string(r.remaining()));
  }
  set.features.resize(n * set.h);
  for (float& x : set.features) x = r.f32();
  set.labels.resize(n);
  for (auto& y : set.labels) y = r.i32();
  set.validate();
  return set;
}

FeatureSet read_features_csv(const std::filesystem::path& path, std::uint32_t classes) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::kFormat, path.string() + ": empty CSV");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header.size() < 2 || header[0] != "label") {
    fail(ErrorCode::kFormat, path.string() + ": CSV header must be label,f0,...");
  }
  for (std::size_t j = 1; j < header.size(); ++j) {
    if (header[j] != "f" + std::to_string(j - 1)) {
      fail(ErrorCode::kFormat, path.string() + ": unexpected column '" + header[j] + "'");
    }
  }
  FeatureSet set;
  set.h = static_cast<std::uint32_t>(header.size() - 1);
  std::int32_t max_label = -1;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t col = 0;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        if (col == 0) {
          const int y = std::stoi(cell, &used);
          set.labels.push_back(y);
          max_label = std::max(max_label, y);
        } else {
          set.features.push_back(std::stof(cell, &used));
        }
      } catch (const std::exception&) {
        fail(ErrorCode::kFormat, path.string() + ":" + std::to_string(line_no) + ": bad number '" +
                                     cell + "'");
      }
      ++col;
    }
    if (col != header.size()) {
      fail(ErrorCode::kFormat, path.string() + ":" + std::to_string(line_no) + ": expected " +
                                   std::to_string(header.size()) + " columns, got " +
                                   std::to_string(col));
    }
  }
  set.c = classes != 0 ? classes : static_cast<std::uint32_t>(max_label + 1);
  set.validate();
  return set;
}

Split split_indices(const FeatureSet& set, double val_fraction, std::uint64_t seed) {
  if (!(val_fraction > 0.0 && val_fraction <= 0.5)) {
    fail(ErrorCode::kParameter, "validation fraction must lie in (0, 0.5], got " +
                                    std::to_string(val_fraction));
  }
  std::map<std::int32_t, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < set.n(); ++i) strata[set.labels[i]].push_back(i);

  Split out;
  for (auto& [label, members] : strata) {
    // One generator stream per label so strata do not perturb each other.
    CounterRng rng(seed, static_cast<std::uint64_t>(static_cast<std::int64_t>(label) + 1));
    for (std::size_t i = members.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(rng.below(i));
      std::swap(members[i - 1], members[j]);
    }
    const auto take = static_cast<std::size_t>(
        std::llround(val_fraction * static_cast<double>(members.size())));
    out.val.insert(out.val.end(), members.begin(), members.begin() + take);
    out.train.insert(out.train.end(), members.begin() + take, members.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.val.begin(), out.val.end());
  if (out.val.empty()) fail(ErrorCode::kCalibration, "validation split is empty");
  return out;
}

std::pair<FeatureSet, FeatureSet> split(const FeatureSet& set, double val_fraction,
                                        std::uint64_t seed) {
  const auto idx = split_indices(set, val_fraction, seed);
  return {set.subset(idx.train), set.subset(idx.val)};
}

}  // namespace olsr
