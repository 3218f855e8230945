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

#pragma once

#include <gtest/gtest.h>

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

#include "olsr/data.hpp"
#include "olsr/detector.hpp"
#include "olsr/error.hpp"
#include "olsr/rng.hpp"

#define EXPECT_OLSR_ERROR(statement, expected)                                   \
  do {                                                                           \
    try {                                                                        \
      statement;                                                                 \
      ADD_FAILURE() << "no exception, expected " #expected;                      \
    } catch (const olsr::Error& e_) {                                            \
      EXPECT_EQ(e_.code(), olsr::ErrorCode::expected) << e_.what();              \
    }                                                                            \
  } while (0)

namespace testing_support {

inline std::vector<double> random_vector(olsr::CounterRng& rng, std::size_t n, double lo, double hi) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

inline olsr::DetectorModel random_model(std::uint32_t h, std::uint32_t c, olsr::Framework framework,
                                        std::uint64_t seed, double temperature = 100.0,
                                        std::size_t hidden = 0) {
  olsr::TrainConfig cfg;
  cfg.seed = seed;
  cfg.framework = framework;
  cfg.temperature = temperature;
  cfg.hidden = hidden;
  return olsr::make_model(h, c, cfg);
}

inline olsr::SynthSpec small_spec(std::uint32_t c = 4, std::uint32_t h = 16, std::uint64_t seed = 0) {
  olsr::SynthSpec s;
  s.c = c;
  s.h = h;
  s.seed = seed;
  return s;
}

inline olsr::TrainConfig quick_config(std::size_t epochs = 20) {
  olsr::TrainConfig cfg;
  cfg.epochs = epochs;
  cfg.batch = 32;
  cfg.lr = 1e-3;
  return cfg;
}

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    std::string name = info ? std::string(info->test_suite_name()) + "_" + info->name() : "olsr";
    for (auto& ch : name)
      if (ch == '/') ch = '_';
    path_ = std::filesystem::temp_directory_path() /
            ("olsr_test_" + name + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace testing_support
