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

#include <stdexcept>
#include <string>

namespace olsr {

/// Error classes. Values are stable: the C API and the CLI exit codes are
/// derived from them.
enum class ErrorCode {
  kShape = 1,        // vector/matrix dimensions disagree
  kParameter = 2,    // invalid argument value (T <= 0, bad fraction, ...)
  kNumeric = 3,      // non-finite value during optimisation
  kIo = 4,           // file cannot be opened/read/written
  kFormat = 5,       // bad magic, version, truncated payload
  kDimension = 6,    // model/feature dimensions disagree
  kCalibration = 7,  // too few validation samples
  kScoring = 8,      // degenerate feature (norm under guard)
  kEvaluation = 9,   // empty score set
  kUnsupported = 10, // operation not defined for this network
  kConfig = 11,      // unknown or malformed configuration key
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace olsr
