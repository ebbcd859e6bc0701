// Copyright 2026 The DP-ULR Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DPULR_ERROR_H_
#define DPULR_ERROR_H_

#include <stdexcept>
#include <string>

namespace dpulr {

// Error categories. The numeric values are part of the C API (dpulr.h) and
// must stay in sync with dpulr_status.
enum class ErrorCode : int {
  kDimension = 1,  // shape or size mismatch
  kNumeric = 2,    // non-finite values, non-PSD input beyond tolerance
  kDomain = 3,     // argument outside its mathematical domain
  kConfig = 4,     // invalid run configuration
  kFormat = 5,     // malformed input file
  kValidity = 6,   // accountant regime violated in strict mode
  kIo = 7,
  kIndex = 8,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace dpulr

#endif  // DPULR_ERROR_H_
