// Copyright 2026 The macsel Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MACSEL_ERROR_H_
#define MACSEL_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace macsel {

enum class ErrorCode {
  kConfig,      // bad parameter value or configuration
  kIo,          // file missing, unreadable or unwritable
  kParse,       // malformed input file
  kInput,       // incomplete or mismatched input assignment / shape
  kStructural,  // netlist invariant broken (cycle, missing order)
  kMapping,     // layer cannot be mapped onto the array
  kProfile,     // profile lacks a required entry
  kThreshold,   // threshold yields an empty or invalid selection
  kInfeasible,  // no selection can meet the requested delay
  kEmpty,       // empty workload, dataset or sample list
  kPartition,   // bin partition unusable
  kTraining,    // training diverged
  kSchedule,    // threshold schedule cannot start
  kRange,       // argument outside the supported range
};

std::string_view ErrorCodeName(ErrorCode code);

// All library failures are reported through this exception type. The code
// lets front ends map failures onto exit statuses without string matching.
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

}  // namespace macsel

#endif  // MACSEL_ERROR_H_
