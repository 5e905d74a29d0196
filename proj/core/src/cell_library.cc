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

#include "macsel/cell_library.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "macsel/error.h"

namespace macsel {
namespace {

constexpr std::array<std::string_view, kNumGateKinds> kKindNames = {
    "INV", "BUF", "AND2", "OR2", "NAND2", "NOR2", "XOR2", "XNOR2"};

constexpr double kDefaultLeakageNw = 2.0;
constexpr double kDefaultClockPeriodPs = 200.0;

}  // namespace

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfig:
      return "config";
    case ErrorCode::kIo:
      return "io";
    case ErrorCode::kParse:
      return "parse";
    case ErrorCode::kInput:
      return "input";
    case ErrorCode::kStructural:
      return "structural";
    case ErrorCode::kMapping:
      return "mapping";
    case ErrorCode::kProfile:
      return "profile";
    case ErrorCode::kThreshold:
      return "threshold";
    case ErrorCode::kInfeasible:
      return "infeasible";
    case ErrorCode::kEmpty:
      return "empty";
    case ErrorCode::kPartition:
      return "partition";
    case ErrorCode::kTraining:
      return "training";
    case ErrorCode::kSchedule:
      return "schedule";
    case ErrorCode::kRange:
      return "range";
  }
  return "unknown";
}

std::string_view GateKindName(GateKind kind) {
  return kKindNames[static_cast<int>(kind)];
}

std::optional<GateKind> ParseGateKind(std::string_view name) {
  for (int i = 0; i < kNumGateKinds; ++i) {
    if (kKindNames[i] == name) return static_cast<GateKind>(i);
  }
  return std::nullopt;
}

CellLibrary::CellLibrary() : clock_period_ps_(kDefaultClockPeriodPs) {
  auto set = [this](GateKind k, Picoseconds d, double e) {
    cells_[static_cast<int>(k)] = {d, e, kDefaultLeakageNw};
  };
  set(GateKind::kInv, 5, 0.4);
  set(GateKind::kBuf, 6, 0.5);
  set(GateKind::kNand2, 8, 0.6);
  set(GateKind::kNor2, 8, 0.6);
  set(GateKind::kAnd2, 10, 0.8);
  set(GateKind::kOr2, 10, 0.8);
  set(GateKind::kXor2, 12, 1.0);
  set(GateKind::kXnor2, 12, 1.0);
}

CellLibrary CellLibrary::Build(const CellParamMap& config) {
  CellLibrary lib;
  for (const auto& [key, value] : config) {
    if (!std::isfinite(value)) {
      Fail(ErrorCode::kConfig, "cell library: non-finite value for " + key);
    }
    if (key == "clock_period") {
      if (value <= 0) {
        Fail(ErrorCode::kConfig, "cell library: clock_period must be > 0");
      }
      lib.clock_period_ps_ = value;
      continue;
    }
    const size_t dot = key.find('.');
    const auto kind = dot == std::string::npos
                          ? std::nullopt
                          : ParseGateKind(std::string_view(key).substr(0, dot));
    if (!kind) Fail(ErrorCode::kConfig, "cell library: unknown key " + key);
    const std::string field = key.substr(dot + 1);
    CellParams& cell = lib.cells_[static_cast<int>(*kind)];
    if (field == "delay") {
      if (value <= 0) {
        Fail(ErrorCode::kConfig, "cell library: " + key + " must be > 0");
      }
      if (value != std::floor(value) || value > 1e6) {
        Fail(ErrorCode::kConfig,
             "cell library: " + key + " must be a whole number of ps");
      }
      cell.delay_ps = static_cast<Picoseconds>(value);
    } else if (field == "energy") {
      if (value < 0) {
        Fail(ErrorCode::kConfig, "cell library: " + key + " must be >= 0");
      }
      cell.switch_energy_fj = value;
    } else if (field == "leakage") {
      if (value < 0) {
        Fail(ErrorCode::kConfig, "cell library: " + key + " must be >= 0");
      }
      cell.leakage_nw = value;
    } else {
      Fail(ErrorCode::kConfig, "cell library: unknown field in " + key);
    }
  }
  return lib;
}

Picoseconds CellLibrary::max_delay() const {
  Picoseconds m = 0;
  for (const auto& c : cells_) m = std::max(m, c.delay_ps);
  return m;
}

CellParamMap CellLibrary::ToParamMap() const {
  CellParamMap out;
  for (int i = 0; i < kNumGateKinds; ++i) {
    const std::string name(kKindNames[i]);
    out[name + ".delay"] = cells_[i].delay_ps;
    out[name + ".energy"] = cells_[i].switch_energy_fj;
    out[name + ".leakage"] = cells_[i].leakage_nw;
  }
  out["clock_period"] = clock_period_ps_;
  return out;
}

CellLibrary LoadCellLibrary(const std::string& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIo, "cannot open cell library file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kParse, path + ": " + e.what());
  }
  if (!j.is_object()) {
    Fail(ErrorCode::kParse, path + ": expected a flat JSON object");
  }
  CellParamMap config;
  for (const auto& [key, value] : j.items()) {
    if (!value.is_number()) {
      Fail(ErrorCode::kParse, path + ": value of " + key + " is not a number");
    }
    config[key] = value.get<double>();
  }
  return CellLibrary::Build(config);
}

std::string CellLibraryToJson(const CellLibrary& lib) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : lib.ToParamMap()) j[k] = v;
  return j.dump(2) + "\n";
}

}  // namespace macsel
