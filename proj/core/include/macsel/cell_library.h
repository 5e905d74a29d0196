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

#ifndef MACSEL_CELL_LIBRARY_H_
#define MACSEL_CELL_LIBRARY_H_

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace macsel {

// Delays are kept at 1 ps granularity throughout.
using Picoseconds = int32_t;

enum class GateKind : uint8_t {
  kInv,
  kBuf,
  kAnd2,
  kOr2,
  kNand2,
  kNor2,
  kXor2,
  kXnor2,
};

inline constexpr int kNumGateKinds = 8;

std::string_view GateKindName(GateKind kind);
std::optional<GateKind> ParseGateKind(std::string_view name);

constexpr int GateArity(GateKind kind) {
  return kind == GateKind::kInv || kind == GateKind::kBuf ? 1 : 2;
}

constexpr bool EvalGate(GateKind kind, bool a, bool b) {
  switch (kind) {
    case GateKind::kInv:
      return !a;
    case GateKind::kBuf:
      return a;
    case GateKind::kAnd2:
      return a && b;
    case GateKind::kOr2:
      return a || b;
    case GateKind::kNand2:
      return !(a && b);
    case GateKind::kNor2:
      return !(a || b);
    case GateKind::kXor2:
      return a != b;
    case GateKind::kXnor2:
      return a == b;
  }
  return false;
}

struct CellParams {
  Picoseconds delay_ps = 0;
  double switch_energy_fj = 0.0;  // per output transition
  double leakage_nw = 0.0;

  bool operator==(const CellParams&) const = default;
};

// Flat parameter map, e.g. {"XOR2.delay": 15, "INV.energy": 0.4,
// "NAND2.leakage": 2, "clock_period": 200}.
using CellParamMap = std::map<std::string, double>;

class CellLibrary {
 public:
  // Library with the built-in placeholder values.
  CellLibrary();

  // Applies `config` on top of the defaults. Throws Error(kConfig) for unknown
  // keys, non-positive or non-integral delays, negative energies/leakages and
  // a non-positive clock period.
  static CellLibrary Build(const CellParamMap& config);

  const CellParams& cell(GateKind kind) const {
    return cells_[static_cast<int>(kind)];
  }
  Picoseconds delay(GateKind kind) const { return cell(kind).delay_ps; }
  double switch_energy_fj(GateKind kind) const {
    return cell(kind).switch_energy_fj;
  }
  double leakage_nw(GateKind kind) const { return cell(kind).leakage_nw; }
  double clock_period_ps() const { return clock_period_ps_; }

  Picoseconds max_delay() const;

  // Inverse of Build(): every parameter, suitable for JSON export.
  CellParamMap ToParamMap() const;

  bool operator==(const CellLibrary&) const = default;

 private:
  std::array<CellParams, kNumGateKinds> cells_;
  double clock_period_ps_;
};

// Reads a flat JSON object of parameters. Throws Error(kIo) if the file cannot
// be opened (message names the path) and Error(kParse) on malformed JSON.
CellLibrary LoadCellLibrary(const std::string& path);
std::string CellLibraryToJson(const CellLibrary& lib);

}  // namespace macsel

#endif  // MACSEL_CELL_LIBRARY_H_
