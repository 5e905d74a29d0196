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

#include <optional>
#include <string>

#include "macsel/error.h"
#include "macsel/netlist.h"

namespace macsel {
namespace {

using Column = std::vector<std::optional<NetId>>;

// Carry-save array over `rows`: rows[i][j] is the partial-product bit of
// weight row i and activation bit j, with weight 2^(i+j). Returns the
// per-column sum and carry vectors left after the last row; product bits
// below the last row index are final in `sum`.
//
// Row i adds into columns i..i+7. Column k of row i combines the new partial
// product with the running sum and carry of that column: one operand passes
// through, two use a half adder, three a full adder. Carries move to k+1.
struct CsaResult {
  Column sum;
  Column carry;
};

CsaResult CarrySaveArray(NetlistBuilder& b,
                         const std::vector<std::vector<NetId>>& rows) {
  const int width = kProductBits;
  CsaResult acc{Column(width + 1), Column(width + 1)};
  for (size_t j = 0; j < rows[0].size(); ++j) acc.sum[j] = rows[0][j];
  for (size_t i = 1; i < rows.size(); ++i) {
    Column next_sum = acc.sum;
    Column next_carry(width + 1);
    for (size_t j = 0; j < rows[i].size(); ++j) {
      const size_t k = i + j;
      std::vector<NetId> ops = {rows[i][j]};
      if (acc.sum[k]) ops.push_back(*acc.sum[k]);
      if (acc.carry[k]) ops.push_back(*acc.carry[k]);
      if (ops.size() == 1) {
        next_sum[k] = ops[0];
      } else if (ops.size() == 2) {
        auto [s, c] = b.HalfAdder(ops[0], ops[1]);
        next_sum[k] = s;
        next_carry[k + 1] = c;
      } else {
        auto [s, c] = b.FullAdder(ops[0], ops[1], ops[2]);
        next_sum[k] = s;
        next_carry[k + 1] = c;
      }
    }
    acc.sum = std::move(next_sum);
    acc.carry = std::move(next_carry);
  }
  return acc;
}

// Ripple-carry merge of the carry-save vectors for columns [first, 16).
// `carry_in` optionally injects one more bit at column `first`. The top
// column produces no carry out (the product wraps modulo 2^16); when
// `invert_msb` is set the top sum bit is complemented (XNOR), which adds
// 2^15 modulo 2^16.
std::vector<NetId> MergeColumns(NetlistBuilder& b, const CsaResult& acc,
                                size_t first, std::optional<NetId> carry_in,
                                bool invert_msb) {
  std::vector<NetId> out;
  std::optional<NetId> ripple = carry_in;
  for (size_t k = first; k < kProductBits; ++k) {
    std::vector<NetId> ops;
    if (acc.sum[k]) ops.push_back(*acc.sum[k]);
    if (acc.carry[k]) ops.push_back(*acc.carry[k]);
    if (ripple) ops.push_back(*ripple);
    const bool top = k + 1 == kProductBits;
    if (top) {
      if (ops.size() == 1 && !invert_msb) {
        out.push_back(ops[0]);
      } else if (ops.size() == 1) {
        out.push_back(b.AddGate(GateKind::kInv, ops[0]));
      } else {
        NetId s = ops[0];
        for (size_t m = 1; m + 1 < ops.size(); ++m) {
          s = b.AddGate(GateKind::kXor2, s, ops[m]);
        }
        out.push_back(b.AddGate(invert_msb ? GateKind::kXnor2 : GateKind::kXor2,
                                s, ops.back()));
      }
      break;
    }
    if (ops.empty()) {
      Fail(ErrorCode::kStructural, "multiplier column has no operands");
    } else if (ops.size() == 1) {
      out.push_back(ops[0]);
      ripple.reset();
    } else if (ops.size() == 2) {
      auto [s, c] = b.HalfAdder(ops[0], ops[1]);
      out.push_back(s);
      ripple = c;
    } else {
      auto [s, c] = b.FullAdder(ops[0], ops[1], ops[2]);
      out.push_back(s);
      ripple = c;
    }
  }
  return out;
}

std::vector<std::vector<NetId>> AndRows(NetlistBuilder& b,
                                        const std::vector<NetId>& w,
                                        const std::vector<NetId>& a) {
  std::vector<std::vector<NetId>> rows(w.size());
  for (size_t i = 0; i < w.size(); ++i) {
    for (NetId aj : a) rows[i].push_back(b.AddGate(GateKind::kAnd2, w[i], aj));
  }
  return rows;
}

// Conditional two's-complement negation of `x` controlled by `s`:
// (x XOR s) + s, incrementer built from half adders, no carry out.
std::vector<NetId> ConditionalNegate(NetlistBuilder& b,
                                     const std::vector<NetId>& x, NetId s,
                                     bool keep_carry_out) {
  std::vector<NetId> out;
  NetId carry = s;
  for (size_t i = 0; i < x.size(); ++i) {
    const NetId t = b.AddGate(GateKind::kXor2, x[i], s);
    out.push_back(b.AddGate(GateKind::kXor2, t, carry));
    if (i + 1 < x.size()) {
      carry = b.AddGate(GateKind::kAnd2, t, carry);
    } else if (keep_carry_out) {
      out.push_back(b.AddGate(GateKind::kAnd2, t, carry));
    }
  }
  return out;
}

std::vector<NetId> BuildSignMagnitude(NetlistBuilder& b,
                                      const std::vector<NetId>& w,
                                      const std::vector<NetId>& a) {
  const NetId sign = w[kWeightBits - 1];
  // |w| as 8 bits: negate the low seven bits and keep the carry as bit 7,
  // which is set only for w = -128.
  std::vector<NetId> low(w.begin(), w.end() - 1);
  const std::vector<NetId> magnitude = ConditionalNegate(b, low, sign, true);
  const CsaResult acc = CarrySaveArray(b, AndRows(b, magnitude, a));
  std::vector<NetId> unsigned_product;
  for (int k = 0; k < kWeightBits - 1; ++k) unsigned_product.push_back(*acc.sum[k]);
  const auto high = MergeColumns(b, acc, kWeightBits - 1, std::nullopt, false);
  unsigned_product.insert(unsigned_product.end(), high.begin(), high.end());
  return ConditionalNegate(b, unsigned_product, sign, false);
}

// Two's-complement weight: the MSB row carries weight -2^7, rewritten as
// sum_j NAND(w7, a_j) 2^(7+j) + 2^7 + 2^15 (mod 2^16). The constant 2^7 is
// folded into the first MSB-row bit: NAND(w7,a0) 2^7 + 2^7 equals
// AND(w7,a0) 2^7 + NAND(w7,a0) 2^8, and the extra bit enters the merging
// adder as carry-in at column 8. The constant 2^15 inverts the top bit.
std::vector<NetId> BuildBaughWooley(NetlistBuilder& b,
                                    const std::vector<NetId>& w,
                                    const std::vector<NetId>& a) {
  const int msb = kWeightBits - 1;
  std::vector<NetId> low(w.begin(), w.end() - 1);
  auto rows = AndRows(b, low, a);
  std::vector<NetId> msb_row;
  msb_row.push_back(b.AddGate(GateKind::kAnd2, w[msb], a[0]));
  for (size_t j = 1; j < a.size(); ++j) {
    msb_row.push_back(b.AddGate(GateKind::kNand2, w[msb], a[j]));
  }
  rows.push_back(msb_row);
  const NetId folded = b.AddGate(GateKind::kNand2, w[msb], a[0]);
  const CsaResult acc = CarrySaveArray(b, rows);
  std::vector<NetId> product;
  for (int k = 0; k <= msb; ++k) product.push_back(*acc.sum[k]);
  const auto high = MergeColumns(b, acc, kWeightBits, folded, true);
  product.insert(product.end(), high.begin(), high.end());
  return product;
}

std::vector<NetId> BuildMultiplier(NetlistBuilder& b, MultiplierArch arch,
                                   const std::vector<NetId>& w,
                                   const std::vector<NetId>& a) {
  switch (arch) {
    case MultiplierArch::kSignMagnitude:
      return BuildSignMagnitude(b, w, a);
    case MultiplierArch::kBaughWooley:
      return BuildBaughWooley(b, w, a);
  }
  Fail(ErrorCode::kConfig, "unknown multiplier architecture");
}

// Ripple-carry adder of the sign-extended product into the partial sum. Bit 0
// is a half adder; the top bit drops its carry so the sum wraps mod 2^22.
std::vector<NetId> BuildAdder(NetlistBuilder& b,
                              const std::vector<NetId>& product,
                              const std::vector<NetId>& psum) {
  std::vector<NetId> sum;
  NetId carry = kNoNet;
  for (int k = 0; k < kPsumBits; ++k) {
    const NetId p = product[std::min(k, kProductBits - 1)];
    if (k == 0) {
      auto [s, c] = b.HalfAdder(p, psum[0]);
      sum.push_back(s);
      carry = c;
    } else if (k + 1 < kPsumBits) {
      auto [s, c] = b.FullAdder(p, psum[k], carry);
      sum.push_back(s);
      carry = c;
    } else {
      const NetId t = b.AddGate(GateKind::kXor2, p, psum[k]);
      sum.push_back(b.AddGate(GateKind::kXor2, t, carry));
    }
  }
  return sum;
}

}  // namespace

std::string_view MultiplierArchName(MultiplierArch arch) {
  switch (arch) {
    case MultiplierArch::kSignMagnitude:
      return "sign-magnitude";
    case MultiplierArch::kBaughWooley:
      return "baugh-wooley";
  }
  return "unknown";
}

MultiplierArch ParseMultiplierArch(std::string_view name) {
  if (name == "sign-magnitude") return MultiplierArch::kSignMagnitude;
  if (name == "baugh-wooley") return MultiplierArch::kBaughWooley;
  Fail(ErrorCode::kConfig,
       "unknown multiplier architecture '" + std::string(name) + "'");
}

Netlist GenMultiplier(MultiplierArch arch) {
  NetlistBuilder b;
  const auto w = b.AddInput(std::string(kWeightPort), kWeightBits);
  const auto a = b.AddInput(std::string(kActivationPort), kActBits);
  b.AddOutput(std::string(kProductPort), BuildMultiplier(b, arch, w, a));
  return std::move(b).Build();
}

Netlist GenAdder() {
  NetlistBuilder b;
  const auto p = b.AddInput(std::string(kProductPort), kProductBits);
  const auto ps = b.AddInput(std::string(kPartialSumPort), kPsumBits);
  b.AddOutput(std::string(kSumPort), BuildAdder(b, p, ps));
  return std::move(b).Build();
}

MacNetlist GenMac(MultiplierArch arch) {
  NetlistBuilder b;
  const auto w = b.AddInput(std::string(kWeightPort), kWeightBits);
  const auto a = b.AddInput(std::string(kActivationPort), kActBits);
  const auto ps = b.AddInput(std::string(kPartialSumPort), kPsumBits);
  const auto product = BuildMultiplier(b, arch, w, a);
  b.AddOutput(std::string(kSumPort), BuildAdder(b, product, ps));
  b.AddMonitored(std::string(kProductPort), product);
  return {std::move(b).Build(), arch};
}

}  // namespace macsel
