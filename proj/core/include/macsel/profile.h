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

#ifndef MACSEL_PROFILE_H_
#define MACSEL_PROFILE_H_

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

namespace macsel {

// Average dynamic power per weight value of one MAC unit, plus its leakage.
struct PowerProfile {
  std::map<int, double> dynamic_uw;
  double leakage_uw = 0.0;
  int samples = 0;
  uint64_t seed = 0;

  // Error(kProfile) if `weight` is not covered.
  double at(int weight) const;
  bool operator==(const PowerProfile&) const = default;
};

// "weight,power_uW" rows in ascending weight order.
std::string PowerProfileToCsv(const PowerProfile& p);
// Complete form including leakage, sample count and seed.
std::string PowerProfileToJson(const PowerProfile& p);
PowerProfile PowerProfileFromJson(std::string_view text);

}  // namespace macsel

#endif  // MACSEL_PROFILE_H_
