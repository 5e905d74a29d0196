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

#include "macsel/profile.h"

#include "json.hpp"
#include "macsel/error.h"
#include "macsel/io.h"

namespace macsel {

double PowerProfile::at(int weight) const {
  const auto it = dynamic_uw.find(weight);
  if (it == dynamic_uw.end()) {
    Fail(ErrorCode::kProfile,
         "power profile has no entry for weight " + std::to_string(weight));
  }
  return it->second;
}

std::string PowerProfileToCsv(const PowerProfile& p) {
  std::vector<CsvRow> rows = {{"weight", "power_uW"}};
  for (const auto& [w, uw] : p.dynamic_uw) {
    rows.push_back({std::to_string(w), FormatDouble(uw)});
  }
  return EmitCsv(rows);
}

std::string PowerProfileToJson(const PowerProfile& p) {
  nlohmann::json j;
  j["leakage_uW"] = p.leakage_uw;
  j["samples"] = p.samples;
  j["seed"] = p.seed;
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& [w, uw] : p.dynamic_uw) entries.push_back({w, uw});
  j["dynamic_uW"] = entries;
  return j.dump(1) + "\n";
}

PowerProfile PowerProfileFromJson(std::string_view text) {
  PowerProfile p;
  try {
    const auto j = nlohmann::json::parse(text);
    p.leakage_uw = j.at("leakage_uW").get<double>();
    p.samples = j.at("samples").get<int>();
    p.seed = j.at("seed").get<uint64_t>();
    for (const auto& e : j.at("dynamic_uW")) {
      p.dynamic_uw[e.at(0).get<int>()] = e.at(1).get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kParse, std::string("power profile: ") + e.what());
  }
  return p;
}

}  // namespace macsel
