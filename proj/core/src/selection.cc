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


#include "macsel/selection.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"
#include "macsel/error.h"

namespace macsel {

using nlohmann::json;

Selection FullSelection() {
  Selection s;
  for (int w = kMinWeight; w <= kMaxWeight; ++w) s.weights.push_back(w);
  for (int a = 0; a < kNumActs; ++a) s.acts.push_back(a);
  return s;
}

namespace {

json DoubleOrNull(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

double DoubleOrInf(const json& j) {
  if (j.is_null()) return std::numeric_limits<double>::infinity();
  return j.get<double>();
}

std::vector<int> SortedUnique(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace

std::string SelectionToJson(const Selection& s) {
  json j;
  j["weights"] = s.weights;
  j["acts"] = s.acts;
  j["power_threshold"] = DoubleOrNull(s.power_threshold);
  j["delay_threshold"] = DoubleOrNull(s.delay_threshold);
  j["achieved_max_delay"] = s.achieved_max_delay;
  return j.dump(1) + "\n";
}

Selection SelectionFromJson(std::string_view text) {
  Selection s;
  try {
    const json j = json::parse(text);
    s.weights = SortedUnique(j.at("weights").get<std::vector<int>>());
    s.acts = SortedUnique(j.at("acts").get<std::vector<int>>());
    s.power_threshold = DoubleOrInf(j.value("power_threshold", json()));
    s.delay_threshold = DoubleOrInf(j.value("delay_threshold", json()));
    s.achieved_max_delay = j.value("achieved_max_delay", kNoPath);
  } catch (const json::exception& e) {
    Fail(ErrorCode::kParse, std::string("selection: ") + e.what());
  }
  if (s.weights.empty() || s.acts.empty()) {
    Fail(ErrorCode::kParse, "selection: empty weight or activation list");
  }
  if (s.weights.front() < kMinWeight || s.weights.back() > kMaxWeight ||
      s.acts.front() < 0 || s.acts.back() >= kNumActs) {
    Fail(ErrorCode::kParse, "selection: value out of range");
  }
  return s;
}

}  // namespace macsel
