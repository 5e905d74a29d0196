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

#ifndef MACSEL_SELECTION_H_
#define MACSEL_SELECTION_H_

#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "macsel/engine.h"

namespace macsel {

// Weight and activation values a network may use. Both lists are sorted
// ascending and duplicate free.
struct Selection {
  std::vector<int> weights;
  std::vector<int> acts;
  double power_threshold = std::numeric_limits<double>::infinity();
  double delay_threshold = std::numeric_limits<double>::infinity();
  Picoseconds achieved_max_delay = kNoPath;  // kNoPath when not evaluated

  bool operator==(const Selection&) const = default;
};

// -127..127 and 0..255.
Selection FullSelection();

std::string SelectionToJson(const Selection& s);
// Validates ranges and sorts/dedupes the lists.
Selection SelectionFromJson(std::string_view text);

}  // namespace macsel

#endif  // MACSEL_SELECTION_H_
