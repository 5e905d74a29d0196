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

// Small file and text helpers shared by the artifact writers.

#ifndef MACSEL_IO_H_
#define MACSEL_IO_H_

#include <string>
#include <string_view>
#include <vector>

namespace macsel {

// Whole-file read/write. Failures raise Error(kIo) naming the path.
std::string ReadFile(const std::string& path);
void WriteFile(const std::string& path, std::string_view contents);

// Shortest decimal text that parses back to the same double.
std::string FormatDouble(double v);

using CsvRow = std::vector<std::string>;

// Comma-separated text without quoting (none of our fields need it). Blank
// trailing lines are ignored.
std::vector<CsvRow> ParseCsv(std::string_view text);
std::string EmitCsv(const std::vector<CsvRow>& rows);

// Strict numeric field parsing; `what` names the field in the error.
double ParseDouble(std::string_view s, std::string_view what);
long long ParseInt(std::string_view s, std::string_view what);

}  // namespace macsel

#endif  // MACSEL_IO_H_
