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

#ifndef MACSEL_TOOLS_COMMANDS_H_
#define MACSEL_TOOLS_COMMANDS_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "macsel/dataset.h"
#include "macsel/error.h"
#include "macsel/training.h"
#include "macsel/workload.h"

namespace macsel::cli {

struct Common {
  uint64_t seed = 1;
  int jobs = 1;
  std::string out_dir;
  std::string cell_library;  // empty: built-in defaults
  std::string multiplier = "sign-magnitude";
};

struct DataOptions {
  std::string dir;  // empty: generated
  std::string format = "idx";
  std::string synthetic = "digits";  // digits | blobs
  int train_count = 8000;
  int test_count = 2000;
};

struct DatagenOptions {
  DataOptions data;
};

struct TrainOptions {
  DataOptions data;
  TrainConfig cfg;
  int hidden = 128;
  std::string selection;  // restricts the plain run
  std::string init;       // latent checkpoint to continue from
  std::string schedule = "none";  // none | power | delay
  std::string power_profile;
  std::string delay_profile;
  std::optional<double> baseline_accuracy;
};

struct WorkloadOptions {
  DataOptions data;
  std::string model;
  int samples = 100;
  ArrayConfig array;
};

struct CharacterizeOptions {
  std::string stats;  // empty: uniform activation and partial-sum traffic
  int samples = 10000;
  int bins = 50;
  std::vector<int> weights;  // empty: all 255
  bool power = true;
  bool delay = true;
};

struct SelectOptions {
  std::string power_profile;
  std::string delay_profile;
  double power_threshold;
  double delay_threshold;
  int restarts = 20;
  PruneOptions protect;
};

struct EstimateOptions {
  DataOptions data;
  std::string model;
  std::string power_profile;
  std::string delay_profile;  // empty: no voltage scaling
  int samples = 100;
  ArrayConfig array;
  bool extrapolate_voltage = false;
};

struct ReportOptions {
  DataOptions data;
  std::string schedule;
  std::string power_profile;
  std::string delay_profile;
  int samples = 100;
  ArrayConfig array;
  bool extrapolate_voltage = false;
};

struct PipelineOptions {
  DataOptions data;
  TrainConfig cfg;
  int hidden = 128;
  int workload_samples = 100;
  ArrayConfig array;
  CharacterizeOptions characterize;
  std::string delay_profile;  // reuse instead of recomputing
  bool extrapolate_voltage = false;
};

// Each returns the process exit status; library errors propagate as
// macsel::Error and are mapped by the caller.
int Datagen(const Common& c, const DatagenOptions& o);
int TrainCmd(const Common& c, const TrainOptions& o);
int WorkloadCmd(const Common& c, const WorkloadOptions& o);
int Characterize(const Common& c, const CharacterizeOptions& o);
int Select(const Common& c, const SelectOptions& o);
int Estimate(const Common& c, const EstimateOptions& o);
int Report(const Common& c, const ReportOptions& o);
int Pipeline(const Common& c, const PipelineOptions& o);

// Exit status for a library error code.
int ExitCodeFor(ErrorCode code);

// Records the command, arguments and wall-clock times in
// <out>/run_meta.json, keyed by command name. The only file with
// timestamps.
void WriteRunMeta(const std::string& out_dir, const std::string& command,
                  const std::vector<std::string>& argv, double started_unix,
                  double elapsed_s, int exit_code);

}  // namespace macsel::cli

#endif  // MACSEL_TOOLS_COMMANDS_H_
