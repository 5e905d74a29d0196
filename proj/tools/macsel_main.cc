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

// macsel command-line front end. Every subcommand writes its artifacts into
// --out (default: $MACSEL_OUT_DIR, else ./macsel_out) and records timing in
// run_meta.json next to them.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "commands.h"
#include "macsel/error.h"

namespace {

using namespace macsel;
using namespace macsel::cli;

void AddDataOptions(CLI::App* app, DataOptions& d) {
  app->add_option("--data", d.dir, "Dataset directory (idx or csv files); generated when omitted");
  app->add_option("--format", d.format, "Dataset format")->check(CLI::IsMember({"idx", "csv"}));
  app->add_option("--synthetic", d.synthetic, "Generated dataset kind")
      ->check(CLI::IsMember({"digits", "blobs"}));
  app->add_option("--train-count", d.train_count, "Generated training samples");
  app->add_option("--test-count", d.test_count, "Generated test samples");
}

void AddArrayOptions(CLI::App* app, ArrayConfig& a) {
  app->add_option("--rows", a.rows, "Systolic array rows");
  app->add_option("--cols", a.cols, "Systolic array columns");
  app->add_option("--reservoir", a.reservoir_cap, "Partial-sum reservoir capacity");
}

void AddTrainOptions(CLI::App* app, TrainConfig& t, int& hidden) {
  app->add_option("--hidden", hidden, "Hidden layer width");
  app->add_option("--epochs", t.epochs, "Training epochs");
  app->add_option("--batch", t.batch_size, "Minibatch size");
  app->add_option("--lr", t.learning_rate, "Learning rate");
  app->add_option("--prune", t.prune_threshold, "Magnitude pruning: |code| <= value snaps to 0");
  app->add_option("--retrain-epochs", t.retrain_epochs, "Epochs per schedule point");
  app->add_option("--restarts", t.restarts, "Delay-selection restarts");
  app->add_option("--power-start", t.power_start, "First power threshold (uW)");
  app->add_option("--power-step", t.power_step, "Power threshold decrement (uW)");
  app->add_option("--power-floor", t.power_floor, "Lowest power threshold (uW)");
  app->add_option("--power-stop", t.power_stop_fraction, "Relative accuracy drop ending the power phase");
  app->add_option("--delay-start", t.delay_start, "First delay threshold (ps); default derived");
  app->add_option("--delay-step", t.delay_step, "Delay threshold decrement (ps)");
  app->add_option("--delay-floor", t.delay_floor, "Lowest delay threshold (ps); default psum bound");
  app->add_option("--delay-stop", t.delay_stop_fraction, "Relative accuracy drop ending the delay phase");
}

std::vector<int> ParseWeightList(const std::string& s) {
  std::vector<int> out;
  size_t pos = 0;
  while (pos <= s.size() && !s.empty()) {
    const size_t comma = s.find(',', pos);
    const std::string item = s.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    try {
      size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      Fail(ErrorCode::kConfig, "bad weight '" + item + "' in --weights");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Power- and timing-aware value selection for MAC-based accelerators"};
  app.require_subcommand(1);
  Common common;
  if (const char* env = std::getenv("MACSEL_OUT_DIR"); env != nullptr && *env != '\0') {
    common.out_dir = env;
  } else {
    common.out_dir = "macsel_out";
  }
  app.add_option("--seed", common.seed, "Seed for every random choice")->capture_default_str();
  app.add_option("--jobs,-j", common.jobs, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out,-o", common.out_dir, "Output directory (env MACSEL_OUT_DIR)");
  app.add_option("--cell-library", common.cell_library, "Cell library JSON");
  app.add_option("--multiplier", common.multiplier, "Multiplier architecture")
      ->check(CLI::IsMember({"sign-magnitude", "baugh-wooley"}));

  DatagenOptions datagen;
  auto* datagen_cmd = app.add_subcommand("datagen", "Write a generated dataset");
  AddDataOptions(datagen_cmd, datagen.data);

  TrainOptions train;
  auto* train_cmd = app.add_subcommand("train", "Train, or run one threshold schedule");
  AddDataOptions(train_cmd, train.data);
  AddTrainOptions(train_cmd, train.cfg, train.hidden);
  train_cmd->add_option("--selection", train.selection, "Selection JSON restricting the values");
  train_cmd->add_option("--init", train.init, "Latent checkpoint to continue from");
  train_cmd->add_option("--schedule", train.schedule, "Threshold schedule")
      ->check(CLI::IsMember({"none", "power", "delay"}));
  train_cmd->add_option("--power-profile", train.power_profile, "Power profile (json or csv)");
  train_cmd->add_option("--delay-profile", train.delay_profile, "Delay profile (.bin)");
  train_cmd->add_option("--baseline-accuracy", train.baseline_accuracy, "Reference accuracy");

  WorkloadOptions workload;
  auto* workload_cmd = app.add_subcommand("workload", "Run a model on the systolic array");
  AddDataOptions(workload_cmd, workload.data);
  AddArrayOptions(workload_cmd, workload.array);
  workload_cmd->add_option("--model", workload.model, "Model checkpoint JSON")->required();
  workload_cmd->add_option("--samples", workload.samples, "Test samples to stream");

  CharacterizeOptions characterize;
  std::string weight_list;
  bool no_power = false, no_delay = false;
  auto* char_cmd = app.add_subcommand("characterize", "Per-weight power and delay profiles");
  char_cmd->add_option("--stats", characterize.stats, "Workload statistics JSON; uniform traffic if omitted");
  char_cmd->add_option("--samples", characterize.samples, "Sampled transitions per weight");
  char_cmd->add_option("--bins", characterize.bins, "Partial-sum bins");
  char_cmd->add_option("--weights", weight_list, "Comma-separated weights (default all 255)");
  char_cmd->add_flag("--no-power", no_power, "Skip the power profile");
  char_cmd->add_flag("--no-delay", no_delay, "Skip the delay profile");

  SelectOptions select;
  select.power_threshold = std::numeric_limits<double>::infinity();
  select.delay_threshold = std::numeric_limits<double>::infinity();
  auto* select_cmd = app.add_subcommand("select", "Select weight and activation values");
  select_cmd->add_option("--power-profile", select.power_profile, "Power profile (json or csv)");
  select_cmd->add_option("--delay-profile", select.delay_profile, "Delay profile (.bin)");
  select_cmd->add_option("--power-threshold", select.power_threshold, "uW; inf keeps every weight");
  select_cmd->add_option("--delay-threshold", select.delay_threshold, "ps; inf skips delay selection");
  select_cmd->add_option("--restarts", select.restarts, "Randomized restarts")->check(CLI::PositiveNumber);

  EstimateOptions estimate;
  auto* estimate_cmd = app.add_subcommand("estimate", "Array power of one model");
  AddDataOptions(estimate_cmd, estimate.data);
  AddArrayOptions(estimate_cmd, estimate.array);
  estimate_cmd->add_option("--model", estimate.model, "Model checkpoint JSON")->required();
  estimate_cmd->add_option("--power-profile", estimate.power_profile, "Power profile")->required();
  estimate_cmd->add_option("--delay-profile", estimate.delay_profile, "Delay profile for voltage scaling");
  estimate_cmd->add_option("--samples", estimate.samples, "Test samples to stream");
  estimate_cmd->add_flag("--extrapolate-voltage", estimate.extrapolate_voltage,
                         "Extend the voltage model past its last anchor");

  ReportOptions report;
  auto* report_cmd = app.add_subcommand("report", "Tradeoff table over schedule points");
  AddDataOptions(report_cmd, report.data);
  AddArrayOptions(report_cmd, report.array);
  report_cmd->add_option("--schedule", report.schedule, "schedule.json")->required();
  report_cmd->add_option("--power-profile", report.power_profile, "Power profile")->required();
  report_cmd->add_option("--delay-profile", report.delay_profile, "Delay profile for voltage scaling");
  report_cmd->add_option("--samples", report.samples, "Test samples to stream");
  report_cmd->add_flag("--extrapolate-voltage", report.extrapolate_voltage,
                       "Extend the voltage model past its last anchor");

  PipelineOptions pipeline;
  auto* pipeline_cmd = app.add_subcommand("pipeline", "Train, characterize, select, estimate, report");
  AddDataOptions(pipeline_cmd, pipeline.data);
  AddArrayOptions(pipeline_cmd, pipeline.array);
  AddTrainOptions(pipeline_cmd, pipeline.cfg, pipeline.hidden);
  pipeline_cmd->add_option("--samples", pipeline.characterize.samples, "Sampled transitions per weight");
  pipeline_cmd->add_option("--bins", pipeline.characterize.bins, "Partial-sum bins");
  pipeline_cmd->add_option("--workload-samples", pipeline.workload_samples, "Test samples on the array");
  pipeline_cmd->add_option("--delay-profile", pipeline.delay_profile, "Reuse a full delay profile");
  pipeline_cmd->add_flag("--extrapolate-voltage", pipeline.extrapolate_voltage,
                         "Extend the voltage model past its last anchor");

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  CLI::App* cmd = app.get_subcommands().front();
  const std::string name = cmd->get_name();
  const std::vector<std::string> args(argv, argv + argc);
  const auto wall = std::chrono::system_clock::now();
  const auto start = std::chrono::steady_clock::now();
  int code = 0;
  try {
    characterize.weights = ParseWeightList(weight_list);
    characterize.power = !no_power;
    characterize.delay = !no_delay;
    if (name == "datagen") code = Datagen(common, datagen);
    if (name == "train") code = TrainCmd(common, train);
    if (name == "workload") code = WorkloadCmd(common, workload);
    if (name == "characterize") code = Characterize(common, characterize);
    if (name == "select") code = Select(common, select);
    if (name == "estimate") code = Estimate(common, estimate);
    if (name == "report") code = Report(common, report);
    if (name == "pipeline") code = Pipeline(common, pipeline);
  } catch (const Error& e) {
    std::fprintf(stderr, "macsel %s: %s error: %s\n", name.c_str(),
                 std::string(ErrorCodeName(e.code())).c_str(), e.what());
    code = ExitCodeFor(e.code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "macsel %s: %s\n", name.c_str(), e.what());
    code = 2;
  }
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  try {
    WriteRunMeta(common.out_dir, name, args,
                 std::chrono::duration<double>(wall.time_since_epoch()).count(), elapsed, code);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "macsel: could not write run_meta.json: %s\n", e.what());
  }
  return code;
}
