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

#include "commands.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <limits>

#include "json.hpp"
#include "macsel/cell_library.h"
#include "macsel/characterize.h"
#include "macsel/error.h"
#include "macsel/io.h"
#include "macsel/model.h"
#include "macsel/profile.h"
#include "macsel/rng.h"
#include "macsel/select.h"

namespace macsel::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Stream indices for DeriveSeed(--seed, ...). Keeping them in one place
// makes it easy to see that no two consumers share a stream.
enum SeedStream : uint64_t {
  kDataSeed = 100,
  kInitSeed = 10,
  kTrainSeed = 11,
  kArraySeed = 20,
  kBinSeed = 21,
  kSampleSeed = 22,
  kUniformStatsSeed = 23,
  kPowerScheduleSeed = 30,
  kDelayScheduleSeed = 40,
  kSelectSeed = 50,
};

void Log(const std::string& msg) { std::fprintf(stderr, "[macsel] %s\n", msg.c_str()); }

std::string OutPath(const Common& c, const std::string& name) {
  const fs::path p = fs::path(c.out_dir) / name;
  std::error_code ec;
  fs::create_directories(p.parent_path(), ec);
  if (ec) Fail(ErrorCode::kIo, "cannot create directory " + p.parent_path().string());
  return p.string();
}

CellLibrary Library(const Common& c) {
  return c.cell_library.empty() ? CellLibrary() : LoadCellLibrary(c.cell_library);
}

DatasetSplit LoadData(const DataOptions& o, uint64_t seed) {
  if (!o.dir.empty()) {
    if (o.format != "idx" && o.format != "csv") {
      Fail(ErrorCode::kConfig, "unknown dataset format '" + o.format + "'");
    }
    return LoadDatasetDir(o.dir, o.format == "idx" ? DatasetFormat::kIdx : DatasetFormat::kCsv);
  }
  if (o.train_count < 1 || o.test_count < 1) {
    Fail(ErrorCode::kConfig, "train and test counts must be >= 1");
  }
  const int total = o.train_count + o.test_count;
  Dataset all;
  if (o.synthetic == "digits") {
    all = GenerateDigits(total, DeriveSeed(seed, kDataSeed));
  } else if (o.synthetic == "blobs") {
    all = GenerateBlobs(total, 10, 64, 0.15, DeriveSeed(seed, kDataSeed));
  } else {
    Fail(ErrorCode::kConfig, "unknown synthetic dataset '" + o.synthetic + "'");
  }
  return {all.Slice(0, o.train_count), all.Slice(o.train_count, total)};
}

PowerProfile LoadPowerProfile(const std::string& path) {
  if (path.empty()) Fail(ErrorCode::kConfig, "a power profile is required");
  const std::string text = ReadFile(path);
  if (fs::path(path).extension() != ".csv") return PowerProfileFromJson(text);
  PowerProfile p;
  const auto rows = ParseCsv(text);
  if (rows.empty() || rows[0] != CsvRow{"weight", "power_uW"}) {
    Fail(ErrorCode::kParse, path + ": expected header weight,power_uW");
  }
  for (size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() != 2) Fail(ErrorCode::kParse, path + ":" + std::to_string(i + 1));
    p.dynamic_uw[int(ParseInt(rows[i][0], "weight"))] = ParseDouble(rows[i][1], "power");
  }
  return p;
}

DelayProfile LoadDelayProfile(const std::string& path) {
  if (path.empty()) Fail(ErrorCode::kConfig, "a delay profile is required");
  return DelayProfileFromBinary(ReadFile(path));
}

std::string Threshold(double t) { return std::isinf(t) ? "inf" : FormatDouble(t); }

// Voltage ratio reachable with the delay slack of `sel` relative to the
// unrestricted network. Fractions past the last anchor are clamped unless
// extrapolation is enabled.
double VoltageRatio(const DelayProfile& table, const Selection& sel,
                    const VoltageModel& m, bool extrapolate, Picoseconds* achieved) {
  if (table.weights.size() != size_t(kNumWeights)) {
    Fail(ErrorCode::kProfile, "voltage scaling needs a delay profile over all 255 weights");
  }
  const Picoseconds d0 = table.GlobalMax();
  *achieved = MaxSurvivingDelay(table, sel.weights, sel.acts);
  double fraction = double(d0 - *achieved) / double(d0);
  if (!extrapolate) fraction = std::min(fraction, m.anchors.back().first);
  return VoltageFactor(m, fraction, extrapolate);
}

json EstimateJson(const PowerEstimate& e) { return json::parse(PowerEstimateToJson(e)); }

struct PointPower {
  PowerEstimate standard;
  PowerEstimate optimized;
  PowerEstimate scaled;
  double voltage_ratio = 1.0;
  Picoseconds achieved = kNoPath;
};

PointPower PowerForNet(const QuantizedNet& net, const Dataset& test, int samples,
                       const ArrayConfig& array, const PowerProfile& profile,
                       const DelayProfile* table, bool extrapolate) {
  const SystolicResult run = RunSystolic(net, test, samples, array);
  PointPower p;
  p.standard = EstimateArrayPower(run.stats, profile, HwMode::kStandard);
  p.optimized = EstimateArrayPower(run.stats, profile, HwMode::kOptimized);
  const VoltageModel vm = DefaultVoltageModel();
  if (table != nullptr) {
    p.voltage_ratio = VoltageRatio(*table, net.selection, vm, extrapolate, &p.achieved);
  }
  p.scaled = ScalePower(p.optimized, p.voltage_ratio, vm);
  return p;
}

const CsvRow kLogHeader = {"phase", "threshold", "epoch", "loss", "accuracy"};
const CsvRow kTradeoffHeader = {"phase",        "threshold",    "n_weights",
                                "n_acts",       "accuracy",     "std_power_uW",
                                "opt_power_uW", "voltage_ratio", "scaled_power_uW"};

void AppendLog(std::vector<CsvRow>& rows, const std::string& phase, double threshold,
               const std::vector<EpochLog>& log) {
  for (const EpochLog& e : log) {
    rows.push_back({phase, Threshold(threshold), std::to_string(e.epoch),
                    FormatDouble(e.loss), FormatDouble(e.accuracy)});
  }
}

struct PointRecord {
  std::string phase;
  double threshold = std::numeric_limits<double>::infinity();
  double accuracy = 0.0;
  bool passed = true;
  bool best = false;
  std::string model;  // path relative to the output directory
  Selection selection;
};

std::string PointModelName(const std::string& phase, double threshold) {
  return "points/" + phase + "_" + Threshold(threshold) + ".json";
}

// Writes point checkpoints and returns their records.
std::vector<PointRecord> SavePoints(const Common& c, const ScheduleResult& r,
                                    std::vector<CsvRow>& log_rows) {
  std::vector<PointRecord> out;
  for (size_t i = 0; i < r.points.size(); ++i) {
    const SchedulePoint& p = r.points[i];
    PointRecord rec{p.phase, p.threshold, p.accuracy, p.passed, int(i) == r.best,
                    PointModelName(p.phase, p.threshold), p.selection};
    WriteFile(OutPath(c, rec.model), QuantizedNetToJson(p.net));
    AppendLog(log_rows, p.phase, p.threshold, p.log);
    out.push_back(std::move(rec));
  }
  return out;
}

json ScheduleJson(double baseline_accuracy, const std::vector<PointRecord>& points) {
  json j;
  j["baseline_accuracy"] = baseline_accuracy;
  j["points"] = json::array();
  for (const PointRecord& p : points) {
    j["points"].push_back({{"phase", p.phase},
                           {"threshold", std::isinf(p.threshold) ? json(nullptr) : json(p.threshold)},
                           {"accuracy", p.accuracy},
                           {"passed", p.passed},
                           {"best", p.best},
                           {"model", p.model},
                           {"selection", json::parse(SelectionToJson(p.selection))}});
  }
  return j;
}

std::vector<PointRecord> PointsFromJson(const json& j) {
  std::vector<PointRecord> out;
  for (const json& p : j.at("points")) {
    PointRecord rec;
    rec.phase = p.at("phase").get<std::string>();
    rec.threshold = p.at("threshold").is_null() ? std::numeric_limits<double>::infinity()
                                                : p.at("threshold").get<double>();
    rec.accuracy = p.at("accuracy").get<double>();
    rec.passed = p.at("passed").get<bool>();
    rec.best = p.at("best").get<bool>();
    rec.model = p.at("model").get<std::string>();
    rec.selection = SelectionFromJson(p.at("selection").dump());
    out.push_back(std::move(rec));
  }
  return out;
}

struct ReportResult {
  std::vector<CsvRow> rows;
  json summary;
};

// One tradeoff row per point. The summary compares the baseline on the
// standard array against the last best point on the gated array with
// voltage scaling.
ReportResult BuildReport(const std::vector<PointRecord>& points, const std::string& base_dir,
                         const Dataset& test, int samples, const ArrayConfig& array,
                         const PowerProfile& profile, const DelayProfile* table,
                         bool extrapolate) {
  ReportResult r;
  r.rows.push_back(kTradeoffHeader);
  std::optional<PointPower> baseline;
  std::optional<std::pair<PointRecord, PointPower>> final_point;
  for (const PointRecord& p : points) {
    const QuantizedNet net =
        QuantizedNetFromJson(ReadFile((fs::path(base_dir) / p.model).string()));
    const PointPower pw = PowerForNet(net, test, samples, array, profile, table, extrapolate);
    r.rows.push_back({p.phase, Threshold(p.threshold), std::to_string(net.selection.weights.size()),
                      std::to_string(net.selection.acts.size()), FormatDouble(p.accuracy),
                      FormatDouble(pw.standard.total_uw), FormatDouble(pw.optimized.total_uw),
                      FormatDouble(pw.voltage_ratio), FormatDouble(pw.scaled.total_uw)});
    if (p.phase == "baseline") baseline = pw;
    if (p.best || p.phase == "baseline") final_point = {p, pw};
  }
  if (baseline && final_point) {
    const auto& [fp, fw] = *final_point;
    const double base = baseline->standard.total_uw;
    r.summary = {
        {"baseline_standard_uW", base},
        {"baseline_optimized_uW", baseline->optimized.total_uw},
        {"final_phase", fp.phase},
        {"final_threshold", std::isinf(fp.threshold) ? json(nullptr) : json(fp.threshold)},
        {"final_accuracy", fp.accuracy},
        {"final_weights", fp.selection.weights.size()},
        {"final_acts", fp.selection.acts.size()},
        {"final_standard_uW", fw.standard.total_uw},
        {"final_optimized_uW", fw.optimized.total_uw},
        {"final_achieved_max_delay_ps", fw.achieved},
        {"final_voltage_ratio", fw.voltage_ratio},
        {"final_scaled_uW", fw.scaled.total_uw},
        {"reduction_total", base > 0 ? 1.0 - fw.scaled.total_uw / base : 0.0},
        {"reduction_optimized_hw_only", base > 0 ? 1.0 - fw.optimized.total_uw / base : 0.0},
    };
  }
  return r;
}

std::string Dump(const json& j) { return j.dump(2) + "\n"; }

std::string IsoTime(double unix_seconds) {
  const std::time_t t = static_cast<std::time_t>(unix_seconds);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInfeasible:
      return 3;
    case ErrorCode::kTraining:
    case ErrorCode::kSchedule:
      return 4;
    default:
      return 2;
  }
}

void WriteRunMeta(const std::string& out_dir, const std::string& command,
                  const std::vector<std::string>& argv, double started_unix,
                  double elapsed_s, int exit_code) {
  const fs::path path = fs::path(out_dir) / "run_meta.json";
  json meta = json::object();
  if (fs::exists(path)) {
    try {
      meta = json::parse(ReadFile(path.string()));
    } catch (const std::exception&) {
      meta = json::object();
    }
  }
  meta[command] = {{"argv", argv},
                   {"started", IsoTime(started_unix)},
                   {"elapsed_s", elapsed_s},
                   {"exit_code", exit_code}};
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  WriteFile(path.string(), Dump(meta));
}

int Datagen(const Common& c, const DatagenOptions& o) {
  DataOptions gen = o.data;
  gen.dir.clear();
  const DatasetSplit d = LoadData(gen, c.seed);
  if (o.data.format == "idx") {
    WriteIdx(d.train, OutPath(c, "train-images.idx3-ubyte"), OutPath(c, "train-labels.idx1-ubyte"));
    WriteIdx(d.test, OutPath(c, "test-images.idx3-ubyte"), OutPath(c, "test-labels.idx1-ubyte"));
  } else if (o.data.format == "csv") {
    WriteCsv(d.train, OutPath(c, "train.csv"));
    WriteCsv(d.test, OutPath(c, "test.csv"));
  } else {
    Fail(ErrorCode::kConfig, "unknown dataset format '" + o.data.format + "'");
  }
  Log("wrote " + std::to_string(d.train.rows) + " train / " + std::to_string(d.test.rows) +
      " test samples to " + c.out_dir);
  return 0;
}

int TrainCmd(const Common& c, const TrainOptions& o) {
  const DatasetSplit data = LoadData(o.data, c.seed);
  TrainConfig cfg = o.cfg;
  cfg.jobs = c.jobs;
  Mlp mlp = o.init.empty()
                ? Mlp({data.train.cols, o.hidden, data.train.num_classes}, DeriveSeed(c.seed, kInitSeed))
                : MlpFromJson(ReadFile(o.init));
  std::vector<CsvRow> log_rows = {kLogHeader};
  if (o.schedule == "none") {
    const Selection sel = o.selection.empty() ? FullSelection() : SelectionFromJson(ReadFile(o.selection));
    cfg.seed = DeriveSeed(c.seed, kTrainSeed);
    AppendLog(log_rows, "train", std::numeric_limits<double>::infinity(), Train(mlp, data.train, cfg, sel));
    const QuantizedNet net = mlp.Materialize(sel, cfg.prune_threshold);
    const double acc = EvaluateAccuracy(net, data.test);
    WriteFile(OutPath(c, "model.json"), QuantizedNetToJson(net));
    WriteFile(OutPath(c, "latent.json"), MlpToJson(mlp));
    WriteFile(OutPath(c, "train_log.csv"), EmitCsv(log_rows));
    WriteFile(OutPath(c, "metrics.json"), Dump({{"test_accuracy", acc}}));
    Log("test accuracy " + FormatDouble(acc));
    return 0;
  }
  const double baseline = o.baseline_accuracy.value_or(Evaluate(mlp, data.test, FullSelection()));
  ScheduleResult result;
  if (o.schedule == "power") {
    cfg.seed = DeriveSeed(c.seed, kPowerScheduleSeed);
    result = SchedulePowerThresholds(mlp, data, cfg, LoadPowerProfile(o.power_profile), baseline);
  } else if (o.schedule == "delay") {
    if (o.selection.empty()) Fail(ErrorCode::kConfig, "the delay schedule needs --selection");
    cfg.seed = DeriveSeed(c.seed, kDelayScheduleSeed);
    result = ScheduleDelayThresholds(mlp, data, cfg, LoadDelayProfile(o.delay_profile),
                                     SelectionFromJson(ReadFile(o.selection)), baseline);
  } else {
    Fail(ErrorCode::kConfig, "unknown schedule '" + o.schedule + "'");
  }
  const auto points = SavePoints(c, result, log_rows);
  WriteFile(OutPath(c, "schedule.json"), Dump(ScheduleJson(baseline, points)));
  WriteFile(OutPath(c, "train_log.csv"), EmitCsv(log_rows));
  if (result.best >= 0) {
    const SchedulePoint& best = result.points[result.best];
    WriteFile(OutPath(c, "model.json"), QuantizedNetToJson(best.net));
    WriteFile(OutPath(c, "latent.json"), MlpToJson(result.mlp));
    WriteFile(OutPath(c, "selection.json"), SelectionToJson(best.selection));
    Log(o.schedule + " schedule: best threshold " + Threshold(best.threshold) + ", accuracy " +
        FormatDouble(best.accuracy));
  } else {
    Log(o.schedule + " schedule: no threshold kept the accuracy");
  }
  return 0;
}

int WorkloadCmd(const Common& c, const WorkloadOptions& o) {
  const DatasetSplit data = LoadData(o.data, c.seed);
  const QuantizedNet net = QuantizedNetFromJson(ReadFile(o.model));
  ArrayConfig array = o.array;
  array.seed = DeriveSeed(c.seed, kArraySeed);
  const SystolicResult r = RunSystolic(net, data.test, o.samples, array);
  WriteFile(OutPath(c, "workload_stats.json"), WorkloadStatsToJson(r.stats));
  Log("workload: " + std::to_string(r.stats.total_act_transitions()) +
      " activation transitions, zero-weight fraction " + FormatDouble(r.stats.zero_weight_fraction));
  return 0;
}

namespace {

WorkloadStats UniformStats(uint64_t seed) {
  WorkloadStats s;
  std::fill(s.act_transition_counts.begin(), s.act_transition_counts.end(), 1);
  Rng rng(seed);
  for (int i = 0; i < 1 << 16; ++i) {
    const uint32_t a = uint32_t(rng.UniformInt(1u << kPsumBits));
    const uint32_t b = uint32_t(rng.UniformInt(1u << kPsumBits));
    s.psum_value_samples.push_back(a);
    s.psum_transition_samples.push_back({a, b});
  }
  return s;
}

json PowerSummary(const PowerProfile& p) {
  double sum = 0, pow2 = 0;
  int n_pow2 = 0;
  int argmin = p.dynamic_uw.begin()->first;
  for (const auto& [w, v] : p.dynamic_uw) {
    sum += v;
    if (v < p.dynamic_uw.at(argmin)) argmin = w;
    const int m = std::abs(w);
    if (m > 0 && (m & (m - 1)) == 0) {
      pow2 += v;
      ++n_pow2;
    }
  }
  json j = {{"weights", p.dynamic_uw.size()},
            {"samples", p.samples},
            {"leakage_uW", p.leakage_uw},
            {"argmin_weight", argmin},
            {"mean_uW", sum / double(p.dynamic_uw.size())}};
  if (n_pow2 > 0) j["power_of_two_mean_uW"] = pow2 / n_pow2;
  return j;
}

PowerProfile CharacterizePower(const Common& c, const WorkloadStats& stats, int samples, int bins,
                               const std::vector<int>& weights) {
  const ActDist ad = BuildActDist(stats.act_transition_counts);
  const BinPartition partition = BuildBins(stats.psum_value_samples, bins, DeriveSeed(c.seed, kBinSeed));
  const BinDist bd = BuildBinDist(stats.psum_transition_samples, partition);
  const auto transitions = SampleCombined(ad, bd, partition, samples, DeriveSeed(c.seed, kSampleSeed));
  const MacNetlist mac = GenMac(ParseMultiplierArch(c.multiplier));
  return PowerProfileAll(mac, Library(c), transitions, weights, c.jobs, DeriveSeed(c.seed, kSampleSeed));
}

DelayProfile CharacterizeDelay(const Common& c, const std::vector<int>& weights) {
  const CellLibrary lib = Library(c);
  const MultiplierArch arch = ParseMultiplierArch(c.multiplier);
  return BuildDelayProfile(GenMultiplier(arch), lib, AnalyzeAdder(GenAdder(), lib), weights, c.jobs,
                           arch);
}

void WritePower(const Common& c, const PowerProfile& p) {
  WriteFile(OutPath(c, "power_profile.csv"), PowerProfileToCsv(p));
  WriteFile(OutPath(c, "power_profile.json"), PowerProfileToJson(p));
  WriteFile(OutPath(c, "power_summary.json"), Dump(PowerSummary(p)));
}

void WriteDelay(const Common& c, const DelayProfile& d) {
  WriteFile(OutPath(c, "delay_profile.bin"), DelayProfileToBinary(d));
  WriteFile(OutPath(c, "delay_profile.json"), DelayProfileSummaryJson(d));
  WriteFile(OutPath(c, "delay_hist.csv"), DelayHistogramCsv(d));
}

}  // namespace

int Characterize(const Common& c, const CharacterizeOptions& o) {
  std::vector<int> weights = o.weights.empty() ? AllWeights() : o.weights;
  std::sort(weights.begin(), weights.end());
  weights.erase(std::unique(weights.begin(), weights.end()), weights.end());
  for (int w : weights) {
    if (w < kMinWeight || w > kMaxWeight) {
      Fail(ErrorCode::kRange, "weight " + std::to_string(w) + " outside -127..127");
    }
  }
  Library(c);  // surface a bad library before any long computation
  if (o.power) {
    const WorkloadStats stats = o.stats.empty() ? UniformStats(DeriveSeed(c.seed, kUniformStatsSeed))
                                                : WorkloadStatsFromJson(ReadFile(o.stats));
    const PowerProfile p = CharacterizePower(c, stats, o.samples, o.bins, weights);
    WritePower(c, p);
    Log("power profile: " + std::to_string(p.dynamic_uw.size()) + " weights");
  }
  if (o.delay) {
    const DelayProfile d = CharacterizeDelay(c, weights);
    WriteDelay(c, d);
    Log("delay profile: global max " + std::to_string(d.GlobalMax()) + " ps, partial-sum bound " +
        std::to_string(d.psum_bound) + " ps");
  }
  return 0;
}

int Select(const Common& c, const SelectOptions& o) {
  std::vector<int> weights;
  if (!o.power_profile.empty()) {
    const PowerProfile p = LoadPowerProfile(o.power_profile);
    if (std::isinf(o.power_threshold)) {
      for (const auto& [w, v] : p.dynamic_uw) weights.push_back(w);
    } else {
      weights = SelectWeightsByPower(p, o.power_threshold, o.protect.protected_weights);
    }
  } else if (std::isinf(o.power_threshold)) {
    weights = AllWeights();
  } else {
    Fail(ErrorCode::kConfig, "a power threshold needs --power-profile");
  }
  std::vector<int> acts(kNumActs);
  for (int a = 0; a < kNumActs; ++a) acts[a] = a;
  Selection sel;
  if (std::isinf(o.delay_threshold)) {
    sel.weights = weights;
    sel.acts = acts;
    if (!o.delay_profile.empty()) {
      sel.achieved_max_delay = MaxSurvivingDelay(LoadDelayProfile(o.delay_profile), weights, acts);
    }
  } else {
    if (!(o.delay_threshold >= 0) || o.delay_threshold > 65535) {
      Fail(ErrorCode::kRange, "delay threshold outside 0..65535 ps");
    }
    const DelayProfile table = LoadDelayProfile(o.delay_profile);
    sel = SelectForDelay(table, weights, acts, static_cast<Picoseconds>(std::floor(o.delay_threshold)),
                         o.restarts, DeriveSeed(c.seed, kSelectSeed), c.jobs, o.protect);
  }
  sel.power_threshold = o.power_threshold;
  sel.delay_threshold = o.delay_threshold;
  WriteFile(OutPath(c, "selection.json"), SelectionToJson(sel));
  Log("selection: " + std::to_string(sel.weights.size()) + " weights / " +
      std::to_string(sel.acts.size()) + " activations");
  return 0;
}

int Estimate(const Common& c, const EstimateOptions& o) {
  const DatasetSplit data = LoadData(o.data, c.seed);
  const QuantizedNet net = QuantizedNetFromJson(ReadFile(o.model));
  const PowerProfile profile = LoadPowerProfile(o.power_profile);
  std::optional<DelayProfile> table;
  if (!o.delay_profile.empty()) table = LoadDelayProfile(o.delay_profile);
  ArrayConfig array = o.array;
  array.seed = DeriveSeed(c.seed, kArraySeed);
  const PointPower p = PowerForNet(net, data.test, o.samples, array, profile,
                                   table ? &*table : nullptr, o.extrapolate_voltage);
  json j = {{"standard", EstimateJson(p.standard)},
            {"optimized", EstimateJson(p.optimized)},
            {"voltage_ratio", p.voltage_ratio},
            {"achieved_max_delay_ps", p.achieved},
            {"scaled", EstimateJson(p.scaled)}};
  WriteFile(OutPath(c, "estimate.json"), Dump(j));
  Log("standard " + FormatDouble(p.standard.total_uw) + " uW, optimized " +
      FormatDouble(p.optimized.total_uw) + " uW, scaled " + FormatDouble(p.scaled.total_uw) + " uW");
  return 0;
}

int Report(const Common& c, const ReportOptions& o) {
  const DatasetSplit data = LoadData(o.data, c.seed);
  const json schedule = json::parse(ReadFile(o.schedule));
  const auto points = PointsFromJson(schedule);
  const PowerProfile profile = LoadPowerProfile(o.power_profile);
  std::optional<DelayProfile> table;
  if (!o.delay_profile.empty()) table = LoadDelayProfile(o.delay_profile);
  ArrayConfig array = o.array;
  array.seed = DeriveSeed(c.seed, kArraySeed);
  const ReportResult r = BuildReport(points, fs::path(o.schedule).parent_path().string(), data.test,
                                     o.samples, array, profile, table ? &*table : nullptr,
                                     o.extrapolate_voltage);
  WriteFile(OutPath(c, "tradeoff.csv"), EmitCsv(r.rows));
  if (!r.summary.is_null()) WriteFile(OutPath(c, "summary.json"), Dump(r.summary));
  Log("tradeoff: " + std::to_string(r.rows.size() - 1) + " rows");
  return 0;
}

int Pipeline(const Common& c, const PipelineOptions& o) {
  const DatasetSplit data = LoadData(o.data, c.seed);
  TrainConfig cfg = o.cfg;
  cfg.jobs = c.jobs;
  cfg.Validate();
  Library(c);
  std::vector<CsvRow> log_rows = {kLogHeader};

  Log("training the baseline network");
  Mlp mlp({data.train.cols, o.hidden, data.train.num_classes}, DeriveSeed(c.seed, kInitSeed));
  cfg.seed = DeriveSeed(c.seed, kTrainSeed);
  const double inf = std::numeric_limits<double>::infinity();
  AppendLog(log_rows, "baseline", inf, Train(mlp, data.train, cfg, FullSelection()));
  const QuantizedNet base_net = mlp.Materialize(FullSelection());
  const double baseline = EvaluateAccuracy(base_net, data.test);
  WriteFile(OutPath(c, PointModelName("baseline", inf)), QuantizedNetToJson(base_net));
  WriteFile(OutPath(c, "latent_baseline.json"), MlpToJson(mlp));
  Log("baseline accuracy " + FormatDouble(baseline));
  std::vector<PointRecord> points = {
      {"baseline", inf, baseline, true, false, PointModelName("baseline", inf), FullSelection()}};

  if (cfg.prune_threshold > 0) {
    TrainConfig prune = cfg;
    prune.epochs = cfg.retrain_epochs;
    prune.seed = DeriveSeed(c.seed, kTrainSeed + 1);
    AppendLog(log_rows, "prune", cfg.prune_threshold, Train(mlp, data.train, prune, FullSelection()));
    const QuantizedNet net = mlp.Materialize(FullSelection(), cfg.prune_threshold);
    const std::string name = PointModelName("prune", cfg.prune_threshold);
    WriteFile(OutPath(c, name), QuantizedNetToJson(net));
    points.push_back({"prune", double(cfg.prune_threshold), EvaluateAccuracy(net, data.test), true,
                      false, name, FullSelection()});
  }

  Log("collecting workload statistics");
  ArrayConfig array = o.array;
  array.seed = DeriveSeed(c.seed, kArraySeed);
  const SystolicResult run = RunSystolic(base_net, data.test, o.workload_samples, array);
  WriteFile(OutPath(c, "workload_stats.json"), WorkloadStatsToJson(run.stats));

  Log("characterizing power over " + std::to_string(o.characterize.samples) + " transitions");
  const PowerProfile profile =
      CharacterizePower(c, run.stats, o.characterize.samples, o.characterize.bins, AllWeights());
  WritePower(c, profile);
  DelayProfile table;
  if (o.delay_profile.empty()) {
    Log("characterizing delay for all weights");
    table = CharacterizeDelay(c, AllWeights());
    WriteDelay(c, table);
  } else {
    table = LoadDelayProfile(o.delay_profile);
  }

  Log("power-threshold schedule");
  cfg.seed = DeriveSeed(c.seed, kPowerScheduleSeed);
  const ScheduleResult power = SchedulePowerThresholds(mlp, data, cfg, profile, baseline);
  for (auto& p : SavePoints(c, power, log_rows)) points.push_back(std::move(p));
  const SchedulePoint& power_best = power.points[power.best];
  Log("power phase kept " + std::to_string(power_best.selection.weights.size()) + " weights at " +
      Threshold(power_best.threshold) + " uW");

  Log("delay-threshold schedule");
  cfg.seed = DeriveSeed(c.seed, kDelayScheduleSeed);
  const ScheduleResult delay =
      ScheduleDelayThresholds(power.mlp, data, cfg, table, power_best.selection, baseline);
  for (auto& p : SavePoints(c, delay, log_rows)) points.push_back(std::move(p));
  // Only the final phase's best point counts as the result.
  if (delay.best >= 0) {
    for (PointRecord& p : points) p.best = p.best && p.phase == "delay";
  }
  const SchedulePoint& final_point = delay.best >= 0 ? delay.points[delay.best] : power_best;
  WriteFile(OutPath(c, "selection.json"), SelectionToJson(final_point.selection));
  WriteFile(OutPath(c, "model.json"), QuantizedNetToJson(final_point.net));
  WriteFile(OutPath(c, "schedule.json"), Dump(ScheduleJson(baseline, points)));
  WriteFile(OutPath(c, "train_log.csv"), EmitCsv(log_rows));

  Log("estimating power for " + std::to_string(points.size()) + " points");
  const ReportResult report = BuildReport(points, c.out_dir, data.test, o.workload_samples, array,
                                          profile, &table, o.extrapolate_voltage);
  WriteFile(OutPath(c, "tradeoff.csv"), EmitCsv(report.rows));
  WriteFile(OutPath(c, "summary.json"), Dump(report.summary));
  Log("total power reduction " + FormatDouble(report.summary.at("reduction_total").get<double>()));
  return 0;
}

}  // namespace macsel::cli
