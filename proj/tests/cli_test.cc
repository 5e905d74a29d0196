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

// Drives the installed-style macsel binary and checks exit codes and the
// files each subcommand leaves behind.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::path(MACSEL_TEST_SCRATCH) /
           ::testing::UnitTest::GetInstance()->current_test_info()->name();
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }

  int Run(const std::string& args) const {
    const std::string cmd = std::string(MACSEL_CLI) + " --out " + dir_.string() + " " + args + " >" +
                            (dir_ / "stdout.txt").string() + " 2>" + (dir_ / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string Slurp(const std::string& name) const {
    std::ifstream in(dir_ / name);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  int Lines(const std::string& name) const {
    const std::string text = Slurp(name);
    return static_cast<int>(std::count(text.begin(), text.end(), '\n'));
  }

  fs::path dir_;
};

TEST_F(CliTest, CharacterizeSingleWeightPowerOnly) {
  ASSERT_EQ(Run("characterize --weights 0 --no-delay --samples 200"), 0) << Slurp("stderr.txt");
  EXPECT_EQ(Lines("power_profile.csv"), 2);  // header + one row
  EXPECT_FALSE(fs::exists(dir_ / "delay_profile.bin"));
  EXPECT_TRUE(fs::exists(dir_ / "run_meta.json"));
}

TEST_F(CliTest, MissingCellLibraryIsConfigError) {
  EXPECT_EQ(Run("--cell-library /nonexistent/lib.json characterize --weights 0 --no-delay"), 2);
  EXPECT_NE(Slurp("stderr.txt").find("/nonexistent/lib.json"), std::string::npos);
}

TEST_F(CliTest, UnknownOptionExitsTwo) { EXPECT_EQ(Run("select --bogus"), 2); }

TEST_F(CliTest, DelayThresholdBelowPartialSumBoundIsInfeasible) {
  ASSERT_EQ(Run("characterize --weights=0,5 --no-power"), 0) << Slurp("stderr.txt");
  EXPECT_EQ(Run("select --delay-profile " + (dir_ / "delay_profile.bin").string() +
                " --delay-threshold 10"),
            3);
  EXPECT_NE(Slurp("stderr.txt").find("infeasible"), std::string::npos);
}

TEST_F(CliTest, SelectInfKeepsProfileWeights) {
  ASSERT_EQ(Run("characterize --weights=-3,0,5 --no-delay --samples 200"), 0);
  ASSERT_EQ(Run("select --power-profile " + (dir_ / "power_profile.json").string() +
                " --power-threshold inf"),
            0);
  const auto sel = nlohmann::json::parse(Slurp("selection.json"));
  EXPECT_EQ(sel.at("weights").size(), 3u);
}

TEST_F(CliTest, TrainThenReportTwoThresholds) {
  const std::string data = " --synthetic blobs --train-count 300 --test-count 100";
  ASSERT_EQ(Run("train --hidden 16 --epochs 2" + data), 0) << Slurp("stderr.txt");
  ASSERT_EQ(Run("characterize --no-delay --samples 50"), 0);
  ASSERT_EQ(Run("train --hidden 16 --epochs 2 --retrain-epochs 1 --schedule power --power-start 1200"
                " --power-step 400 --power-floor 700 --power-stop 1 --init " +
                (dir_ / "latent.json").string() + " --power-profile " +
                (dir_ / "power_profile.json").string() + data),
            0)
      << Slurp("stderr.txt");
  ASSERT_EQ(Run("report --schedule " + (dir_ / "schedule.json").string() + " --power-profile " +
                (dir_ / "power_profile.json").string() + " --samples 20" + data),
            0)
      << Slurp("stderr.txt");
  EXPECT_EQ(Lines("tradeoff.csv"), 3);  // header + thresholds 1200 and 800
}

}  // namespace
