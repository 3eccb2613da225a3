// Copyright 2026 The splitsim Authors
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


#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "splitsim/cli/commands.h"
#include "splitsim/cli/config.h"
#include "splitsim/errors.h"

namespace splitsim::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

ExperimentConfig Parse(const json& user) { return ParseConfig(MergeConfig(user)); }

std::string ErrorOf(const json& user) {
  try {
    Parse(user);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

TEST(Config, DefaultsParse) {
  ExperimentConfig c = Parse(json::object());
  EXPECT_EQ(c.seed, 1u);
  EXPECT_EQ(c.model.s_max, 6);
  EXPECT_EQ(c.clients.n, 3);
  EXPECT_EQ(c.clients.alpha, (std::vector<double>{0.5, 0.5, 0.5}));
  EXPECT_DOUBLE_EQ(c.optimizer.beta, 0.95);
  EXPECT_FALSE(c.optimizer.t_fsim.has_value());
  EXPECT_EQ(c.privacy.attack.iterations, 400);
}

TEST(Config, UnknownKeyIsNamed) {
  EXPECT_NE(ErrorOf({{"training", {{"epoch", 3}}}}).find("'training.epoch'"),
            std::string::npos);
}

TEST(Config, BadValuesNameTheirField) {
  EXPECT_NE(ErrorOf({{"optimizer", {{"beta", 1.5}}}}).find("optimizer.beta"),
            std::string::npos);
  EXPECT_NE(ErrorOf({{"clients", {{"alpha", {0.2, 1.2, 0.4}}}}}).find("clients.alpha"),
            std::string::npos);
  EXPECT_NE(ErrorOf({{"reconstruct", {{"sigmas", {1.0, 0.5}}}}}).find("reconstruct.sigmas"),
            std::string::npos);
  EXPECT_NE(ErrorOf({{"mia", {{"split_point", 9}}}}).find("mia.split_point"),
            std::string::npos);
}

TEST(Config, EmptyRosterIsRejected) {
  EXPECT_NE(ErrorOf({{"clients", {{"n", 0}}}}).find("roster is empty"), std::string::npos);
}

TEST(Config, PerClientAlphaRoster) {
  std::vector<double> alpha{0.4, 0.2, 0.5, 0.9, 0.7, 0.3, 0.8};
  ExperimentConfig c = Parse({{"clients", {{"n", 7}, {"alpha", alpha}}}});
  EXPECT_EQ(c.clients.alpha, alpha);
  EXPECT_EQ(c.clients.devices.size(), 7u);
  EXPECT_FALSE(ErrorOf({{"clients", {{"n", 6}, {"alpha", alpha}}}}).empty());
}

TEST(Config, LastLayerMustMatchClasses) {
  json layers = {"conv2d:4", "relu", "maxpool", "dense:3"};
  EXPECT_NE(ErrorOf({{"model", {{"layers", layers}, {"s_max", 3}}}}).find("model.layers"), std::string::npos);
}

TEST(Config, OverridesParseJsonThenFallBackToString) {
  json cfg = DefaultConfigJson();
  ApplyOverride(cfg, "training.lr=0.01");
  ApplyOverride(cfg, "training.noise_family=gaussian");
  ApplyOverride(cfg, "clients.alpha=[0.1,0.9]");
  EXPECT_DOUBLE_EQ(cfg["training"]["lr"].get<double>(), 0.01);
  EXPECT_EQ(cfg["training"]["noise_family"], "gaussian");
  EXPECT_EQ(cfg["clients"]["alpha"].size(), 2u);
  EXPECT_THROW(ApplyOverride(cfg, "no_equals_sign"), ConfigError);
}

TEST(Config, HashTracksContent) {
  json a = MergeConfig(json::object());
  json b = MergeConfig({{"seed", 2}});
  EXPECT_EQ(ConfigHash(a), ConfigHash(MergeConfig(json::object())));
  EXPECT_NE(ConfigHash(a), ConfigHash(b));
  EXPECT_EQ(ConfigHash(a).size(), 16u);
}

TEST(Config, SyntaxErrorsBecomeConfigErrors) {
  EXPECT_THROW(ParseConfigText("{\"seed\": }"), ConfigError);
}

TEST(LayerTokens, RoundTrip) {
  for (const char* t : {"conv2d:4", "conv2d:8:5", "dense:16", "relu", "maxpool", "batchnorm"}) {
    EXPECT_EQ(LayerToken(ParseLayerToken(t)), t);
  }
  EXPECT_THROW(ParseLayerToken("dense"), ConfigError);
  EXPECT_THROW(ParseLayerToken("lstm:4"), ConfigError);
}

TEST(Summarize, HandSummedFixture) {
  std::vector<bilevel::SplitDecision> d(2);
  d[0].client_id = 0;
  d[0].fsim = 0.25;
  d[1].client_id = 1;
  d[1].fsim = 0.5;
  protocol::TrainingRecord rec;
  protocol::EpochRecord e1{0, 0.6, 1.0, false, {0, 1}, {{0, 1.0, 2.0, 0.0, 1.0}, {1, 0.5, 0.5, 1.0, 1.0}}};
  protocol::EpochRecord e2{1, 0.7, 0.9, true, {1}, {{1, 1.0, 1.0, 0.0, 1.0}}};
  rec.epochs = {e1, e2};
  Summary s = Summarize(d, rec);
  EXPECT_DOUBLE_EQ(s.accuracy, 0.7);
  EXPECT_DOUBLE_EQ(s.fsim_total, 0.75);
  EXPECT_DOUBLE_EQ(s.mean_epoch_energy, (3.0 + 2.0 + 2.0) / 2.0);
  EXPECT_DOUBLE_EQ(s.client_energy[0], 1.5);
  EXPECT_DOUBLE_EQ(s.client_energy[1], 2.0);
}

TEST(Assignment, RoundTrips) {
  std::vector<bilevel::SplitDecision> d(2);
  d[0] = {0, 2, 0.75, 0.41, 0.5, 0.455, 1.2, 2.0, {1, 3}};
  d[1] = {1, 3, 0.25, 0.38, 1.0, 0.504, 1.7, 2.0, {2, 3}};
  std::stringstream ss;
  WriteAssignment(ss, d, {0.3, 0.8});
  std::vector<bilevel::SplitDecision> back = ReadAssignment(ss);
  ASSERT_EQ(back.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(back[i].client_id, d[i].client_id);
    EXPECT_EQ(back[i].split_point, d[i].split_point);
    EXPECT_DOUBLE_EQ(back[i].sigma, d[i].sigma);
    EXPECT_DOUBLE_EQ(back[i].fsim, d[i].fsim);
    EXPECT_EQ(back[i].range.lo, d[i].range.lo);
    EXPECT_EQ(back[i].range.hi, d[i].range.hi);
  }
}

// Runs the tool in a scratch directory with a deliberately tiny workload.
class CliRun : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("splitsim_cli_" + std::string(::testing::UnitTest::GetInstance()
                                               ->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    json cfg = {
        {"model", {{"s_max", 3}}},
        {"data", {{"samples_per_client", 16}, {"test_samples", 40}, {"public_samples", 16}}},
        {"training", {{"epochs", 2}}},
        {"reference", {{"epochs", 2}}},
        {"optimizer", {{"probe_epochs", 1}, {"max_rounds", 2}}},
        {"privacy", {{"sigma_step", 1.25}, {"samples", 2}, {"iterations", 5}}},
        {"reconstruct", {{"sigmas", {0.0, 1.0}}, {"samples", 2}}},
        {"mia", {{"cases", {{{"shadow_stage", 2}, {"target_stage", 2}}}}, {"members", 8}}},
        {"scaling", {{"counts", {1, 2}}}}};
    std::ofstream(dir_ / "cfg.json") << cfg.dump(2);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int Run(std::vector<std::string> args, const std::string& out = "out") {
    std::vector<std::string> full{"splitsim", "--config", (dir_ / "cfg.json").string(),
                                  "--out", (dir_ / out).string()};
    full.insert(full.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (std::string& a : full) argv.push_back(a.data());
    out_.str("");
    err_.str("");
    return RunCli(static_cast<int>(argv.size()), argv.data(), out_, err_);
  }

  std::string Slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

TEST_F(CliRun, MissingPrerequisiteIsDependencyError) {
  EXPECT_EQ(Run({"optimize"}), 3);
  EXPECT_NE(err_.str().find("missing prerequisite"), std::string::npos);
  EXPECT_NE(err_.str().find("splitsim profile"), std::string::npos);
}

TEST_F(CliRun, ConfigErrorsExitWithTwo) {
  EXPECT_EQ(Run({"--override", "optimizer.beta=3", "print-config"}), 2);
  EXPECT_NE(err_.str().find("optimizer.beta"), std::string::npos);
  EXPECT_EQ(Run({"no-such-command"}), 2);
}

TEST_F(CliRun, PipelineIsByteIdenticalAcrossRuns) {
  const std::vector<std::vector<std::string>> steps = {
      {"profile", "privacy"}, {"profile", "energy"}, {"optimize"}, {"train"},
      {"attack", "reconstruct"}, {"report"}};
  for (const char* out : {"a", "b"}) {
    for (const auto& step : steps) ASSERT_EQ(Run(step, out), 0) << step[0] << ": " << err_.str();
  }
  int compared = 0;
  for (const auto& entry : fs::directory_iterator(dir_ / "a")) {
    fs::path other = dir_ / "b" / entry.path().filename();
    ASSERT_TRUE(fs::exists(other)) << other;
    EXPECT_EQ(Slurp(entry.path()), Slurp(other)) << entry.path().filename();
    ++compared;
  }
  EXPECT_GE(compared, 10);
  std::string summary = Slurp(dir_ / "a" / "summary.tsv");
  EXPECT_EQ(summary.rfind("# tool\tsplitsim 0.1.0", 0), 0u);
  EXPECT_NE(summary.find("# config_hash\t"), std::string::npos);
}

TEST_F(CliRun, ScalingWritesOneRowPerCount) {
  ASSERT_EQ(Run({"profile", "privacy"}), 0) << err_.str();
  ASSERT_EQ(Run({"--override", "scaling.counts=[1,2,3,4]", "scaling"}), 0) << err_.str();
  std::istringstream in(Slurp(dir_ / "out" / "scaling.tsv"));
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#' && std::isdigit(static_cast<unsigned char>(line[0]))) ++rows;
  }
  EXPECT_EQ(rows, 4);
}

TEST_F(CliRun, SeedFlagChangesHeader) {
  ASSERT_EQ(Run({"--seed", "7", "print-config"}), 0);
  EXPECT_NE(out_.str().find("\"seed\": 7"), std::string::npos);
}

}  // namespace
}  // namespace splitsim::cli
