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

#ifndef SPLITSIM_CLI_COMMANDS_H_
#define SPLITSIM_CLI_COMMANDS_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "splitsim/attack/mia.h"
#include "splitsim/attack/t_fsim.h"
#include "splitsim/bilevel/campaign.h"
#include "splitsim/bilevel/optimizer.h"
#include "splitsim/cli/config.h"
#include "splitsim/profiler/privacy_table.h"
#include "splitsim/profiler/reference.h"

namespace splitsim::cli {

// Resolved configuration plus the provenance every output file carries.
struct RunContext {
  nlohmann::json resolved;
  ExperimentConfig config;
  std::string hash;
  std::string out_dir = "out";
};

// Defaults, then the config file (if any), then --seed, then overrides in
// order.
RunContext LoadContext(const std::optional<std::string>& config_path,
                       const std::optional<std::uint64_t>& seed,
                       const std::vector<std::string>& overrides,
                       const std::string& out_dir);

// "# tool", "# config_hash", "# seed" lines.
void WriteTsvHeader(std::ostream& os, const RunContext& ctx);
// {"header":{"tool","config_hash","seed"}}
nlohmann::json JsonHeader(const RunContext& ctx);

sim::FederatedData MakeClientData(const ExperimentConfig& cfg);
// Attacker/reference pool: one training share plus a test split whose first
// samples are the ones attacked.
sim::FederatedData MakePublicData(const ExperimentConfig& cfg);
std::vector<sim::EnergyPowerProfile> MakeProfiles(const ExperimentConfig& cfg);

struct PrivacyStage {
  profiler::ReferenceResult reference;
  profiler::PrivacyTableBuild build;
  attack::TFsimResult tfsim;
  double t_fsim = 0.0;
  bool t_fsim_auto = true;
  double a_min = 0.0;
};
PrivacyStage RunPrivacyStage(const ExperimentConfig& cfg);

struct Thresholds {
  double a_ref = 0.0;
  double beta = 0.0;
  double a_min = 0.0;
  double t_fsim = 0.0;
};
void WriteThresholds(std::ostream& os, const PrivacyStage& stage, double beta);
Thresholds ReadThresholds(std::istream& is);

bilevel::CampaignSetup MakeCampaignSetup(const ExperimentConfig& cfg,
                                         const sim::FederatedData& data,
                                         const std::vector<sim::EnergyPowerProfile>& profiles,
                                         int epochs);

// Probe-driven bi-level search over the given roster.
bilevel::OptimizeResult RunOptimizeStage(const ExperimentConfig& cfg,
                                         const sim::FederatedData& data,
                                         const std::vector<sim::EnergyPowerProfile>& profiles,
                                         const profiler::PrivacyLeakageTable& plt,
                                         const Thresholds& thresholds);

bilevel::CampaignResult RunTrainStage(const ExperimentConfig& cfg,
                                      const sim::FederatedData& data,
                                      const std::vector<sim::EnergyPowerProfile>& profiles,
                                      const std::vector<bilevel::SplitDecision>& decisions);

void WriteAssignment(std::ostream& os, const std::vector<bilevel::SplitDecision>& decisions,
                     const std::vector<double>& alpha);
// Columns client, s, sigma, fsim are required; others are carried along.
std::vector<bilevel::SplitDecision> ReadAssignment(std::istream& is);

struct Summary {
  double accuracy = 0.0;         // A_t after the last epoch
  double fsim_total = 0.0;       // sum over clients of FSIM(sigma_i, s_i)
  double mean_epoch_energy = 0.0;  // mean over epochs of the summed client energy
  int clients = 0;
  int epochs = 0;
  std::vector<double> client_energy;  // mean per epoch, by decision order
};
Summary Summarize(const std::vector<bilevel::SplitDecision>& decisions,
                  const protocol::TrainingRecord& record);

struct ScalingRow {
  int n = 0;
  double accuracy = 0.0;
  double fsim_total = 0.0;
  double a_min = 0.0;
  int rounds = 0;
  bool converged = false;
  double fsim_per_client() const { return n > 0 ? fsim_total / n : 0.0; }
};
// Optimize then train for each client count. Total training data and the
// accuracy threshold stay fixed; devices, alphas and profile files are
// cloned round-robin from the configured roster.
ScalingRow RunScalingPoint(const ExperimentConfig& cfg, int n,
                           const profiler::PrivacyLeakageTable& plt,
                           const Thresholds& thresholds);

std::vector<attack::MiaResult> RunMiaStage(const ExperimentConfig& cfg);

// Parses argv and dispatches. Returns the process exit status: 0 success,
// 1 runtime failure, 2 config or usage error, 3 missing prerequisite.
int RunCli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace splitsim::cli

#endif  // SPLITSIM_CLI_COMMANDS_H_
