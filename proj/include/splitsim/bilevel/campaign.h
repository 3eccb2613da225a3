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

#ifndef SPLITSIM_BILEVEL_CAMPAIGN_H_
#define SPLITSIM_BILEVEL_CAMPAIGN_H_

#include <cstdint>
#include <optional>
#include <vector>

#include "splitsim/bilevel/optimizer.h"
#include "splitsim/nn/layer.h"
#include "splitsim/protocol/protocol.h"
#include "splitsim/sim/dataset.h"

namespace splitsim::bilevel {

struct CampaignClient {
  int id = 0;
  double alpha = 0.5;
  sim::Dataset data;
  sim::EnergyPowerProfile profile;
};

struct CampaignSetup {
  nn::ModelSpec arch;
  int s_max = 1;
  std::vector<CampaignClient> clients;
  sim::Dataset test;
  protocol::TrainingConfig training;
  int epochs = 30;
  std::optional<protocol::AttendanceSchedule> schedule;
};

struct CampaignResult {
  protocol::TrainingRecord record;
  nn::LayeredModel global;  // averaged prefix followed by the server tail
};

// Fresh model from `init`, one client per decision (matched by id), split
// training for setup.epochs. Throws ArgumentError when a decision names an
// unknown client.
CampaignResult RunCampaign(const CampaignSetup& setup,
                           const std::vector<SplitDecision>& decisions,
                           sim::RngStream init, sim::RngStream train);

// AccuracyProbe that runs a shortened campaign per round. Every round
// starts from the same initial weights.
class SplitLearningProbe {
 public:
  SplitLearningProbe(CampaignSetup setup, std::uint64_t seed)
      : setup_(std::move(setup)), seed_(seed) {}

  double operator()(const std::vector<SplitDecision>& decisions, int round);
  const std::vector<protocol::TrainingRecord>& records() const { return records_; }

 private:
  CampaignSetup setup_;
  std::uint64_t seed_;
  std::vector<protocol::TrainingRecord> records_;
};

}  // namespace splitsim::bilevel

#endif  // SPLITSIM_BILEVEL_CAMPAIGN_H_
