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

#include "splitsim/bilevel/campaign.h"

#include <set>
#include <string>

#include "splitsim/errors.h"

namespace splitsim::bilevel {

CampaignResult RunCampaign(const CampaignSetup& setup,
                           const std::vector<SplitDecision>& decisions,
                           sim::RngStream init, sim::RngStream train) {
  protocol::Server server(nn::BuildModel(setup.arch, init), setup.s_max,
                          setup.training.aggregation_period);
  std::vector<protocol::ClientState> clients;
  for (const SplitDecision& d : decisions) {
    const CampaignClient* found = nullptr;
    for (const CampaignClient& c : setup.clients) {
      if (c.id == d.client_id) found = &c;
    }
    if (found == nullptr) {
      throw ArgumentError("decision for unknown client " + std::to_string(d.client_id));
    }
    protocol::ClientState state;
    state.id = found->id;
    state.alpha = found->alpha;
    state.split_point = d.split_point;
    state.noise_level = d.sigma;
    state.prefix = server.InitialPrefix(d.split_point);
    state.data = found->data;
    state.profile = found->profile;
    clients.push_back(std::move(state));
  }
  CampaignResult result;
  result.record = protocol::RunTraining(clients, server, setup.schedule, setup.epochs,
                                        setup.test, setup.training, train);
  std::set<int> participated;
  for (const protocol::EpochRecord& e : result.record.epochs) {
    participated.insert(e.present.begin(), e.present.end());
  }
  std::vector<const protocol::ClientState*> evaluated;
  for (const protocol::ClientState& c : clients) {
    if (participated.count(c.id)) evaluated.push_back(&c);
  }
  nn::LayeredModel prefix =
      evaluated.empty()
          ? nn::SliceModel(server.global(), 0, static_cast<std::size_t>(setup.s_max))
          : protocol::AveragedPrefix(server, evaluated);
  result.global = nn::ConcatModels(
      prefix, nn::SliceModel(server.global(), static_cast<std::size_t>(setup.s_max),
                             server.global().depth()));
  return result;
}

double SplitLearningProbe::operator()(const std::vector<SplitDecision>& decisions,
                                      int round) {
  sim::RngStream root(seed_);
  CampaignResult r = RunCampaign(setup_, decisions, root.derive("probe-init"),
                                 root.path("probe", static_cast<std::uint64_t>(round)));
  records_.push_back(r.record);
  return r.record.final_accuracy();
}

}  // namespace splitsim::bilevel
