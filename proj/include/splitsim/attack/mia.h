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

#ifndef SPLITSIM_ATTACK_MIA_H_
#define SPLITSIM_ATTACK_MIA_H_

#include <array>
#include <cstddef>
#include <vector>

#include "splitsim/nn/layer.h"
#include "splitsim/nn/model.h"
#include "splitsim/protocol/protocol.h"
#include "splitsim/sim/dataset.h"
#include "splitsim/sim/rng.h"

namespace splitsim::attack {

// Disjoint sample pools. Members train the corresponding run; non-members
// come from the same distribution and are never trained on.
struct MiaPools {
  sim::Dataset shadow_members;
  sim::Dataset shadow_nonmembers;
  sim::Dataset target_members;
  sim::Dataset target_nonmembers;
};

struct MiaOptions {
  nn::ModelSpec arch;
  int split_point = 1;
  int s_max = 1;
  int n_clients = 1;
  int shadow_stage_epochs = 10;
  int target_stage_epochs = 10;
  // Applied to both runs; the shadow replicates the target's training.
  double l2_lambda = 0.0;
  protocol::TrainingConfig training;
  // Null test: permute the target's membership labels before scoring.
  bool shuffle_membership = false;
};

struct MiaResult {
  double accuracy = 0.5;  // balanced accuracy on the target pools
  int shadow_stage = 0;
  int target_stage = 0;
  double l2_lambda = 0.0;
  int split_point = 0;
};

// (loss, max softmax, entropy) per sample.
using MiaFeatures = std::array<double, 3>;

std::vector<MiaFeatures> ExtractFeatures(const nn::LayeredModel& model,
                                         const sim::Dataset& data);

// Logistic regression on standardized features with class-balanced weights.
class MembershipClassifier {
 public:
  void Fit(const std::vector<MiaFeatures>& x, const std::vector<int>& member,
           int iterations = 2000, double lr = 0.5);
  bool Predict(const MiaFeatures& f) const;

 private:
  MiaFeatures mean_{};
  MiaFeatures scale_{1.0, 1.0, 1.0};
  MiaFeatures weight_{};
  double bias_ = 0.0;
};

// (TPR + TNR) / 2.
double BalancedAccuracy(const std::vector<bool>& predicted,
                        const std::vector<int>& member);

// Trains a shadow split-learning run and a target run, fits the attack on
// the shadow's composite models and scores it on the target's. Members are
// spread round-robin over the clients; each sample is scored on the
// composite model (client prefix followed by the server suffix) of the
// client it is assigned to. Throws ArgumentError when any pool has fewer
// than two samples.
MiaResult MiaAttack(const MiaPools& pools, const MiaOptions& options,
                    sim::RngStream rng);

}  // namespace splitsim::attack

#endif  // SPLITSIM_ATTACK_MIA_H_
