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

#include "splitsim/attack/mia.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "splitsim/errors.h"

namespace splitsim::attack {

namespace {

struct TrainedRun {
  std::vector<nn::LayeredModel> composites;  // one per client
};

sim::Dataset Subset(const sim::Dataset& data, int part, int parts) {
  sim::Dataset out;
  out.sample_shape = data.sample_shape;
  for (std::size_t i = static_cast<std::size_t>(part); i < data.size();
       i += static_cast<std::size_t>(parts)) {
    out.push_back(data.inputs[i], data.labels[i], data.ids[i]);
  }
  return out;
}

// Profile with zero cost at every split point; the attack does not account
// energy.
sim::EnergyPowerProfile FreeProfile(int s_max) {
  sim::EnergyPowerProfile p;
  p.p_max = 1.0;
  for (int s = 1; s <= s_max; ++s) p.rows.push_back({s, 0.0, 0.0, 0.0, 0.0});
  return p;
}

TrainedRun Train(const sim::Dataset& members, const sim::Dataset& holdout,
                 const MiaOptions& options, int epochs, sim::RngStream rng) {
  sim::RngStream init = rng.derive("init");
  protocol::Server server(nn::BuildModel(options.arch, init), options.s_max,
                          options.training.aggregation_period);
  std::vector<protocol::ClientState> clients;
  for (int c = 0; c < options.n_clients; ++c) {
    protocol::ClientState state;
    state.id = c;
    state.split_point = options.split_point;
    state.prefix = server.InitialPrefix(options.split_point);
    state.data = Subset(members, c, options.n_clients);
    state.profile = FreeProfile(options.s_max);
    clients.push_back(std::move(state));
  }
  protocol::TrainingConfig cfg = options.training;
  cfg.l2_lambda = options.l2_lambda;
  if (epochs > 0) {
    protocol::RunTraining(clients, server, std::nullopt, epochs, holdout, cfg,
                          rng.derive("train"));
  }
  TrainedRun run;
  for (const protocol::ClientState& c : clients) {
    run.composites.push_back(
        nn::ConcatModels(c.prefix, server.SuffixView(c.split_point)));
  }
  return run;
}

// Features for members and non-members, each scored on its assigned client.
void Collect(const TrainedRun& run, const sim::Dataset& members,
             const sim::Dataset& nonmembers, std::vector<MiaFeatures>* x,
             std::vector<int>* member) {
  int n = static_cast<int>(run.composites.size());
  for (int c = 0; c < n; ++c) {
    for (const MiaFeatures& f : ExtractFeatures(
             run.composites[static_cast<std::size_t>(c)], Subset(members, c, n))) {
      x->push_back(f);
      member->push_back(1);
    }
    for (const MiaFeatures& f :
         ExtractFeatures(run.composites[static_cast<std::size_t>(c)],
                         Subset(nonmembers, c, n))) {
      x->push_back(f);
      member->push_back(0);
    }
  }
}

}  // namespace

std::vector<MiaFeatures> ExtractFeatures(const nn::LayeredModel& model,
                                         const sim::Dataset& data) {
  std::vector<MiaFeatures> out;
  if (data.empty()) return out;
  nn::Tensor logits = nn::Forward(model, data.all_inputs(), nn::Mode::kEval, false).output;
  nn::Tensor probs = nn::Softmax(logits);
  std::size_t classes = probs.dim(1);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double* p = probs.data() + i * classes;
    double top = *std::max_element(p, p + classes);
    double entropy = 0.0;
    for (std::size_t k = 0; k < classes; ++k) {
      if (p[k] > 0.0) entropy -= p[k] * std::log(p[k]);
    }
    double truth = std::max(p[static_cast<std::size_t>(data.labels[i])], 1e-300);
    out.push_back({-std::log(truth), top, entropy});
  }
  return out;
}

void MembershipClassifier::Fit(const std::vector<MiaFeatures>& x,
                               const std::vector<int>& member, int iterations,
                               double lr) {
  std::size_t n = x.size();
  if (n == 0 || member.size() != n) throw ArgumentError("attack training set is empty");
  for (std::size_t j = 0; j < 3; ++j) {
    double m = 0.0, v = 0.0;
    for (const MiaFeatures& f : x) m += f[j];
    m /= static_cast<double>(n);
    for (const MiaFeatures& f : x) v += (f[j] - m) * (f[j] - m);
    v /= static_cast<double>(n);
    mean_[j] = m;
    scale_[j] = v > 1e-24 ? std::sqrt(v) : 1.0;
  }
  double pos = static_cast<double>(std::count(member.begin(), member.end(), 1));
  double neg = static_cast<double>(n) - pos;
  if (pos == 0.0 || neg == 0.0) throw ArgumentError("attack training needs both classes");
  std::vector<MiaFeatures> z(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < 3; ++j) z[i][j] = (x[i][j] - mean_[j]) / scale_[j];
  }
  weight_ = {};
  bias_ = 0.0;
  for (int it = 0; it < iterations; ++it) {
    MiaFeatures gw{};
    double gb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double a = bias_;
      for (std::size_t j = 0; j < 3; ++j) a += weight_[j] * z[i][j];
      double p = 1.0 / (1.0 + std::exp(-a));
      double w = member[i] ? 0.5 / pos : 0.5 / neg;
      double r = w * (p - member[i]);
      for (std::size_t j = 0; j < 3; ++j) gw[j] += r * z[i][j];
      gb += r;
    }
    for (std::size_t j = 0; j < 3; ++j) weight_[j] -= lr * gw[j];
    bias_ -= lr * gb;
  }
}

bool MembershipClassifier::Predict(const MiaFeatures& f) const {
  double a = bias_;
  for (std::size_t j = 0; j < 3; ++j) a += weight_[j] * (f[j] - mean_[j]) / scale_[j];
  return a > 0.0;
}

double BalancedAccuracy(const std::vector<bool>& predicted,
                        const std::vector<int>& member) {
  double tp = 0, pos = 0, tn = 0, neg = 0;
  for (std::size_t i = 0; i < member.size(); ++i) {
    if (member[i]) {
      ++pos;
      tp += predicted[i] ? 1 : 0;
    } else {
      ++neg;
      tn += predicted[i] ? 0 : 1;
    }
  }
  if (pos == 0 || neg == 0) throw ArgumentError("balanced accuracy needs both classes");
  return 0.5 * (tp / pos + tn / neg);
}

MiaResult MiaAttack(const MiaPools& pools, const MiaOptions& options,
                    sim::RngStream rng) {
  for (const sim::Dataset* d : {&pools.shadow_members, &pools.shadow_nonmembers,
                                &pools.target_members, &pools.target_nonmembers}) {
    if (d->size() < 2) throw ArgumentError("membership inference needs >= 2 samples per pool");
  }
  if (options.n_clients < 1) throw ArgumentError("n_clients must be >= 1");
  if (options.shadow_stage_epochs < 0 || options.target_stage_epochs < 0) {
    throw ArgumentError("training stages must be >= 0");
  }

  TrainedRun shadow = Train(pools.shadow_members, pools.shadow_nonmembers, options,
                            options.shadow_stage_epochs, rng.derive("shadow"));
  TrainedRun target = Train(pools.target_members, pools.target_nonmembers, options,
                            options.target_stage_epochs, rng.derive("target"));

  std::vector<MiaFeatures> sx, tx;
  std::vector<int> sy, ty;
  Collect(shadow, pools.shadow_members, pools.shadow_nonmembers, &sx, &sy);
  Collect(target, pools.target_members, pools.target_nonmembers, &tx, &ty);

  MembershipClassifier attack;
  attack.Fit(sx, sy);
  if (options.shuffle_membership) {
    sim::RngStream shuffle_rng = rng.derive("null");
    sim::Shuffle(ty, shuffle_rng);
  }
  std::vector<bool> predicted;
  predicted.reserve(tx.size());
  for (const MiaFeatures& f : tx) predicted.push_back(attack.Predict(f));

  MiaResult result;
  result.accuracy = BalancedAccuracy(predicted, ty);
  result.shadow_stage = options.shadow_stage_epochs;
  result.target_stage = options.target_stage_epochs;
  result.l2_lambda = options.l2_lambda;
  result.split_point = options.split_point;
  return result;
}

}  // namespace splitsim::attack
