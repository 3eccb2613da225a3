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

#ifndef SPLITSIM_TESTS_ORACLES_H_
#define SPLITSIM_TESTS_ORACLES_H_

#include <algorithm>
#include <cmath>
#include <vector>

#include "splitsim/bilevel/optimizer.h"
#include "splitsim/nn/model.h"
#include "splitsim/protocol/protocol.h"
#include "splitsim/sim/rng.h"

namespace splitsim::testing {

// Fill-and-average written out directly: each client's prefix is extended
// to depth s_max with the server's current view of the missing layers, and
// the N extended stacks are averaged element by element in client order.
inline nn::LayeredModel BruteForceAverage(const protocol::Server& server,
                                          const std::vector<const protocol::ClientState*>& cs) {
  auto s_max = static_cast<std::size_t>(server.s_max());
  std::vector<nn::LayeredModel> filled;
  for (const protocol::ClientState* c : cs) {
    auto s = static_cast<std::size_t>(c->split_point);
    nn::LayeredModel view = server.SuffixView(c->split_point);
    filled.push_back(nn::ConcatModels(c->prefix, nn::SliceModel(view, 0, s_max - s)));
  }
  std::vector<nn::Layer> out;
  for (std::size_t j = 0; j < s_max; ++j) {
    nn::Layer layer = filled[0].layer(j);
    for (std::size_t p = 0; p < layer.params.size(); ++p) {
      for (std::size_t e = 0; e < layer.params[p].size(); ++e) {
        double acc = 0.0;
        for (const nn::LayeredModel& f : filled) acc += f.layer(j).params[p][e];
        layer.params[p][e] = acc / static_cast<double>(filled.size());
      }
    }
    out.push_back(std::move(layer));
  }
  return nn::LayeredModel(std::move(out));
}

inline double MaxAbsDiff(const nn::LayeredModel& a, const nn::LayeredModel& b) {
  double d = 0.0;
  for (std::size_t l = 0; l < a.depth(); ++l) {
    for (std::size_t p = 0; p < a.layer(l).params.size(); ++p) {
      for (std::size_t e = 0; e < a.layer(l).params[p].size(); ++e) {
        d = std::max(d, std::abs(a.layer(l).params[p][e] - b.layer(l).params[p][e]));
      }
    }
  }
  return d;
}

// Runs `steps` split turns (one client, sigma 0) and the same number of
// centralized steps on identical batches; returns the largest parameter
// difference between the resulting full models.
inline double SplitVsCentralized(const nn::ModelSpec& spec, int split_point, int steps,
                                 std::uint64_t seed) {
  sim::RngStream rng(seed);
  nn::LayeredModel init = nn::BuildModel(spec, rng);
  int k = static_cast<int>(init.depth());
  protocol::Server server(init, k - 1);
  protocol::ClientState client;
  client.split_point = split_point;
  client.prefix = server.InitialPrefix(split_point);
  nn::LayeredModel central = init;
  protocol::TrainingConfig cfg;
  cfg.lr = 0.05;
  nn::Shape xs = spec.input_shape;
  xs.insert(xs.begin(), 4);
  std::size_t classes = nn::ShapeSize(init.output_shape());
  sim::RngStream data = rng.derive("batches");
  for (int t = 0; t < steps; ++t) {
    nn::Tensor x(xs);
    for (double& v : x.values()) v = data.uniform(-1.0, 1.0);
    std::vector<int> y(4);
    for (int& v : y) v = static_cast<int>(data.below(classes));
    sim::RngStream noise = rng.path("noise", static_cast<std::uint64_t>(t));
    protocol::ClientTurn(client, server, {x, y}, cfg, noise);
    nn::TrainStep(central, x, y, cfg.lr, 0.0);
  }
  nn::LayeredModel split = nn::ConcatModels(client.prefix, server.SuffixView(split_point));
  return MaxAbsDiff(split, central);
}

// Solves A x = b (n x n, row-major) by Gaussian elimination with partial
// pivoting.
inline std::vector<double> SolveLinear(std::vector<double> a, std::vector<double> b) {
  std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(a[r * n + c]) > std::abs(a[piv * n + c])) piv = r;
    }
    for (std::size_t k = 0; k < n; ++k) std::swap(a[c * n + k], a[piv * n + k]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = c + 1; r < n; ++r) {
      double f = a[r * n + c] / a[c * n + c];
      for (std::size_t k = c; k < n; ++k) a[r * n + k] -= f * a[c * n + k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double acc = b[i];
    for (std::size_t k = i + 1; k < n; ++k) acc -= a[i * n + k] * x[k];
    x[i] = acc / a[i * n + i];
  }
  return x;
}

// Split selection by listing every admissible (objective, s) pair and
// taking the lexicographic minimum. Admissible: under the power cap, not
// above the deepest capped point, and not shallower than the energy argmin
// when energy ever decreases with depth. Returns 0 when nothing qualifies.
inline int EnumerateSplit(const sim::EnergyPowerProfile& p, double alpha,
                          const bilevel::NoiseAssignmentTable& nat,
                          const profiler::PrivacyLeakageTable& plt) {
  int n = p.s_max();
  int hi = 0;
  for (int s = n; s >= 1 && hi == 0; --s) {
    if (p.at(s).p_peak <= p.p_max) hi = s;
  }
  if (hi == 0) return 0;
  std::vector<double> e;
  for (int s = 1; s <= hi; ++s) e.push_back(p.at(s).e_total());
  bool sorted = std::is_sorted(e.begin(), e.end());
  int lo = sorted ? 1 : static_cast<int>(std::min_element(e.begin(), e.end()) - e.begin()) + 1;
  std::vector<int> ok;
  for (int s = lo; s <= hi; ++s) {
    if (p.at(s).p_peak <= p.p_max) ok.push_back(s);
  }
  if (ok.empty()) return 0;
  double e_max = 0.0;
  for (int s : ok) e_max = std::max(e_max, p.at(s).e_total());
  std::vector<std::pair<double, int>> scored;
  for (int s : ok) {
    double f = plt.Lookup(s, nat.at(s));
    double en = e_max > 0.0 ? p.at(s).e_total() / e_max : 0.0;
    scored.push_back({alpha * f + (1.0 - alpha) * en, s});
  }
  return std::min_element(scored.begin(), scored.end())->second;
}

// Random profile and tables over s_max split points drawn from small value
// sets so that ties are common.
struct SplitFixture {
  sim::EnergyPowerProfile profile;
  bilevel::NoiseAssignmentTable nat;
  profiler::PrivacyLeakageTable plt;
  double alpha = 0.5;
};

inline SplitFixture RandomSplitFixture(sim::RngStream& rng) {
  SplitFixture f;
  int n = 2 + static_cast<int>(rng.below(7));
  const double energies[] = {0.01, 0.02, 0.03, 0.04};
  const double fsims[] = {0.3, 0.4, 0.5, 0.6};
  const double alphas[] = {0.0, 0.25, 0.5, 0.75, 1.0};
  f.profile.p_max = 2.0;
  for (int s = 1; s <= n; ++s) {
    sim::SplitEnergy row;
    row.split_point = s;
    row.e_comm = energies[rng.below(4)];
    row.e_comp = energies[rng.below(4)];
    row.e_idle = 0.0;
    row.p_peak = rng.below(6) == 0 ? 2.5 : 1.0 + 0.1 * static_cast<double>(rng.below(10));
    f.profile.rows.push_back(row);
  }
  if (rng.below(10) != 0) f.profile.rows[0].p_peak = 1.0;  // mostly feasible
  f.plt = profiler::PrivacyLeakageTable(n, {0.0, 1.0});
  f.nat.sigma.assign(static_cast<std::size_t>(n), 0.0);
  f.nat.saturated.assign(static_cast<std::size_t>(n), 0);
  for (int s = 1; s <= n; ++s) {
    double hi = fsims[rng.below(4)];
    f.plt.set(s, 0, hi);
    f.plt.set(s, 1, hi - 0.1);
    f.nat.sigma[static_cast<std::size_t>(s - 1)] = rng.below(2) == 0 ? 0.0 : 1.0;
  }
  f.alpha = alphas[rng.below(5)];
  return f;
}

}  // namespace splitsim::testing

#endif  // SPLITSIM_TESTS_ORACLES_H_
