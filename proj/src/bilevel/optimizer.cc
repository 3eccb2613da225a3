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

#include "splitsim/bilevel/optimizer.h"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "splitsim/errors.h"
#include "splitsim/profiler/reference.h"
#include "splitsim/sim/format.h"

namespace splitsim::bilevel {

double NoiseAssignmentTable::at(int split_point) const {
  if (split_point < 1 || split_point > s_max()) {
    throw RangeError("noise table has no split point " + std::to_string(split_point));
  }
  return sigma[static_cast<std::size_t>(split_point - 1)];
}

NoiseAssignmentTable InitNoiseTable(const profiler::PrivacyLeakageTable& plt,
                                    double t_fsim) {
  if (!(t_fsim > 0.0 && t_fsim < 1.0)) throw ArgumentError("T_FSIM must lie in (0,1)");
  if (plt.s_max() < 1 || plt.sigmas().empty()) {
    throw ArgumentError("privacy table is empty");
  }
  NoiseAssignmentTable nat;
  for (int s = 1; s <= plt.s_max(); ++s) {
    bool found = false;
    for (std::size_t j = 0; j < plt.sigmas().size(); ++j) {
      if (plt.at(s, j) <= t_fsim) {
        nat.sigma.push_back(plt.sigmas()[j]);
        found = true;
        break;
      }
    }
    if (!found) nat.sigma.push_back(plt.sigmas().back());
    nat.saturated.push_back(found ? 0 : 1);
  }
  return nat;
}

NoiseAssignmentTable ReassignNoise(const NoiseAssignmentTable& nat, double a_t,
                                   double a_min, double sigma_floor) {
  if (a_t >= a_min) {
    throw ContractError("noise reassignment requires A_t < A_min");
  }
  if (!(sigma_floor >= 0.0)) throw ArgumentError("sigma floor must be >= 0");
  double m = std::clamp(1.0 - 2.0 * (a_min - a_t), kMultiplierFloor, kMultiplierCeil);
  NoiseAssignmentTable out = nat;
  for (double& s : out.sigma) s = std::max(sigma_floor, s * m);
  ++out.round;
  return out;
}

void WriteNoiseTable(std::ostream& os, const NoiseAssignmentTable& nat) {
  os << "round\t" << nat.round << '\n' << "s\tsigma\n";
  for (int s = 1; s <= nat.s_max(); ++s) {
    os << s << '\t' << sim::FormatDouble(nat.at(s));
    if (nat.saturated[static_cast<std::size_t>(s - 1)]) os << '*';
    os << '\n';
  }
}

NoiseAssignmentTable ReadNoiseTable(std::istream& is) {
  NoiseAssignmentTable nat;
  std::string line;
  bool have_round = false, have_columns = false;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key, value;
    std::getline(ls, key, '\t');
    std::getline(ls, value, '\t');
    if (!have_round) {
      if (key != "round") throw ArgumentError("noise table: expected 'round' line");
      nat.round = static_cast<int>(sim::ParseDouble(value));
      have_round = true;
    } else if (!have_columns) {
      if (key != "s") throw ArgumentError("noise table: expected column header");
      have_columns = true;
    } else {
      if (static_cast<int>(sim::ParseDouble(key)) != nat.s_max() + 1) {
        throw ArgumentError("noise table: split points must be 1..s_max in order");
      }
      bool saturated = !value.empty() && value.back() == '*';
      if (saturated) value.pop_back();
      nat.sigma.push_back(sim::ParseDouble(value));
      nat.saturated.push_back(saturated ? 1 : 0);
    }
  }
  if (nat.sigma.empty()) throw ArgumentError("noise table is empty");
  return nat;
}

SplitRange FeasibleSplitRange(const sim::EnergyPowerProfile& profile,
                              int client_id) {
  int hi = 0;
  for (int s = 1; s <= profile.s_max(); ++s) {
    if (profile.at(s).p_peak <= profile.p_max) hi = s;
  }
  if (hi == 0) {
    throw InfeasibleClientError(client_id,
                                "client " + std::to_string(client_id) +
                                    ": no split point satisfies P_max");
  }
  bool non_decreasing = true;
  int argmin = 1;
  for (int s = 2; s <= hi; ++s) {
    if (profile.at(s).e_total() < profile.at(s - 1).e_total()) non_decreasing = false;
    if (profile.at(s).e_total() < profile.at(argmin).e_total()) argmin = s;
  }
  return {non_decreasing ? 1 : argmin, hi};
}

SplitDecision SelectSplitPoint(const sim::EnergyPowerProfile& profile,
                               double alpha, const NoiseAssignmentTable& nat,
                               const profiler::PrivacyLeakageTable& plt,
                               int client_id) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ArgumentError("alpha must lie in [0,1]");
  SplitRange range = FeasibleSplitRange(profile, client_id);
  if (range.hi > plt.s_max() || range.hi > nat.s_max()) {
    throw ArgumentError("client " + std::to_string(client_id) +
                        ": profile reaches split point " + std::to_string(range.hi) +
                        " beyond the privacy or noise table");
  }
  double e_max = 0.0;
  for (int s = range.lo; s <= range.hi; ++s) {
    if (profile.at(s).p_peak <= profile.p_max) e_max = std::max(e_max, profile.at(s).e_total());
  }
  SplitDecision best;
  bool have = false;
  for (int s = range.lo; s <= range.hi; ++s) {
    const sim::SplitEnergy& row = profile.at(s);
    if (row.p_peak > profile.p_max) continue;
    SplitDecision d;
    d.client_id = client_id;
    d.split_point = s;
    d.sigma = nat.at(s);
    d.fsim = plt.Lookup(s, d.sigma);
    d.energy_norm = e_max > 0.0 ? row.e_total() / e_max : 0.0;
    d.objective = alpha * d.fsim + (1.0 - alpha) * d.energy_norm;
    d.p_peak = row.p_peak;
    d.p_max = profile.p_max;
    d.range = range;
    if (!have || d.objective < best.objective) {
      best = d;
      have = true;
    }
  }
  if (!have) {
    throw InfeasibleClientError(client_id, "client " + std::to_string(client_id) +
                                               ": feasible range is empty");
  }
  return best;
}

OptimizeResult Optimize(const std::vector<ClientProfile>& clients,
                        const profiler::PrivacyLeakageTable& plt,
                        const OptimizerConfig& config, const AccuracyProbe& probe) {
  if (clients.empty()) throw ArgumentError("optimize needs at least one client");
  if (config.max_rounds < 1) throw ArgumentError("max_rounds must be >= 1");
  OptimizeResult result;
  result.a_min = profiler::ComputeAMin(config.a_ref, config.beta);
  NoiseAssignmentTable nat = InitNoiseTable(plt, config.t_fsim);
  double best_acc = -1.0;
  for (int t = 0; t < config.max_rounds; ++t) {
    RoundTrace round;
    round.round = t;
    round.nat = nat;
    for (const ClientProfile& c : clients) {
      SplitDecision d = SelectSplitPoint(c.profile, c.alpha, nat, plt, c.id);
      if (d.p_peak > d.p_max) {
        throw ContractError("client " + std::to_string(c.id) + " exceeds its power cap");
      }
      round.total_fsim += d.fsim;
      round.decisions.push_back(d);
    }
    round.g_acc = probe(round.decisions, t);
    result.trace.push_back(round);
    result.rounds = t + 1;
    if (round.g_acc > best_acc) {
      best_acc = round.g_acc;
      result.best_round = t;
    }
    if (round.g_acc >= result.a_min) {
      result.converged = true;
      result.best_round = t;
      break;
    }
    if (t + 1 < config.max_rounds) {
      nat = ReassignNoise(nat, round.g_acc, result.a_min, config.sigma_floor);
    }
  }
  const RoundTrace& chosen = result.trace[static_cast<std::size_t>(result.best_round)];
  result.decisions = chosen.decisions;
  result.nat = chosen.nat;
  return result;
}

}  // namespace splitsim::bilevel
