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

#ifndef SPLITSIM_BILEVEL_OPTIMIZER_H_
#define SPLITSIM_BILEVEL_OPTIMIZER_H_

#include <functional>
#include <iosfwd>
#include <vector>

#include "splitsim/profiler/privacy_table.h"
#include "splitsim/sim/energy.h"

namespace splitsim::bilevel {

inline constexpr double kMultiplierFloor = 0.1;
inline constexpr double kMultiplierCeil = 1.0;

// Shared sigma(s) per split point, revised once per round.
struct NoiseAssignmentTable {
  int round = 0;
  std::vector<double> sigma;    // index s-1
  std::vector<char> saturated;  // no grid sigma reached T_FSIM

  int s_max() const { return static_cast<int>(sigma.size()); }
  double at(int split_point) const;

  friend bool operator==(const NoiseAssignmentTable&,
                         const NoiseAssignmentTable&) = default;
};

// sigma(s) = smallest grid sigma with FSIM(sigma, s) <= t_fsim, else the
// largest grid sigma flagged saturated. Throws ArgumentError unless
// t_fsim is in (0,1) and the table is non-empty.
NoiseAssignmentTable InitNoiseTable(const profiler::PrivacyLeakageTable& plt,
                                    double t_fsim);

// sigma <- max(sigma_floor, sigma * clamp(1 - 2 (a_min - a_t), 0.1, 1)).
// Throws ContractError when a_t >= a_min.
NoiseAssignmentTable ReassignNoise(const NoiseAssignmentTable& nat, double a_t,
                                   double a_min, double sigma_floor = 0.0);

// "round<TAB>t", "s<TAB>sigma", then one row per split point; saturated
// cells carry a trailing '*'. '#' lines are comments.
void WriteNoiseTable(std::ostream& os, const NoiseAssignmentTable& nat);
NoiseAssignmentTable ReadNoiseTable(std::istream& is);

struct SplitRange {
  int lo = 1;
  int hi = 1;
};

// hi is the deepest split point under the power cap. lo is 1 when E_total
// is non-decreasing over 1..hi, else the energy argmin (smallest on ties).
// Throws InfeasibleClientError when even s = 1 exceeds P_max.
SplitRange FeasibleSplitRange(const sim::EnergyPowerProfile& profile,
                              int client_id = 0);

struct SplitDecision {
  int client_id = 0;
  int split_point = 1;
  double sigma = 0.0;
  double fsim = 0.0;       // privacy table at (sigma, s)
  double energy_norm = 0.0;  // E_total(s) / max over the range
  double objective = 0.0;  // alpha * fsim + (1 - alpha) * energy_norm
  double p_peak = 0.0;
  double p_max = 0.0;
  SplitRange range;
};

// Exhaustive argmin of the local objective over the feasible range,
// skipping split points above the power cap. Ties go to the smaller s.
SplitDecision SelectSplitPoint(const sim::EnergyPowerProfile& profile,
                               double alpha, const NoiseAssignmentTable& nat,
                               const profiler::PrivacyLeakageTable& plt,
                               int client_id = 0);

struct OptimizerConfig {
  double beta = 0.95;
  double a_ref = 1.0;
  double t_fsim = 0.5;
  int max_rounds = 5;
  double sigma_floor = 0.0;
};

struct ClientProfile {
  int id = 0;
  double alpha = 0.5;
  sim::EnergyPowerProfile profile;
};

// Measures G_acc for one round's decisions.
using AccuracyProbe =
    std::function<double(const std::vector<SplitDecision>& decisions, int round)>;

struct RoundTrace {
  int round = 0;
  NoiseAssignmentTable nat;
  std::vector<SplitDecision> decisions;
  double g_acc = 0.0;
  double total_fsim = 0.0;  // F = sum_i FSIM(sigma_i, s_i)
};

struct OptimizeResult {
  std::vector<SplitDecision> decisions;
  NoiseAssignmentTable nat;
  int rounds = 0;
  bool converged = false;
  int best_round = 0;
  double a_min = 0.0;
  std::vector<RoundTrace> trace;
};

// Alternates client split selection and a server accuracy probe until
// G_acc >= A_min or max_rounds. Without convergence the best-seen round is
// returned. Any decision above its power cap raises ContractError.
OptimizeResult Optimize(const std::vector<ClientProfile>& clients,
                        const profiler::PrivacyLeakageTable& plt,
                        const OptimizerConfig& config, const AccuracyProbe& probe);

}  // namespace splitsim::bilevel

#endif  // SPLITSIM_BILEVEL_OPTIMIZER_H_
