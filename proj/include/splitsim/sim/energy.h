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

#ifndef SPLITSIM_SIM_ENERGY_H_
#define SPLITSIM_SIM_ENERGY_H_

#include <cstddef>
#include <iosfwd>
#include <string_view>
#include <vector>

namespace splitsim::sim {

// One row of an Energy and Power Consumption Table (joules per epoch, watts).
struct SplitEnergy {
  int split_point = 0;
  double e_comm = 0.0;
  double e_comp = 0.0;
  double e_idle = 0.0;
  double p_peak = 0.0;

  double e_total() const { return e_comm + e_comp + e_idle; }
  friend bool operator==(const SplitEnergy&, const SplitEnergy&) = default;
};

// Per-client energy/power profile over split points 1..s_max. Row i holds
// split point i+1.
struct EnergyPowerProfile {
  std::vector<SplitEnergy> rows;
  double p_max = 0.0;            // overheating cap, watts
  double joules_per_byte = 0.0;  // link cost used to price boundary traffic
  double batches_per_epoch = 1.0;
  double comm_watts = 0.0;  // draw while transmitting
  double idle_watts = 0.0;  // draw while awake and waiting

  int s_max() const { return static_cast<int>(rows.size()); }
  const SplitEnergy& at(int split_point) const;

  friend bool operator==(const EnergyPowerProfile&,
                         const EnergyPowerProfile&) = default;
};

// Tab-separated: header lines "P_max", "joules_per_byte", "batches",
// "comm_watts", "idle_watts" (key<TAB>value), then a column header and one
// row per split point: s E_comm E_comp E_idle E_total p_peak.
void WriteProfile(std::ostream& os, const EnergyPowerProfile& profile);
EnergyPowerProfile ReadProfile(std::istream& is);

enum class EnergyKind { kComm, kCompute, kIdleAwake };
std::string_view EnergyKindName(EnergyKind kind);

struct EnergyEvent {
  int client_id = 0;
  int epoch = 0;
  EnergyKind kind = EnergyKind::kComm;
  double joules = 0.0;
  double watts = 0.0;  // instantaneous draw during the event
};

// Events for one client's training turn at split point s. Sleep periods
// produce no events. With boundary_bytes equal to the profiled per-batch
// representation size and batches equal to the profiled batch count, the
// joules sum to the profile's E_total(s).
std::vector<EnergyEvent> AccountTurnEnergy(const EnergyPowerProfile& profile,
                                           int split_point,
                                           double boundary_bytes,
                                           std::size_t batches,
                                           int client_id = 0, int epoch = 0);

// Per-kind sums plus the peak draw over a set of events.
struct EnergyTotals {
  double comm = 0.0;
  double comp = 0.0;
  double idle = 0.0;
  double peak_watts = 0.0;
  double total() const { return comm + comp + idle; }
};
EnergyTotals SumEvents(const std::vector<EnergyEvent>& events);

}  // namespace splitsim::sim

#endif  // SPLITSIM_SIM_ENERGY_H_
