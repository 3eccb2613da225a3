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

#ifndef SPLITSIM_PROFILER_ENERGY_PROFILE_H_
#define SPLITSIM_PROFILER_ENERGY_PROFILE_H_

#include <cstddef>

#include "splitsim/nn/layer.h"
#include "splitsim/sim/energy.h"

namespace splitsim::profiler {

// Parametric device model standing in for hardware measurement.
struct DeviceParams {
  double joules_per_byte = 2e-8;
  double joules_per_flop = 1e-9;
  double idle_watts = 0.5;
  double idle_seconds_per_batch = 0.01;  // awake, waiting on the server
  double comm_watts = 2.0;
  double base_watts = 1.0;
  double watts_per_mflop = 0.05;  // per MFLOP of prefix work in one batch
  double p_max = 10.0;
  double batches_per_epoch = 4.0;
  std::size_t batch_size = 16;
  std::size_t bytes_per_value = 8;
};

// Bytes crossing the cut after layer s for one batch.
double BoundaryBytes(const nn::ModelSpec& arch, int split_point,
                     std::size_t batch_size, std::size_t bytes_per_value);
// Forward FLOPs of layers 1..s for one batch.
double PrefixFlops(const nn::ModelSpec& arch, int split_point,
                   std::size_t batch_size);

// Per split point s in 1..s_max:
//   E_comm = joules_per_byte * BoundaryBytes(s) * batches
//   E_comp = joules_per_flop * PrefixFlops(s) * batches
//   E_idle = idle_watts * idle_seconds_per_batch * batches
//   p_peak = base_watts + watts_per_mflop * PrefixFlops(s) / 1e6
// Throws ArgumentError on non-positive coefficients or s_max outside
// 1..k-1.
sim::EnergyPowerProfile BuildEnergyProfile(const DeviceParams& device,
                                           const nn::ModelSpec& arch, int s_max);

}  // namespace splitsim::profiler

#endif  // SPLITSIM_PROFILER_ENERGY_PROFILE_H_
