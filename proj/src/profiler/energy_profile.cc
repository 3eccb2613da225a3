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

#include "splitsim/profiler/energy_profile.h"

#include <string>

#include "splitsim/errors.h"

namespace splitsim::profiler {

namespace {

void CheckSplit(const nn::ModelSpec& arch, int split_point) {
  if (split_point < 1 || static_cast<std::size_t>(split_point) > arch.depth()) {
    throw RangeError("split point " + std::to_string(split_point) +
                     " outside 1.." + std::to_string(arch.depth()));
  }
}

void RequirePositive(double v, const char* name) {
  if (!(v > 0.0)) throw ArgumentError(std::string("device ") + name + " must be positive");
}

}  // namespace

double BoundaryBytes(const nn::ModelSpec& arch, int split_point,
                     std::size_t batch_size, std::size_t bytes_per_value) {
  CheckSplit(arch, split_point);
  std::vector<nn::LayerShape> shapes = arch.shapes();
  double elements = static_cast<double>(
      nn::ShapeSize(shapes[static_cast<std::size_t>(split_point - 1)].output));
  return elements * static_cast<double>(batch_size) *
         static_cast<double>(bytes_per_value);
}

double PrefixFlops(const nn::ModelSpec& arch, int split_point,
                   std::size_t batch_size) {
  CheckSplit(arch, split_point);
  std::vector<nn::LayerShape> shapes = arch.shapes();
  double flops = 0.0;
  for (int l = 0; l < split_point; ++l) {
    auto i = static_cast<std::size_t>(l);
    flops += nn::LayerFlops(arch.layers[i], shapes[i]);
  }
  return flops * static_cast<double>(batch_size);
}

sim::EnergyPowerProfile BuildEnergyProfile(const DeviceParams& device,
                                           const nn::ModelSpec& arch, int s_max) {
  RequirePositive(device.joules_per_byte, "joules_per_byte");
  RequirePositive(device.joules_per_flop, "joules_per_flop");
  RequirePositive(device.idle_watts, "idle_watts");
  RequirePositive(device.idle_seconds_per_batch, "idle_seconds_per_batch");
  RequirePositive(device.comm_watts, "comm_watts");
  RequirePositive(device.base_watts, "base_watts");
  RequirePositive(device.watts_per_mflop, "watts_per_mflop");
  RequirePositive(device.p_max, "p_max");
  RequirePositive(device.batches_per_epoch, "batches_per_epoch");
  if (device.batch_size == 0) throw ArgumentError("device batch_size must be positive");
  if (device.bytes_per_value == 0) {
    throw ArgumentError("device bytes_per_value must be positive");
  }
  if (s_max < 1 || static_cast<std::size_t>(s_max) + 1 > arch.depth()) {
    throw ArgumentError("s_max " + std::to_string(s_max) + " must lie in 1.." +
                        std::to_string(static_cast<int>(arch.depth()) - 1));
  }
  sim::EnergyPowerProfile profile;
  profile.p_max = device.p_max;
  profile.joules_per_byte = device.joules_per_byte;
  profile.batches_per_epoch = device.batches_per_epoch;
  profile.comm_watts = device.comm_watts;
  profile.idle_watts = device.idle_watts;
  double batches = device.batches_per_epoch;
  for (int s = 1; s <= s_max; ++s) {
    double bytes = BoundaryBytes(arch, s, device.batch_size, device.bytes_per_value);
    double flops = PrefixFlops(arch, s, device.batch_size);
    sim::SplitEnergy row;
    row.split_point = s;
    row.e_comm = device.joules_per_byte * bytes * batches;
    row.e_comp = device.joules_per_flop * flops * batches;
    row.e_idle = device.idle_watts * device.idle_seconds_per_batch * batches;
    row.p_peak = device.base_watts + device.watts_per_mflop * flops / 1e6;
    profile.rows.push_back(row);
  }
  return profile;
}

}  // namespace splitsim::profiler
