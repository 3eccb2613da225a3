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

#include "splitsim/sim/energy.h"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

#include "splitsim/errors.h"
#include "splitsim/sim/format.h"

namespace splitsim::sim {

const SplitEnergy& EnergyPowerProfile::at(int split_point) const {
  if (split_point < 1 || split_point > s_max()) {
    throw RangeError("profile has no split point " + std::to_string(split_point));
  }
  return rows[static_cast<std::size_t>(split_point - 1)];
}

std::string_view EnergyKindName(EnergyKind kind) {
  switch (kind) {
    case EnergyKind::kComm:
      return "comm";
    case EnergyKind::kCompute:
      return "compute";
    case EnergyKind::kIdleAwake:
      return "idle-awake";
  }
  return "unknown";
}

namespace {
std::string Num(double v) { return FormatDouble(v); }
}  // namespace

void WriteProfile(std::ostream& os, const EnergyPowerProfile& profile) {
  os << "P_max\t" << Num(profile.p_max) << '\n';
  os << "joules_per_byte\t" << Num(profile.joules_per_byte) << '\n';
  os << "batches\t" << Num(profile.batches_per_epoch) << '\n';
  os << "comm_watts\t" << Num(profile.comm_watts) << '\n';
  os << "idle_watts\t" << Num(profile.idle_watts) << '\n';
  os << "s\tE_comm\tE_comp\tE_idle\tE_total\tp_peak\n";
  for (const SplitEnergy& r : profile.rows) {
    os << r.split_point << '\t' << Num(r.e_comm) << '\t' << Num(r.e_comp)
       << '\t' << Num(r.e_idle) << '\t' << Num(r.e_total()) << '\t'
       << Num(r.p_peak) << '\n';
  }
}

EnergyPowerProfile ReadProfile(std::istream& is) {
  EnergyPowerProfile p;
  std::map<std::string, double> header;
  std::string line;
  bool in_rows = false;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (!in_rows) {
      if (key == "s") {
        in_rows = true;
        continue;
      }
      double v = 0.0;
      if (!(ls >> v)) {
        throw ArgumentError("profile line " + std::to_string(line_no) +
                            ": expected key and value");
      }
      header[key] = v;
      continue;
    }
    SplitEnergy r;
    double total = 0.0;
    r.split_point = std::stoi(key);
    if (!(ls >> r.e_comm >> r.e_comp >> r.e_idle >> total >> r.p_peak)) {
      throw ArgumentError("profile line " + std::to_string(line_no) +
                          ": expected 6 columns");
    }
    if (r.split_point != static_cast<int>(p.rows.size()) + 1) {
      throw ArgumentError("profile line " + std::to_string(line_no) +
                          ": split points must be 1,2,... in order");
    }
    if (r.e_comm < 0 || r.e_comp < 0 || r.e_idle < 0) {
      throw ArgumentError("profile line " + std::to_string(line_no) +
                          ": negative energy");
    }
    p.rows.push_back(r);
  }
  auto need = [&](const char* k) {
    auto it = header.find(k);
    if (it == header.end()) {
      throw ArgumentError(std::string("profile is missing header '") + k + "'");
    }
    return it->second;
  };
  p.p_max = need("P_max");
  p.joules_per_byte = need("joules_per_byte");
  p.batches_per_epoch = need("batches");
  p.comm_watts = header.count("comm_watts") ? header["comm_watts"] : 0.0;
  p.idle_watts = header.count("idle_watts") ? header["idle_watts"] : 0.0;
  if (p.rows.empty()) throw ArgumentError("profile has no split rows");
  return p;
}

std::vector<EnergyEvent> AccountTurnEnergy(const EnergyPowerProfile& profile,
                                           int split_point,
                                           double boundary_bytes,
                                           std::size_t batches, int client_id,
                                           int epoch) {
  std::vector<EnergyEvent> events;
  if (batches == 0) return events;
  const SplitEnergy& row = profile.at(split_point);
  double n = static_cast<double>(batches);
  double share = n / profile.batches_per_epoch;
  double peak = row.p_peak;
  events.push_back({client_id, epoch, EnergyKind::kComm,
                    profile.joules_per_byte * boundary_bytes * n,
                    std::min(profile.comm_watts, peak)});
  events.push_back(
      {client_id, epoch, EnergyKind::kCompute, row.e_comp * share, peak});
  if (row.e_idle > 0.0) {
    events.push_back({client_id, epoch, EnergyKind::kIdleAwake,
                      row.e_idle * share, std::min(profile.idle_watts, peak)});
  }
  return events;
}

EnergyTotals SumEvents(const std::vector<EnergyEvent>& events) {
  EnergyTotals t;
  for (const EnergyEvent& e : events) {
    switch (e.kind) {
      case EnergyKind::kComm:
        t.comm += e.joules;
        break;
      case EnergyKind::kCompute:
        t.comp += e.joules;
        break;
      case EnergyKind::kIdleAwake:
        t.idle += e.joules;
        break;
    }
    t.peak_watts = std::max(t.peak_watts, e.watts);
  }
  return t;
}

}  // namespace splitsim::sim
