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

#ifndef SPLITSIM_PROFILER_PRIVACY_TABLE_H_
#define SPLITSIM_PROFILER_PRIVACY_TABLE_H_

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "splitsim/attack/reconstruct.h"
#include "splitsim/attack/t_fsim.h"
#include "splitsim/nn/model.h"
#include "splitsim/protocol/noise.h"
#include "splitsim/sim/dataset.h"
#include "splitsim/sim/rng.h"

namespace splitsim::profiler {

// sigma_lo, sigma_lo + step, ..., sigma_hi, each rounded to 1e-6.
std::vector<double> NoiseGrid(double sigma_hi = 2.5, double step = 0.05,
                              double sigma_lo = 0.0);

// Mean reconstruction FSIM per (split point, noise level).
class PrivacyLeakageTable {
 public:
  PrivacyLeakageTable() = default;
  PrivacyLeakageTable(int s_max, std::vector<double> sigmas);

  int s_max() const { return s_max_; }
  const std::vector<double>& sigmas() const { return sigmas_; }
  std::size_t cells() const { return values_.size(); }

  double at(int split_point, std::size_t sigma_index) const;
  void set(int split_point, std::size_t sigma_index, double fsim,
           bool converged = true);
  bool converged(int split_point, std::size_t sigma_index) const;
  // Linear interpolation in sigma; clamps outside the grid.
  double Lookup(int split_point, double sigma) const;

  // Throws ArgumentError on a missing cell or a value outside [0,1].
  void Validate() const;

  friend bool operator==(const PrivacyLeakageTable&,
                         const PrivacyLeakageTable&) = default;

 private:
  std::size_t Offset(int split_point, std::size_t sigma_index) const;

  int s_max_ = 0;
  std::vector<double> sigmas_;
  std::vector<double> values_;       // row-major by split point
  std::vector<char> converged_;
  std::vector<char> filled_;
};

// Tab-separated: "s" then one column per sigma, one row per split point.
// A cell whose attack diverged carries a trailing '*'. Lines starting with
// '#' are comments. Values round-trip exactly.
void WritePrivacyTable(std::ostream& os, const PrivacyLeakageTable& table);
PrivacyLeakageTable ReadPrivacyTable(std::istream& is);

struct AttackBudget {
  std::size_t samples = 8;
  attack::AttackOptions options;
  protocol::NoiseFamily noise_family = protocol::NoiseFamily::kLaplace;
};

struct CellStats {
  double mean = 0.0;
  double stddev = 0.0;  // population
  std::size_t n = 0;
  bool converged = true;
};

struct PrivacyTableBuild {
  PrivacyLeakageTable table;
  std::vector<std::vector<CellStats>> stats;  // [s-1][sigma index]
  // Every attacked sample, for the T_FSIM search.
  std::vector<attack::LabeledReconstruction> reconstructions;
};

// Attacks the first budget.samples public samples through the prefix
// W^{1:s} of `victim` for every (s, sigma). The attacker's surrogate only
// inherits the architecture. Noise for (s, sample) is one unit draw scaled
// by sigma and the attack starts from the same state at every sigma, so
// columns differ only by the noise level. Cells are independent; `threads`
// > 1 evaluates them concurrently with identical results.
PrivacyTableBuild BuildPrivacyLeakageTable(const nn::LayeredModel& victim,
                                           const sim::Dataset& public_data,
                                           int s_max,
                                           std::span<const double> sigmas,
                                           const AttackBudget& budget,
                                           sim::RngStream rng,
                                           unsigned threads = 1);

}  // namespace splitsim::profiler

#endif  // SPLITSIM_PROFILER_PRIVACY_TABLE_H_
