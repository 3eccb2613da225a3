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

#ifndef SPLITSIM_ATTACK_T_FSIM_H_
#define SPLITSIM_ATTACK_T_FSIM_H_

#include <cstddef>
#include <span>
#include <vector>

#include "splitsim/nn/model.h"
#include "splitsim/nn/tensor.h"

namespace splitsim::attack {

// One attacked sample: similarity of its reconstruction to the original
// and whether a trained classifier still recognizes the reconstruction.
struct ReconstructionOutcome {
  double fsim = 0.0;
  bool recognized = false;
};

struct Cohort {
  double fsim_lo = 0.0;
  double fsim_hi = 0.0;
  std::size_t count = 0;
  double accuracy = 0.0;
  bool qualifies = false;
};

struct TFsimResult {
  double threshold = 0.0;
  // No cohort reached chance level; threshold is the minimum FSIM seen.
  bool fallback = false;
  std::vector<Cohort> cohorts;
};

// Sorts outcomes by FSIM and cuts them into `bins` equal-count cohorts. A
// cohort qualifies when its accuracy is within one binomial standard error
// of chance, i.e. accuracy <= 1/n + sqrt(p(1-p)/m) with p = 1/n_class.
// Returns the largest FSIM in any qualifying cohort. Throws ArgumentError
// for n_class < 2, no outcomes, or bins < 1.
TFsimResult FindTFsim(std::span<const ReconstructionOutcome> outcomes,
                      int n_class, std::size_t bins = 10);

struct LabeledReconstruction {
  nn::Tensor x_hat;  // one sample, no batch dimension
  int label = 0;
  double fsim = 0.0;
};

// Runs the classifier on every reconstruction, then defers to the outcome
// overload.
TFsimResult FindTFsim(const nn::LayeredModel& classifier,
                      std::span<const LabeledReconstruction> reconstructions,
                      int n_class, std::size_t bins = 10);

}  // namespace splitsim::attack

#endif  // SPLITSIM_ATTACK_T_FSIM_H_
