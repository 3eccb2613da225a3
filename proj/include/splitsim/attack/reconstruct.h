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

#ifndef SPLITSIM_ATTACK_RECONSTRUCT_H_
#define SPLITSIM_ATTACK_RECONSTRUCT_H_

#include <cstddef>

#include "splitsim/nn/model.h"
#include "splitsim/nn/tensor.h"
#include "splitsim/sim/rng.h"

namespace splitsim::attack {

struct AttackOptions {
  int iterations = 400;
  double lr_input = 0.1;
  double lr_model = 0.01;
  double tv_weight = 1e-3;
  // Initial x-hat is 0.5 plus uniform jitter of this half-width.
  double init_jitter = 0.1;
  // Redraw the surrogate's parameters before the attack. The attacker
  // knows the prefix architecture only.
  bool reinitialize_surrogate = true;
};

struct ReconstructionResult {
  nn::Tensor x_hat;              // [batch, input...], clipped to [0,1]
  nn::LayeredModel surrogate;    // W-hat at the best iterate
  double objective = 0.0;        // at the best iterate
  int iterations = 0;            // completed iterations
  bool converged = true;         // false when the objective went non-finite
};

// Smoothed isotropic total variation, averaged over pixels, and its
// gradient. Inputs of rank < 3 per sample are treated as one row.
double TotalVariation(const nn::Tensor& x, nn::Tensor* grad);

// Alternating descent on x-hat then W-hat for
//   mean (g(x-hat | W-hat) - z)^2 + tv_weight * TV(x-hat).
// z is [batch, prefix output...]. The surrogate supplies the architecture
// (and the starting weights when reinitialize_surrogate is false).
ReconstructionResult UnsplitReconstruct(const nn::Tensor& z,
                                        const nn::LayeredModel& surrogate,
                                        const AttackOptions& options,
                                        sim::RngStream rng);

// Same architecture as m with parameters redrawn from rng.
nn::LayeredModel Reinitialize(const nn::LayeredModel& m, sim::RngStream& rng);

}  // namespace splitsim::attack

#endif  // SPLITSIM_ATTACK_RECONSTRUCT_H_
