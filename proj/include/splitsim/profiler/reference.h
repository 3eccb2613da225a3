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

#ifndef SPLITSIM_PROFILER_REFERENCE_H_
#define SPLITSIM_PROFILER_REFERENCE_H_

#include <cstddef>

#include "splitsim/nn/layer.h"
#include "splitsim/nn/model.h"
#include "splitsim/sim/dataset.h"
#include "splitsim/sim/rng.h"

namespace splitsim::profiler {

struct ReferenceTraining {
  int epochs = 30;
  double lr = 0.05;
  std::size_t batch_size = 16;
  double l2_lambda = 0.0;
};

struct ReferenceResult {
  double accuracy = 0.0;  // A_ref on the test split
  nn::LayeredModel model;
};

double Accuracy(const nn::LayeredModel& model, const sim::Dataset& test);

// Noise-free centralized training on `train`, evaluated on `test`.
ReferenceResult ComputeReferenceAccuracy(const nn::ModelSpec& arch,
                                         const sim::Dataset& train,
                                         const sim::Dataset& test,
                                         const ReferenceTraining& config,
                                         sim::RngStream rng);

// A_min = beta * A_ref, beta being the retained fraction of accuracy.
// Throws ArgumentError unless beta is in (0,1].
double ComputeAMin(double a_ref, double beta);

}  // namespace splitsim::profiler

#endif  // SPLITSIM_PROFILER_REFERENCE_H_
