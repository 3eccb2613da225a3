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

#ifndef SPLITSIM_PROTOCOL_NOISE_H_
#define SPLITSIM_PROTOCOL_NOISE_H_

#include <string_view>

#include "splitsim/nn/tensor.h"
#include "splitsim/sim/rng.h"

namespace splitsim::protocol {

enum class NoiseFamily { kLaplace, kGaussian };
NoiseFamily ParseNoiseFamily(std::string_view name);
std::string_view NoiseFamilyName(NoiseFamily family);

// Zero-mean noise with variance sigma^2 per element.
double DrawNoise(double sigma, NoiseFamily family, sim::RngStream& rng);

// Returns z + eta with eta i.i.d. zero-mean, variance sigma^2 (Laplace scale
// sigma/sqrt(2) by default). sigma == 0 returns z unchanged and consumes no
// randomness.
nn::Tensor InjectNoise(const nn::Tensor& z, double sigma, sim::RngStream& rng,
                       NoiseFamily family = NoiseFamily::kLaplace);

}  // namespace splitsim::protocol

#endif  // SPLITSIM_PROTOCOL_NOISE_H_
