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

#include "splitsim/protocol/noise.h"

#include <cmath>
#include <numbers>
#include <string>

#include "splitsim/errors.h"

namespace splitsim::protocol {

NoiseFamily ParseNoiseFamily(std::string_view name) {
  if (name == "laplace") return NoiseFamily::kLaplace;
  if (name == "gaussian") return NoiseFamily::kGaussian;
  throw ArgumentError("unknown noise family '" + std::string(name) + "'");
}

std::string_view NoiseFamilyName(NoiseFamily family) {
  return family == NoiseFamily::kLaplace ? "laplace" : "gaussian";
}

double DrawNoise(double sigma, NoiseFamily family, sim::RngStream& rng) {
  if (family == NoiseFamily::kGaussian) return sigma * rng.normal();
  return rng.laplace(sigma / std::numbers::sqrt2);
}

nn::Tensor InjectNoise(const nn::Tensor& z, double sigma, sim::RngStream& rng,
                       NoiseFamily family) {
  if (!(sigma >= 0.0)) throw ArgumentError("noise level must be non-negative");
  nn::Tensor out = z;
  if (sigma == 0.0) return out;
  for (double& v : out.values()) v += DrawNoise(sigma, family, rng);
  return out;
}

}  // namespace splitsim::protocol
