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

#include "splitsim/sim/rng.h"

#include <cmath>
#include <numbers>

namespace splitsim::sim {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}  // namespace

std::uint64_t Mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

std::uint64_t Fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

RngStream::RngStream(std::uint64_t seed) : key_(Mix64(seed + kGolden)) {}

RngStream RngStream::derive(std::string_view label) const {
  return RngStream(Mix64(key_ ^ Mix64(Fnv1a64(label))), 0);
}

RngStream RngStream::derive(std::uint64_t index) const {
  return RngStream(Mix64(key_ + Mix64(index * kGolden + 0x632BE59BD9B4E019ULL)),
                   0);
}

RngStream::result_type RngStream::operator()() {
  ++counter_;
  return Mix64(key_ + counter_ * kGolden);
}

double RngStream::uniform() {
  return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform();
}

double RngStream::normal() {
  // Box-Muller, one output per pair; the second value is discarded so the
  // stream position stays a pure function of the number of calls.
  double u1 = uniform();
  double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double RngStream::laplace(double scale) {
  double u = uniform() - 0.5;
  double mag = -std::log(1.0 - 2.0 * std::fabs(u));
  return u < 0 ? -scale * mag : scale * mag;
}

std::uint64_t RngStream::below(std::uint64_t n) {
  if (n <= 1) return 0;
  // Rejection sampling removes modulo bias.
  std::uint64_t limit = max() - max() % n;
  std::uint64_t r;
  do {
    r = (*this)();
  } while (r >= limit);
  return r % n;
}

}  // namespace splitsim::sim
