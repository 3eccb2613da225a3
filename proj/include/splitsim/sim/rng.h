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

#ifndef SPLITSIM_SIM_RNG_H_
#define SPLITSIM_SIM_RNG_H_

#include <cstdint>
#include <limits>
#include <string_view>

namespace splitsim::sim {

// Counter-based generator keyed by a hierarchical path. Two streams with the
// same (seed, path) produce the same sequence no matter how many other
// streams were drawn from before, so results do not depend on scheduling.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed);

  RngStream derive(std::string_view label) const;
  RngStream derive(std::uint64_t index) const;
  template <typename... Parts>
  RngStream path(Parts... parts) const {
    RngStream s = *this;
    ((s = s.derive(parts)), ...);
    return s;
  }

  result_type operator()();
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  // Uniform on the open interval (0, 1).
  double uniform();
  double uniform(double lo, double hi);
  double normal();
  // Zero-mean Laplace with the given scale b (variance 2 b^2).
  double laplace(double scale);
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  RngStream(std::uint64_t key, int) : key_(key) {}

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t Mix64(std::uint64_t x);
std::uint64_t Fnv1a64(std::string_view bytes);

// Fisher-Yates shuffle driven by a stream.
template <typename Container>
void Shuffle(Container& items, RngStream& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng.below(i));
    using std::swap;
    swap(items[i - 1], items[j]);
  }
}

}  // namespace splitsim::sim

#endif  // SPLITSIM_SIM_RNG_H_
