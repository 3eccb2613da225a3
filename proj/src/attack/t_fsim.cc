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

#include "splitsim/attack/t_fsim.h"

#include <algorithm>
#include <cmath>

#include "splitsim/errors.h"

namespace splitsim::attack {

TFsimResult FindTFsim(std::span<const ReconstructionOutcome> outcomes,
                      int n_class, std::size_t bins) {
  if (n_class < 2) throw ArgumentError("T_FSIM needs at least two classes");
  if (outcomes.empty()) throw ArgumentError("T_FSIM needs reconstructions");
  if (bins < 1) throw ArgumentError("T_FSIM needs at least one cohort");
  std::vector<ReconstructionOutcome> sorted(outcomes.begin(), outcomes.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto& a, const auto& b) { return a.fsim < b.fsim; });
  bins = std::min(bins, sorted.size());
  double chance = 1.0 / n_class;

  TFsimResult result;
  bool any = false;
  for (std::size_t b = 0; b < bins; ++b) {
    std::size_t first = b * sorted.size() / bins;
    std::size_t last = (b + 1) * sorted.size() / bins;
    Cohort c;
    c.fsim_lo = sorted[first].fsim;
    c.fsim_hi = sorted[last - 1].fsim;
    c.count = last - first;
    std::size_t hits = 0;
    for (std::size_t i = first; i < last; ++i) hits += sorted[i].recognized ? 1 : 0;
    c.accuracy = static_cast<double>(hits) / static_cast<double>(c.count);
    double se = std::sqrt(chance * (1.0 - chance) / static_cast<double>(c.count));
    c.qualifies = c.accuracy <= chance + se;
    if (c.qualifies) {
      result.threshold = any ? std::max(result.threshold, c.fsim_hi) : c.fsim_hi;
      any = true;
    }
    result.cohorts.push_back(c);
  }
  if (!any) {
    result.fallback = true;
    result.threshold = sorted.front().fsim;
  }
  return result;
}

TFsimResult FindTFsim(const nn::LayeredModel& classifier,
                      std::span<const LabeledReconstruction> reconstructions,
                      int n_class, std::size_t bins) {
  std::vector<ReconstructionOutcome> outcomes;
  outcomes.reserve(reconstructions.size());
  for (const LabeledReconstruction& r : reconstructions) {
    nn::Shape shape{1};
    for (std::size_t d : r.x_hat.shape()) shape.push_back(d);
    nn::Tensor x(shape, std::vector<double>(r.x_hat.values().begin(),
                                            r.x_hat.values().end()));
    nn::Tensor logits = nn::Forward(classifier, x, nn::Mode::kEval, false).output;
    outcomes.push_back({r.fsim, nn::Argmax(logits).at(0) == r.label});
  }
  return FindTFsim(outcomes, n_class, bins);
}

}  // namespace splitsim::attack
