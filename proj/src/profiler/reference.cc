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

#include "splitsim/profiler/reference.h"

#include <numeric>
#include <string>

#include "splitsim/errors.h"

namespace splitsim::profiler {

double Accuracy(const nn::LayeredModel& model, const sim::Dataset& test) {
  if (test.empty()) throw ArgumentError("accuracy needs a non-empty test set");
  std::vector<int> pred =
      nn::Argmax(nn::Forward(model, test.all_inputs(), nn::Mode::kEval, false).output);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == test.labels[i] ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

ReferenceResult ComputeReferenceAccuracy(const nn::ModelSpec& arch,
                                         const sim::Dataset& train,
                                         const sim::Dataset& test,
                                         const ReferenceTraining& config,
                                         sim::RngStream rng) {
  if (config.epochs < 0) throw ArgumentError("epochs must be >= 0");
  if (config.batch_size == 0) throw ArgumentError("batch size must be positive");
  sim::RngStream init = rng.derive("init");
  ReferenceResult result{0.0, nn::BuildModel(arch, init)};
  std::vector<std::size_t> rows(train.size());
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    sim::RngStream order = rng.path("order", static_cast<std::uint64_t>(epoch));
    sim::Shuffle(rows, order);
    for (std::size_t start = 0; start < rows.size(); start += config.batch_size) {
      std::size_t end = std::min(rows.size(), start + config.batch_size);
      std::span<const std::size_t> sel(rows.data() + start, end - start);
      std::vector<int> labels = train.batch_labels(sel);
      nn::TrainStep(result.model, train.batch(sel), labels, config.lr, config.l2_lambda);
    }
  }
  result.accuracy = Accuracy(result.model, test);
  return result;
}

double ComputeAMin(double a_ref, double beta) {
  if (!(beta > 0.0 && beta <= 1.0)) {
    throw ArgumentError("beta must lie in (0,1], got " + std::to_string(beta));
  }
  return beta * a_ref;
}

}  // namespace splitsim::profiler
