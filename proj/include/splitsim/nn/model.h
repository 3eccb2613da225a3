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

#ifndef SPLITSIM_NN_MODEL_H_
#define SPLITSIM_NN_MODEL_H_

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "splitsim/nn/layer.h"
#include "splitsim/nn/tensor.h"
#include "splitsim/sim/rng.h"

namespace splitsim::nn {

// Ordered stack of layers W^{a:b}. Layers keep their index from the full
// model, so a split prefix holds indices 1..s and the suffix s+1..k.
class LayeredModel {
 public:
  LayeredModel() = default;
  explicit LayeredModel(std::vector<Layer> layers);

  std::size_t depth() const { return layers_.size(); }
  bool empty() const { return layers_.empty(); }
  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& mutable_layers() { return layers_; }
  const Layer& layer(std::size_t i) const { return layers_.at(i); }
  Layer& layer(std::size_t i) { return layers_.at(i); }

  const Shape& input_shape() const;
  const Shape& output_shape() const;
  std::size_t parameter_count() const;

  friend bool operator==(const LayeredModel&, const LayeredModel&) = default;

 private:
  std::vector<Layer> layers_;
};

LayeredModel BuildModel(const ModelSpec& spec, sim::RngStream& rng);

// Returns (layers 1..s, layers s+1..k). Requires 1 <= s <= k-1.
std::pair<LayeredModel, LayeredModel> SplitModel(const LayeredModel& m,
                                                 std::size_t s);
// Layers [first, last) of m, zero-based positions.
LayeredModel SliceModel(const LayeredModel& m, std::size_t first,
                        std::size_t last);
LayeredModel ConcatModels(const LayeredModel& a, const LayeredModel& b);

enum class Mode { kTrain, kEval };

// Per-layer values that backward needs.
struct LayerCache {
  Tensor input;
  std::vector<std::size_t> argmax;  // max-pool winners (flat input index)
  Tensor normalized;                // batch-norm x-hat
  std::vector<double> inv_std;      // batch-norm 1/sqrt(var + eps)
  std::vector<double> batch_mean;
  std::vector<double> batch_var;  // biased
};

struct Tape {
  Mode mode = Mode::kTrain;
  std::vector<LayerCache> caches;
};

struct ForwardResult {
  Tensor output;
  std::optional<Tape> tape;
};

struct GradientPacket {
  Tensor boundary_grad;                         // d loss / d input
  std::vector<std::vector<Tensor>> param_grads;  // trainable params per layer
  double loss_value = 0.0;
};

inline constexpr double kBatchNormEps = 1e-5;
inline constexpr double kBatchNormMomentum = 0.1;

// x carries a leading batch dimension followed by the model input shape.
ForwardResult Forward(const LayeredModel& m, const Tensor& x, Mode mode,
                      bool record_tape);
GradientPacket Backward(const LayeredModel& m, const std::optional<Tape>& tape,
                        const Tensor& upstream_grad);

// p <- p - lr * (grad + l2_lambda * p) for every trainable parameter.
void SgdStep(LayeredModel& m, const GradientPacket& grads, double lr,
             double l2_lambda);
// Folds the batch statistics recorded on a training tape into the
// batch-norm running estimates.
void ApplyBatchStatistics(LayeredModel& m, const Tape& tape);

struct LossResult {
  double loss = 0.0;
  Tensor grad;  // d loss / d logits
};

// Mean softmax cross-entropy over the batch.
LossResult SoftmaxCrossEntropy(const Tensor& logits, std::span<const int> labels);
// Row-wise softmax of [batch, classes] logits.
Tensor Softmax(const Tensor& logits);
std::vector<int> Argmax(const Tensor& logits);

// One centralized SGD step on a batch; returns the loss.
double TrainStep(LayeredModel& m, const Tensor& x, std::span<const int> labels,
                 double lr, double l2_lambda);

// Versioned text checkpoint with hex-float parameters (bit-exact).
void WriteCheckpoint(std::ostream& os, const LayeredModel& m);
LayeredModel ReadCheckpoint(std::istream& is);

}  // namespace splitsim::nn

#endif  // SPLITSIM_NN_MODEL_H_
