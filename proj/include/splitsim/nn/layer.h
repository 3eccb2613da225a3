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

#ifndef SPLITSIM_NN_LAYER_H_
#define SPLITSIM_NN_LAYER_H_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "splitsim/nn/tensor.h"
#include "splitsim/sim/rng.h"

namespace splitsim::nn {

enum class LayerKind { kDense, kRelu, kConv2d, kMaxPool, kBatchNorm };

std::string_view LayerKindName(LayerKind kind);
LayerKind ParseLayerKind(std::string_view name);

// One layer of a LayeredModel. Shapes are per sample (no batch dimension).
//
// Parameter layout:
//   dense      {weight[out, in_flat], bias[out]}
//   conv2d     {weight[c_out, c_in, kh, kw], bias[c_out]}   same padding
//   batch-norm {gamma[c], beta[c], running_mean[c], running_var[c]}
//   relu, max-pool: none
// Only the first trainable_count() parameters receive gradients; batch-norm
// running statistics are still parameters so that aggregation averages them.
struct Layer {
  LayerKind kind = LayerKind::kRelu;
  int index = 0;  // 1-based position in the full model
  Shape input_shape;
  Shape output_shape;
  std::vector<Tensor> params;

  std::size_t trainable_count() const;
  // Multiply-add style operation count for one sample.
  double flops_per_sample() const;

  friend bool operator==(const Layer&, const Layer&) = default;
};

// Architecture description: enough to infer shapes and build parameters.
struct LayerSpec {
  LayerKind kind = LayerKind::kRelu;
  std::size_t units = 0;   // dense outputs or conv output channels
  std::size_t kernel = 3;  // conv only, odd

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct LayerShape {
  Shape input;
  Shape output;
};

struct ModelSpec {
  Shape input_shape;
  std::vector<LayerSpec> layers;

  std::size_t depth() const { return layers.size(); }
  // Per-layer input/output shapes; throws ShapeError on an invalid stack.
  std::vector<LayerShape> shapes() const;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

// Builds a single layer with freshly initialized parameters, uniform in
// [-1/sqrt(fan_in), 1/sqrt(fan_in)]. Batch-norm starts at gamma=1, beta=0.
Layer MakeLayer(const LayerSpec& spec, const Shape& input_shape, int index,
                sim::RngStream& rng);

// FLOP count per sample for a layer of the given kind and shapes:
// dense 2*in*out, conv 2*kh*kw*c_in*c_out*h_out*w_out, others input size.
double LayerFlops(const LayerSpec& spec, const LayerShape& shapes);

}  // namespace splitsim::nn

#endif  // SPLITSIM_NN_LAYER_H_
