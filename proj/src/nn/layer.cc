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

#include "splitsim/nn/layer.h"

#include <cmath>
#include <string>

#include "splitsim/errors.h"

namespace splitsim::nn {

std::string_view LayerKindName(LayerKind kind) {
  switch (kind) {
    case LayerKind::kDense:
      return "dense";
    case LayerKind::kRelu:
      return "relu";
    case LayerKind::kConv2d:
      return "conv2d";
    case LayerKind::kMaxPool:
      return "maxpool";
    case LayerKind::kBatchNorm:
      return "batchnorm";
  }
  return "unknown";
}

LayerKind ParseLayerKind(std::string_view name) {
  if (name == "dense") return LayerKind::kDense;
  if (name == "relu") return LayerKind::kRelu;
  if (name == "conv2d" || name == "conv") return LayerKind::kConv2d;
  if (name == "maxpool" || name == "max-pool") return LayerKind::kMaxPool;
  if (name == "batchnorm" || name == "batch-norm") return LayerKind::kBatchNorm;
  throw ArgumentError("unknown layer kind '" + std::string(name) + "'");
}

std::size_t Layer::trainable_count() const {
  switch (kind) {
    case LayerKind::kDense:
    case LayerKind::kConv2d:
    case LayerKind::kBatchNorm:
      return 2;
    case LayerKind::kRelu:
    case LayerKind::kMaxPool:
      return 0;
  }
  return 0;
}

namespace {

Shape InferOutput(const LayerSpec& spec, const Shape& in) {
  switch (spec.kind) {
    case LayerKind::kDense:
      if (spec.units == 0) throw ShapeError("dense layer needs units > 0");
      return {spec.units};
    case LayerKind::kRelu:
    case LayerKind::kBatchNorm:
      return in;
    case LayerKind::kConv2d:
      if (in.size() != 3) {
        throw ShapeError("conv2d expects [C,H,W] input, got " + ShapeString(in));
      }
      if (spec.units == 0 || spec.kernel % 2 == 0) {
        throw ShapeError("conv2d needs channels > 0 and an odd kernel");
      }
      return {spec.units, in[1], in[2]};
    case LayerKind::kMaxPool:
      if (in.size() != 3 || in[1] < 2 || in[2] < 2) {
        throw ShapeError("maxpool expects [C,H>=2,W>=2] input, got " +
                         ShapeString(in));
      }
      return {in[0], in[1] / 2, in[2] / 2};
  }
  throw ShapeError("unknown layer kind");
}

}  // namespace

std::vector<LayerShape> ModelSpec::shapes() const {
  std::vector<LayerShape> out;
  out.reserve(layers.size());
  Shape cur = input_shape;
  if (cur.empty() || ShapeSize(cur) == 0) {
    throw ShapeError("model input shape must be non-empty");
  }
  for (const LayerSpec& spec : layers) {
    Shape next = InferOutput(spec, cur);
    out.push_back({cur, next});
    cur = std::move(next);
  }
  return out;
}

double LayerFlops(const LayerSpec& spec, const LayerShape& shapes) {
  double in = static_cast<double>(ShapeSize(shapes.input));
  double out = static_cast<double>(ShapeSize(shapes.output));
  switch (spec.kind) {
    case LayerKind::kDense:
      return 2.0 * in * out;
    case LayerKind::kConv2d: {
      double k2 = static_cast<double>(spec.kernel * spec.kernel);
      return 2.0 * k2 * static_cast<double>(shapes.input[0]) * out;
    }
    case LayerKind::kRelu:
    case LayerKind::kMaxPool:
    case LayerKind::kBatchNorm:
      return in;
  }
  return 0.0;
}

double Layer::flops_per_sample() const {
  LayerSpec spec{kind, 0, 3};
  if (kind == LayerKind::kConv2d) spec.kernel = params[0].dim(2);
  return LayerFlops(spec, {input_shape, output_shape});
}

Layer MakeLayer(const LayerSpec& spec, const Shape& input_shape, int index,
                sim::RngStream& rng) {
  Layer layer;
  layer.kind = spec.kind;
  layer.index = index;
  layer.input_shape = input_shape;
  layer.output_shape = InferOutput(spec, input_shape);

  auto uniform_fill = [&rng](Tensor& t, double fan_in) {
    double bound = 1.0 / std::sqrt(fan_in);
    for (double& v : t.values()) v = rng.uniform(-bound, bound);
  };

  switch (spec.kind) {
    case LayerKind::kDense: {
      std::size_t in = ShapeSize(input_shape);
      Tensor w({spec.units, in});
      Tensor b({spec.units});
      uniform_fill(w, static_cast<double>(in));
      uniform_fill(b, static_cast<double>(in));
      layer.params = {std::move(w), std::move(b)};
      break;
    }
    case LayerKind::kConv2d: {
      std::size_t c_in = input_shape[0];
      Tensor w({spec.units, c_in, spec.kernel, spec.kernel});
      Tensor b({spec.units});
      double fan_in = static_cast<double>(c_in * spec.kernel * spec.kernel);
      uniform_fill(w, fan_in);
      uniform_fill(b, fan_in);
      layer.params = {std::move(w), std::move(b)};
      break;
    }
    case LayerKind::kBatchNorm: {
      std::size_t c = input_shape[0];
      layer.params = {Tensor({c}, 1.0), Tensor({c}, 0.0), Tensor({c}, 0.0),
                      Tensor({c}, 1.0)};
      break;
    }
    case LayerKind::kRelu:
    case LayerKind::kMaxPool:
      break;
  }
  return layer;
}

}  // namespace splitsim::nn
