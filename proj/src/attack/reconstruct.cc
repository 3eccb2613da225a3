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

#include "splitsim/attack/reconstruct.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "splitsim/errors.h"

namespace splitsim::attack {

namespace {

constexpr double kTvEps = 1e-6;

nn::LayerSpec SpecOf(const nn::Layer& layer) {
  nn::LayerSpec spec;
  spec.kind = layer.kind;
  switch (layer.kind) {
    case nn::LayerKind::kDense:
      spec.units = nn::ShapeSize(layer.output_shape);
      break;
    case nn::LayerKind::kConv2d:
      spec.units = layer.output_shape.at(0);
      spec.kernel = layer.params.at(0).dim(2);
      break;
    default:
      break;
  }
  return spec;
}

struct Objective {
  double value = 0.0;
  nn::GradientPacket grads;
  nn::Tensor tv_grad;
};

// Objective and gradients with respect to x and every surrogate parameter.
Objective Evaluate(const nn::LayeredModel& w, const nn::Tensor& x,
                   const nn::Tensor& z, double tv_weight) {
  nn::ForwardResult fwd = nn::Forward(w, x, nn::Mode::kEval, true);
  if (fwd.output.shape() != z.shape()) {
    throw ShapeError("reconstruction target " + nn::ShapeString(z.shape()) +
                     " does not match prefix output " +
                     nn::ShapeString(fwd.output.shape()));
  }
  double n = static_cast<double>(z.size());
  nn::Tensor upstream(z.shape());
  double mse = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    double d = fwd.output[i] - z[i];
    mse += d * d;
    upstream[i] = 2.0 * d / n;
  }
  Objective obj;
  obj.grads = nn::Backward(w, fwd.tape, upstream);
  obj.tv_grad = nn::Tensor(x.shape());
  double tv = tv_weight > 0.0 ? TotalVariation(x, &obj.tv_grad) : 0.0;
  obj.value = mse / n + tv_weight * tv;
  return obj;
}

}  // namespace

double TotalVariation(const nn::Tensor& x, nn::Tensor* grad) {
  if (x.rank() < 2) throw ShapeError("total variation needs a batch dimension");
  std::size_t rows = 1, cols = x.dim(x.rank() - 1);
  if (x.rank() >= 3) rows = x.dim(x.rank() - 2);
  std::size_t plane = rows * cols;
  std::size_t planes = x.size() / plane;
  if (grad != nullptr) {
    if (grad->shape() != x.shape()) *grad = nn::Tensor(x.shape());
    std::fill(grad->values().begin(), grad->values().end(), 0.0);
  }
  double total = 0.0;
  for (std::size_t p = 0; p < planes; ++p) {
    const double* v = x.data() + p * plane;
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        std::size_t i = r * cols + c;
        double dx = c + 1 < cols ? v[i + 1] - v[i] : 0.0;
        double dy = r + 1 < rows ? v[i + cols] - v[i] : 0.0;
        double mag = std::sqrt(dx * dx + dy * dy + kTvEps);
        total += mag;
        if (grad == nullptr) continue;
        double* g = grad->data() + p * plane;
        if (c + 1 < cols) {
          g[i + 1] += dx / mag;
          g[i] -= dx / mag;
        }
        if (r + 1 < rows) {
          g[i + cols] += dy / mag;
          g[i] -= dy / mag;
        }
      }
    }
  }
  double scale = 1.0 / static_cast<double>(x.size());
  if (grad != nullptr) {
    for (double& g : grad->values()) g *= scale;
  }
  return total * scale;
}

nn::LayeredModel Reinitialize(const nn::LayeredModel& m, sim::RngStream& rng) {
  std::vector<nn::Layer> layers;
  layers.reserve(m.depth());
  for (const nn::Layer& layer : m.layers()) {
    layers.push_back(nn::MakeLayer(SpecOf(layer), layer.input_shape, layer.index, rng));
  }
  return nn::LayeredModel(std::move(layers));
}

ReconstructionResult UnsplitReconstruct(const nn::Tensor& z,
                                        const nn::LayeredModel& surrogate,
                                        const AttackOptions& options,
                                        sim::RngStream rng) {
  if (surrogate.empty()) throw ArgumentError("reconstruction needs a prefix");
  if (options.iterations < 0) throw ArgumentError("iterations must be >= 0");
  if (z.rank() < 2) throw ShapeError("z needs a batch dimension");
  sim::RngStream init_rng = rng.derive("x0");
  sim::RngStream model_rng = rng.derive("surrogate");
  nn::LayeredModel w =
      options.reinitialize_surrogate ? Reinitialize(surrogate, model_rng) : surrogate;

  nn::Shape x_shape{z.dim(0)};
  for (std::size_t d : surrogate.input_shape()) x_shape.push_back(d);
  nn::Tensor x(x_shape);
  for (double& v : x.values()) {
    v = std::clamp(0.5 + options.init_jitter * init_rng.uniform(-1.0, 1.0), 0.0, 1.0);
  }

  ReconstructionResult best{x, w, std::numeric_limits<double>::infinity(), 0, true};
  if (options.iterations == 0) {
    best.objective = Evaluate(w, x, z, options.tv_weight).value;
    return best;
  }
  for (int it = 0; it < options.iterations; ++it) {
    Objective obj = Evaluate(w, x, z, options.tv_weight);
    if (!std::isfinite(obj.value)) {
      best.converged = false;
      break;
    }
    if (obj.value < best.objective) {
      best.x_hat = x;
      best.surrogate = w;
      best.objective = obj.value;
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
      double g = obj.grads.boundary_grad[i] + options.tv_weight * obj.tv_grad[i];
      x[i] = std::clamp(x[i] - options.lr_input * g, 0.0, 1.0);
    }
    if (options.lr_model > 0.0) {
      Objective after = Evaluate(w, x, z, 0.0);
      bool finite = true;
      for (const auto& layer : after.grads.param_grads) {
        for (const nn::Tensor& t : layer) finite = finite && t.all_finite();
      }
      if (!finite) {
        best.converged = false;
        best.iterations = it + 1;
        break;
      }
      nn::SgdStep(w, after.grads, options.lr_model, 0.0);
    }
    best.iterations = it + 1;
  }
  if (best.converged) {
    Objective last = Evaluate(w, x, z, options.tv_weight);
    if (std::isfinite(last.value) && last.value < best.objective) {
      best.x_hat = x;
      best.surrogate = w;
      best.objective = last.value;
    }
  }
  return best;
}

}  // namespace splitsim::attack
