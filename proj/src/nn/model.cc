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

#include "splitsim/nn/model.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "splitsim/errors.h"

namespace splitsim::nn {

LayeredModel::LayeredModel(std::vector<Layer> layers)
    : layers_(std::move(layers)) {
  for (std::size_t i = 1; i < layers_.size(); ++i) {
    if (layers_[i - 1].output_shape != layers_[i].input_shape) {
      throw ShapeError("layer " + std::to_string(layers_[i - 1].index) +
                       " output " + ShapeString(layers_[i - 1].output_shape) +
                       " does not feed layer " +
                       std::to_string(layers_[i].index) + " input " +
                       ShapeString(layers_[i].input_shape));
    }
  }
}

const Shape& LayeredModel::input_shape() const {
  if (layers_.empty()) throw StateError("empty model has no input shape");
  return layers_.front().input_shape;
}

const Shape& LayeredModel::output_shape() const {
  if (layers_.empty()) throw StateError("empty model has no output shape");
  return layers_.back().output_shape;
}

std::size_t LayeredModel::parameter_count() const {
  std::size_t n = 0;
  for (const Layer& l : layers_) {
    for (const Tensor& p : l.params) n += p.size();
  }
  return n;
}

LayeredModel BuildModel(const ModelSpec& spec, sim::RngStream& rng) {
  std::vector<LayerShape> shapes = spec.shapes();
  std::vector<Layer> layers;
  layers.reserve(spec.layers.size());
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    layers.push_back(MakeLayer(spec.layers[i], shapes[i].input,
                               static_cast<int>(i + 1), rng));
  }
  return LayeredModel(std::move(layers));
}

std::pair<LayeredModel, LayeredModel> SplitModel(const LayeredModel& m,
                                                 std::size_t s) {
  if (s < 1 || s + 1 > m.depth()) {
    throw RangeError("split point " + std::to_string(s) + " outside 1.." +
                     std::to_string(m.depth() == 0 ? 0 : m.depth() - 1));
  }
  return {SliceModel(m, 0, s), SliceModel(m, s, m.depth())};
}

LayeredModel SliceModel(const LayeredModel& m, std::size_t first,
                        std::size_t last) {
  if (first > last || last > m.depth()) {
    throw RangeError("slice [" + std::to_string(first) + ", " +
                     std::to_string(last) + ") outside model of depth " +
                     std::to_string(m.depth()));
  }
  return LayeredModel(std::vector<Layer>(m.layers().begin() + first,
                                         m.layers().begin() + last));
}

LayeredModel ConcatModels(const LayeredModel& a, const LayeredModel& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  if (a.output_shape() != b.input_shape()) {
    throw ShapeError("cannot concatenate: seam " + ShapeString(a.output_shape()) +
                     " vs " + ShapeString(b.input_shape()));
  }
  std::vector<Layer> layers = a.layers();
  layers.insert(layers.end(), b.layers().begin(), b.layers().end());
  return LayeredModel(std::move(layers));
}

namespace {

Shape WithBatch(std::size_t batch, const Shape& sample) {
  Shape s;
  s.reserve(sample.size() + 1);
  s.push_back(batch);
  s.insert(s.end(), sample.begin(), sample.end());
  return s;
}

Tensor DenseForward(const Layer& l, const Tensor& x) {
  const Tensor& w = l.params[0];
  const Tensor& b = l.params[1];
  std::size_t batch = x.dim(0);
  std::size_t out = w.dim(0), in = w.dim(1);
  Tensor y(WithBatch(batch, l.output_shape));
  for (std::size_t n = 0; n < batch; ++n) {
    const double* xr = x.data() + n * in;
    double* yr = y.data() + n * out;
    for (std::size_t o = 0; o < out; ++o) {
      const double* wr = w.data() + o * in;
      double acc = b[o];
      for (std::size_t i = 0; i < in; ++i) acc += wr[i] * xr[i];
      yr[o] = acc;
    }
  }
  return y;
}

void DenseBackward(const Layer& l, const Tensor& x, const Tensor& g,
                   Tensor& dx, std::vector<Tensor>& grads) {
  const Tensor& w = l.params[0];
  std::size_t batch = x.dim(0);
  std::size_t out = w.dim(0), in = w.dim(1);
  Tensor dw(w.shape());
  Tensor db({out});
  dx = Tensor(x.shape());
  for (std::size_t n = 0; n < batch; ++n) {
    const double* xr = x.data() + n * in;
    const double* gr = g.data() + n * out;
    double* dxr = dx.data() + n * in;
    for (std::size_t o = 0; o < out; ++o) {
      double go = gr[o];
      db[o] += go;
      double* dwr = dw.data() + o * in;
      const double* wr = w.data() + o * in;
      for (std::size_t i = 0; i < in; ++i) {
        dwr[i] += go * xr[i];
        dxr[i] += go * wr[i];
      }
    }
  }
  grads = {std::move(dw), std::move(db)};
}

Tensor ReluForward(const Layer&, const Tensor& x) {
  Tensor y = x;
  for (double& v : y.values()) v = v > 0.0 ? v : 0.0;
  return y;
}

void ReluBackward(const Tensor& x, const Tensor& g, Tensor& dx) {
  dx = Tensor(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) dx[i] = x[i] > 0.0 ? g[i] : 0.0;
}

Tensor ConvForward(const Layer& l, const Tensor& x) {
  const Tensor& w = l.params[0];
  const Tensor& b = l.params[1];
  std::size_t batch = x.dim(0);
  std::size_t c_in = l.input_shape[0], h = l.input_shape[1], wd = l.input_shape[2];
  std::size_t c_out = w.dim(0), kh = w.dim(2), kw = w.dim(3);
  long ph = static_cast<long>(kh / 2), pw = static_cast<long>(kw / 2);
  Tensor y(WithBatch(batch, l.output_shape));
  for (std::size_t n = 0; n < batch; ++n) {
    const double* xn = x.data() + n * c_in * h * wd;
    double* yn = y.data() + n * c_out * h * wd;
    for (std::size_t o = 0; o < c_out; ++o) {
      double* yo = yn + o * h * wd;
      for (std::size_t i = 0; i < h * wd; ++i) yo[i] = b[o];
      for (std::size_t c = 0; c < c_in; ++c) {
        const double* xc = xn + c * h * wd;
        const double* wk = w.data() + (o * c_in + c) * kh * kw;
        for (std::size_t u = 0; u < kh; ++u) {
          for (std::size_t v = 0; v < kw; ++v) {
            double wv = wk[u * kw + v];
            long dy = static_cast<long>(u) - ph, dxo = static_cast<long>(v) - pw;
            std::size_t y0 = dy < 0 ? static_cast<std::size_t>(-dy) : 0;
            std::size_t y1 = dy > 0 ? h - static_cast<std::size_t>(dy) : h;
            std::size_t x0 = dxo < 0 ? static_cast<std::size_t>(-dxo) : 0;
            std::size_t x1 = dxo > 0 ? wd - static_cast<std::size_t>(dxo) : wd;
            for (std::size_t yy = y0; yy < y1; ++yy) {
              const double* xrow = xc + (yy + dy) * wd + dxo;
              double* yrow = yo + yy * wd;
              for (std::size_t xx = x0; xx < x1; ++xx) yrow[xx] += wv * xrow[xx];
            }
          }
        }
      }
    }
  }
  return y;
}

void ConvBackward(const Layer& l, const Tensor& x, const Tensor& g, Tensor& dx,
                  std::vector<Tensor>& grads) {
  const Tensor& w = l.params[0];
  std::size_t batch = x.dim(0);
  std::size_t c_in = l.input_shape[0], h = l.input_shape[1], wd = l.input_shape[2];
  std::size_t c_out = w.dim(0), kh = w.dim(2), kw = w.dim(3);
  long ph = static_cast<long>(kh / 2), pw = static_cast<long>(kw / 2);
  Tensor dw(w.shape());
  Tensor db({c_out});
  dx = Tensor(x.shape());
  for (std::size_t n = 0; n < batch; ++n) {
    const double* xn = x.data() + n * c_in * h * wd;
    double* dxn = dx.data() + n * c_in * h * wd;
    const double* gn = g.data() + n * c_out * h * wd;
    for (std::size_t o = 0; o < c_out; ++o) {
      const double* go = gn + o * h * wd;
      for (std::size_t i = 0; i < h * wd; ++i) db[o] += go[i];
      for (std::size_t c = 0; c < c_in; ++c) {
        const double* xc = xn + c * h * wd;
        double* dxc = dxn + c * h * wd;
        const double* wk = w.data() + (o * c_in + c) * kh * kw;
        double* dwk = dw.data() + (o * c_in + c) * kh * kw;
        for (std::size_t u = 0; u < kh; ++u) {
          for (std::size_t v = 0; v < kw; ++v) {
            double wv = wk[u * kw + v];
            double acc = 0.0;
            long dy = static_cast<long>(u) - ph, dxo = static_cast<long>(v) - pw;
            std::size_t y0 = dy < 0 ? static_cast<std::size_t>(-dy) : 0;
            std::size_t y1 = dy > 0 ? h - static_cast<std::size_t>(dy) : h;
            std::size_t x0 = dxo < 0 ? static_cast<std::size_t>(-dxo) : 0;
            std::size_t x1 = dxo > 0 ? wd - static_cast<std::size_t>(dxo) : wd;
            for (std::size_t yy = y0; yy < y1; ++yy) {
              const double* xrow = xc + (yy + dy) * wd + dxo;
              double* dxrow = dxc + (yy + dy) * wd + dxo;
              const double* grow = go + yy * wd;
              for (std::size_t xx = x0; xx < x1; ++xx) {
                acc += grow[xx] * xrow[xx];
                dxrow[xx] += grow[xx] * wv;
              }
            }
            dwk[u * kw + v] += acc;
          }
        }
      }
    }
  }
  grads = {std::move(dw), std::move(db)};
}

Tensor PoolForward(const Layer& l, const Tensor& x,
                   std::vector<std::size_t>* argmax) {
  std::size_t batch = x.dim(0);
  std::size_t c = l.input_shape[0], h = l.input_shape[1], w = l.input_shape[2];
  std::size_t ho = l.output_shape[1], wo = l.output_shape[2];
  Tensor y(WithBatch(batch, l.output_shape));
  if (argmax) argmax->assign(y.size(), 0);
  std::size_t k = 0;
  for (std::size_t n = 0; n < batch; ++n) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      std::size_t base = (n * c + ch) * h * w;
      for (std::size_t i = 0; i < ho; ++i) {
        for (std::size_t j = 0; j < wo; ++j, ++k) {
          std::size_t best = base + (2 * i) * w + 2 * j;
          for (std::size_t di = 0; di < 2; ++di) {
            for (std::size_t dj = 0; dj < 2; ++dj) {
              std::size_t idx = base + (2 * i + di) * w + 2 * j + dj;
              if (x[idx] > x[best]) best = idx;
            }
          }
          y[k] = x[best];
          if (argmax) (*argmax)[k] = best;
        }
      }
    }
  }
  return y;
}

// Channel count and per-channel element stride for batch-norm.
std::pair<std::size_t, std::size_t> NormLayout(const Layer& l) {
  std::size_t c = l.input_shape[0];
  return {c, ShapeSize(l.input_shape) / c};
}

Tensor NormForward(const Layer& l, const Tensor& x, Mode mode,
                   LayerCache* cache) {
  auto [c, spatial] = NormLayout(l);
  std::size_t batch = x.dim(0);
  const Tensor& gamma = l.params[0];
  const Tensor& beta = l.params[1];
  std::vector<double> mean(c), var(c), inv_std(c);
  if (mode == Mode::kTrain) {
    double m = static_cast<double>(batch * spatial);
    for (std::size_t ch = 0; ch < c; ++ch) {
      double s = 0.0;
      for (std::size_t n = 0; n < batch; ++n) {
        const double* p = x.data() + (n * c + ch) * spatial;
        for (std::size_t i = 0; i < spatial; ++i) s += p[i];
      }
      mean[ch] = s / m;
      double v = 0.0;
      for (std::size_t n = 0; n < batch; ++n) {
        const double* p = x.data() + (n * c + ch) * spatial;
        for (std::size_t i = 0; i < spatial; ++i) {
          double d = p[i] - mean[ch];
          v += d * d;
        }
      }
      var[ch] = v / m;
    }
  } else {
    for (std::size_t ch = 0; ch < c; ++ch) {
      mean[ch] = l.params[2][ch];
      var[ch] = l.params[3][ch];
    }
  }
  for (std::size_t ch = 0; ch < c; ++ch) {
    inv_std[ch] = 1.0 / std::sqrt(var[ch] + kBatchNormEps);
  }
  Tensor y(x.shape());
  Tensor xhat(x.shape());
  for (std::size_t n = 0; n < batch; ++n) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      std::size_t off = (n * c + ch) * spatial;
      for (std::size_t i = 0; i < spatial; ++i) {
        double h = (x[off + i] - mean[ch]) * inv_std[ch];
        xhat[off + i] = h;
        y[off + i] = gamma[ch] * h + beta[ch];
      }
    }
  }
  if (cache) {
    cache->normalized = std::move(xhat);
    cache->inv_std = std::move(inv_std);
    cache->batch_mean = std::move(mean);
    cache->batch_var = std::move(var);
  }
  return y;
}

void NormBackward(const Layer& l, const LayerCache& cache, Mode mode,
                  const Tensor& g, Tensor& dx, std::vector<Tensor>& grads) {
  auto [c, spatial] = NormLayout(l);
  std::size_t batch = g.dim(0);
  const Tensor& gamma = l.params[0];
  const Tensor& xhat = cache.normalized;
  Tensor dgamma({c});
  Tensor dbeta({c});
  dx = Tensor(g.shape());
  double m = static_cast<double>(batch * spatial);
  for (std::size_t ch = 0; ch < c; ++ch) {
    double sum_g = 0.0, sum_gx = 0.0;
    for (std::size_t n = 0; n < batch; ++n) {
      std::size_t off = (n * c + ch) * spatial;
      for (std::size_t i = 0; i < spatial; ++i) {
        sum_g += g[off + i];
        sum_gx += g[off + i] * xhat[off + i];
      }
    }
    dgamma[ch] = sum_gx;
    dbeta[ch] = sum_g;
    double scale = gamma[ch] * cache.inv_std[ch];
    for (std::size_t n = 0; n < batch; ++n) {
      std::size_t off = (n * c + ch) * spatial;
      for (std::size_t i = 0; i < spatial; ++i) {
        if (mode == Mode::kTrain) {
          dx[off + i] =
              scale * (g[off + i] - sum_g / m - xhat[off + i] * sum_gx / m);
        } else {
          dx[off + i] = scale * g[off + i];
        }
      }
    }
  }
  grads = {std::move(dgamma), std::move(dbeta)};
}

}  // namespace

ForwardResult Forward(const LayeredModel& m, const Tensor& x, Mode mode,
                      bool record_tape) {
  if (m.empty()) {
    ForwardResult r{x, std::nullopt};
    if (record_tape) r.tape = Tape{mode, {}};
    return r;
  }
  if (x.rank() < 1 || x.sample_shape() != m.input_shape()) {
    throw ShapeError("input " + ShapeString(x.shape()) +
                     " does not match model input " +
                     ShapeString(m.input_shape()) + " (plus batch)");
  }
  ForwardResult result;
  if (record_tape) {
    result.tape = Tape{mode, {}};
    result.tape->caches.resize(m.depth());
  }
  Tensor cur = x;
  for (std::size_t j = 0; j < m.depth(); ++j) {
    const Layer& l = m.layer(j);
    LayerCache* cache = record_tape ? &result.tape->caches[j] : nullptr;
    Tensor next;
    switch (l.kind) {
      case LayerKind::kDense:
        next = DenseForward(l, cur);
        break;
      case LayerKind::kRelu:
        next = ReluForward(l, cur);
        break;
      case LayerKind::kConv2d:
        next = ConvForward(l, cur);
        break;
      case LayerKind::kMaxPool:
        next = PoolForward(l, cur, cache ? &cache->argmax : nullptr);
        break;
      case LayerKind::kBatchNorm:
        next = NormForward(l, cur, mode, cache);
        break;
    }
    if (cache) cache->input = std::move(cur);
    cur = std::move(next);
  }
  result.output = std::move(cur);
  return result;
}

GradientPacket Backward(const LayeredModel& m, const std::optional<Tape>& tape,
                        const Tensor& upstream_grad) {
  if (!tape) throw StateError("backward called without a recorded tape");
  if (tape->caches.size() != m.depth()) {
    throw StateError("tape was recorded on a model of different depth");
  }
  GradientPacket packet;
  packet.param_grads.resize(m.depth());
  Tensor g = upstream_grad;
  if (!m.empty()) {
    Shape expected = WithBatch(tape->caches.back().input.dim(0), m.output_shape());
    if (g.shape() != expected) {
      throw ShapeError("upstream gradient " + ShapeString(g.shape()) +
                       " does not match output " + ShapeString(expected));
    }
  }
  for (std::size_t jj = m.depth(); jj-- > 0;) {
    const Layer& l = m.layer(jj);
    const LayerCache& cache = tape->caches[jj];
    Tensor dx;
    switch (l.kind) {
      case LayerKind::kDense:
        DenseBackward(l, cache.input, g, dx, packet.param_grads[jj]);
        break;
      case LayerKind::kRelu:
        ReluBackward(cache.input, g, dx);
        break;
      case LayerKind::kConv2d:
        ConvBackward(l, cache.input, g, dx, packet.param_grads[jj]);
        break;
      case LayerKind::kMaxPool:
        dx = Tensor(cache.input.shape());
        for (std::size_t k = 0; k < g.size(); ++k) dx[cache.argmax[k]] += g[k];
        break;
      case LayerKind::kBatchNorm:
        NormBackward(l, cache, tape->mode, g, dx, packet.param_grads[jj]);
        break;
    }
    g = std::move(dx);
  }
  packet.boundary_grad = std::move(g);
  return packet;
}

void SgdStep(LayeredModel& m, const GradientPacket& grads, double lr,
             double l2_lambda) {
  if (!(lr >= 0.0) || !(l2_lambda >= 0.0)) {
    throw ArgumentError("learning rate and l2 lambda must be non-negative");
  }
  if (grads.param_grads.size() != m.depth()) {
    throw ShapeError("gradient packet covers " +
                     std::to_string(grads.param_grads.size()) +
                     " layers, model has " + std::to_string(m.depth()));
  }
  for (std::size_t j = 0; j < m.depth(); ++j) {
    const auto& lg = grads.param_grads[j];
    Layer& layer = m.layer(j);
    if (lg.size() != layer.trainable_count()) {
      throw ShapeError("layer " + std::to_string(layer.index) +
                       " gradient count mismatch");
    }
    for (const Tensor& t : lg) {
      if (!t.all_finite()) {
        throw NumericError("non-finite gradient in layer " +
                           std::to_string(layer.index));
      }
    }
  }
  for (std::size_t j = 0; j < m.depth(); ++j) {
    Layer& layer = m.layer(j);
    for (std::size_t p = 0; p < layer.trainable_count(); ++p) {
      Tensor& param = layer.params[p];
      const Tensor& g = grads.param_grads[j][p];
      for (std::size_t i = 0; i < param.size(); ++i) {
        param[i] -= lr * (g[i] + l2_lambda * param[i]);
      }
    }
  }
}

void ApplyBatchStatistics(LayeredModel& m, const Tape& tape) {
  if (tape.mode != Mode::kTrain) return;
  for (std::size_t j = 0; j < m.depth(); ++j) {
    Layer& l = m.layer(j);
    if (l.kind != LayerKind::kBatchNorm) continue;
    const LayerCache& cache = tape.caches.at(j);
    double count = static_cast<double>(cache.input.size() / l.input_shape[0]);
    double unbias = count > 1 ? count / (count - 1) : 1.0;
    for (std::size_t ch = 0; ch < l.input_shape[0]; ++ch) {
      l.params[2][ch] = (1 - kBatchNormMomentum) * l.params[2][ch] +
                        kBatchNormMomentum * cache.batch_mean[ch];
      l.params[3][ch] = (1 - kBatchNormMomentum) * l.params[3][ch] +
                        kBatchNormMomentum * cache.batch_var[ch] * unbias;
    }
  }
}

Tensor Softmax(const Tensor& logits) {
  if (logits.rank() != 2) throw ShapeError("softmax expects [batch, classes]");
  std::size_t batch = logits.dim(0), classes = logits.dim(1);
  Tensor p(logits.shape());
  for (std::size_t n = 0; n < batch; ++n) {
    const double* z = logits.data() + n * classes;
    double* pr = p.data() + n * classes;
    double mx = *std::max_element(z, z + classes);
    double sum = 0.0;
    for (std::size_t c = 0; c < classes; ++c) {
      pr[c] = std::exp(z[c] - mx);
      sum += pr[c];
    }
    for (std::size_t c = 0; c < classes; ++c) pr[c] /= sum;
  }
  return p;
}

LossResult SoftmaxCrossEntropy(const Tensor& logits,
                               std::span<const int> labels) {
  if (logits.rank() != 2 || logits.dim(0) != labels.size()) {
    throw ShapeError("logits " + ShapeString(logits.shape()) + " vs " +
                     std::to_string(labels.size()) + " labels");
  }
  std::size_t batch = logits.dim(0), classes = logits.dim(1);
  LossResult r;
  r.grad = Softmax(logits);
  double inv_batch = 1.0 / static_cast<double>(batch);
  for (std::size_t n = 0; n < batch; ++n) {
    int y = labels[n];
    if (y < 0 || static_cast<std::size_t>(y) >= classes) {
      throw ArgumentError("label " + std::to_string(y) + " out of range");
    }
    double* pr = r.grad.data() + n * classes;
    r.loss -= std::log(std::max(pr[y], std::numeric_limits<double>::min()));
    pr[y] -= 1.0;
    for (std::size_t c = 0; c < classes; ++c) pr[c] *= inv_batch;
  }
  r.loss *= inv_batch;
  return r;
}

std::vector<int> Argmax(const Tensor& logits) {
  std::size_t batch = logits.dim(0), classes = logits.dim(1);
  std::vector<int> out(batch);
  for (std::size_t n = 0; n < batch; ++n) {
    const double* z = logits.data() + n * classes;
    out[n] = static_cast<int>(std::max_element(z, z + classes) - z);
  }
  return out;
}

double TrainStep(LayeredModel& m, const Tensor& x, std::span<const int> labels,
                 double lr, double l2_lambda) {
  ForwardResult fwd = Forward(m, x, Mode::kTrain, true);
  LossResult loss = SoftmaxCrossEntropy(fwd.output, labels);
  GradientPacket packet = Backward(m, fwd.tape, loss.grad);
  packet.loss_value = loss.loss;
  SgdStep(m, packet, lr, l2_lambda);
  ApplyBatchStatistics(m, *fwd.tape);
  return loss.loss;
}

namespace {

constexpr const char* kCheckpointMagic = "splitsim-model";
constexpr int kCheckpointVersion = 1;

void WriteShape(std::ostream& os, const Shape& s) {
  os << s.size();
  for (std::size_t d : s) os << ' ' << d;
}

Shape ReadShape(std::istream& is) {
  std::size_t rank = 0;
  if (!(is >> rank)) throw ArgumentError("checkpoint: bad shape rank");
  Shape s(rank);
  for (std::size_t& d : s) {
    if (!(is >> d)) throw ArgumentError("checkpoint: bad shape");
  }
  return s;
}

void Expect(std::istream& is, const std::string& token) {
  std::string got;
  if (!(is >> got) || got != token) {
    throw ArgumentError("checkpoint: expected '" + token + "', got '" + got + "'");
  }
}

}  // namespace

void WriteCheckpoint(std::ostream& os, const LayeredModel& m) {
  os << kCheckpointMagic << ' ' << kCheckpointVersion << '\n';
  os << "layers " << m.depth() << '\n';
  char buf[64];
  for (const Layer& l : m.layers()) {
    os << "layer " << LayerKindName(l.kind) << ' ' << l.index << '\n';
    os << "in ";
    WriteShape(os, l.input_shape);
    os << "\nout ";
    WriteShape(os, l.output_shape);
    os << "\nparams " << l.params.size() << '\n';
    for (const Tensor& p : l.params) {
      os << "tensor ";
      WriteShape(os, p.shape());
      for (double v : p.values()) {
        std::snprintf(buf, sizeof(buf), " %a", v);
        os << buf;
      }
      os << '\n';
    }
  }
}

LayeredModel ReadCheckpoint(std::istream& is) {
  Expect(is, kCheckpointMagic);
  int version = 0;
  if (!(is >> version) || version != kCheckpointVersion) {
    throw ArgumentError("checkpoint: unsupported version");
  }
  Expect(is, "layers");
  std::size_t k = 0;
  is >> k;
  std::vector<Layer> layers(k);
  for (Layer& l : layers) {
    Expect(is, "layer");
    std::string kind;
    is >> kind >> l.index;
    l.kind = ParseLayerKind(kind);
    Expect(is, "in");
    l.input_shape = ReadShape(is);
    Expect(is, "out");
    l.output_shape = ReadShape(is);
    Expect(is, "params");
    std::size_t np = 0;
    is >> np;
    for (std::size_t p = 0; p < np; ++p) {
      Expect(is, "tensor");
      Shape s = ReadShape(is);
      std::vector<double> data(ShapeSize(s));
      for (double& v : data) {
        std::string tok;
        if (!(is >> tok)) throw ArgumentError("checkpoint: truncated tensor");
        char* end = nullptr;
        v = std::strtod(tok.c_str(), &end);
        if (end == tok.c_str()) throw ArgumentError("checkpoint: bad number");
      }
      l.params.emplace_back(std::move(s), std::move(data));
    }
  }
  if (!is) throw ArgumentError("checkpoint: truncated stream");
  return LayeredModel(std::move(layers));
}

}  // namespace splitsim::nn
