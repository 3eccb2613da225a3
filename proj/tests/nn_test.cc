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

#include <sstream>

#include <gtest/gtest.h>

#include "fd_check.h"
#include "splitsim/errors.h"
#include "splitsim/nn/model.h"

namespace splitsim::nn {
namespace {

ModelSpec DenseChain(std::size_t k) {
  ModelSpec spec{{3}, {}};
  for (std::size_t i = 0; i < k; ++i) spec.layers.push_back({LayerKind::kDense, 3, 3});
  return spec;
}

Layer DenseLayer(std::vector<double> w, std::vector<double> b, std::size_t in, std::size_t out,
                 int index) {
  Layer l;
  l.kind = LayerKind::kDense;
  l.index = index;
  l.input_shape = {in};
  l.output_shape = {out};
  l.params = {Tensor({out, in}, std::move(w)), Tensor({out}, std::move(b))};
  return l;
}

Layer ReluLayer(std::size_t n, int index) {
  Layer l;
  l.kind = LayerKind::kRelu;
  l.index = index;
  l.input_shape = {n};
  l.output_shape = {n};
  return l;
}

TEST(SplitModel, LengthsFollowSplitIndex) {
  sim::RngStream rng(1);
  LayeredModel m = BuildModel(DenseChain(10), rng);
  auto [prefix, suffix] = SplitModel(m, 5);
  EXPECT_EQ(prefix.depth(), 5u);
  EXPECT_EQ(suffix.depth(), 5u);
  EXPECT_EQ(suffix.layer(0).index, 6);

  LayeredModel two = BuildModel(DenseChain(2), rng);
  auto [p2, s2] = SplitModel(two, 1);
  EXPECT_EQ(p2.layer(0), two.layer(0));
  EXPECT_EQ(s2.layer(0), two.layer(1));
}

TEST(SplitModel, RejectsOutOfRangeSplit) {
  sim::RngStream rng(1);
  LayeredModel m = BuildModel(DenseChain(3), rng);
  EXPECT_THROW(SplitModel(m, 0), RangeError);
  EXPECT_THROW(SplitModel(m, 3), RangeError);
}

TEST(ConcatModels, RoundTripsSplit) {
  sim::RngStream rng(7);
  ModelSpec spec{{1, 6, 6},
                 {{LayerKind::kConv2d, 2, 3},
                  {LayerKind::kRelu},
                  {LayerKind::kMaxPool},
                  {LayerKind::kDense, 3}}};
  LayeredModel m = BuildModel(spec, rng);
  for (std::size_t s = 1; s < m.depth(); ++s) {
    auto [a, b] = SplitModel(m, s);
    EXPECT_EQ(ConcatModels(a, b), m) << "s=" << s;
  }
  EXPECT_EQ(ConcatModels(LayeredModel(), m), m);
  EXPECT_EQ(ConcatModels(SliceModel(m, 0, 3), SliceModel(m, 3, 4)), m);
}

TEST(Forward, IdentityDenseLayer) {
  LayeredModel m({DenseLayer({1, 0, 0, 1}, {0, 0}, 2, 2, 1)});
  Tensor y = Forward(m, Tensor({1, 2}, {1.0, 2.0}), Mode::kEval, false).output;
  EXPECT_EQ(y, Tensor({1, 2}, {1.0, 2.0}));
}

TEST(Forward, ReluClampsNegatives) {
  LayeredModel m({ReluLayer(2, 1)});
  Tensor y = Forward(m, Tensor({1, 2}, {-1.0, 2.0}), Mode::kEval, false).output;
  EXPECT_EQ(y, Tensor({1, 2}, {0.0, 2.0}));
}

TEST(Forward, MatchesHandMatrixChain) {
  // y = W3 relu(W2 relu(W1 x + b1) + b2) + b3 with 2x2 matrices.
  std::vector<double> w1{0.5, -1.0, 2.0, 0.25}, b1{0.1, -0.2};
  std::vector<double> w2{1.5, 0.5, -0.75, 1.0}, b2{0.0, 0.3};
  std::vector<double> w3{-1.0, 2.0, 0.5, 0.5}, b3{0.05, -0.05};
  LayeredModel m({DenseLayer(w1, b1, 2, 2, 1), ReluLayer(2, 2), DenseLayer(w2, b2, 2, 2, 3),
                  ReluLayer(2, 4), DenseLayer(w3, b3, 2, 2, 5)});
  double x0 = 0.8, x1 = -0.3;
  auto relu = [](double v) { return v > 0 ? v : 0.0; };
  double h0 = relu(w1[0] * x0 + w1[1] * x1 + b1[0]);
  double h1 = relu(w1[2] * x0 + w1[3] * x1 + b1[1]);
  double g0 = relu(w2[0] * h0 + w2[1] * h1 + b2[0]);
  double g1 = relu(w2[2] * h0 + w2[3] * h1 + b2[1]);
  double y0 = w3[0] * g0 + w3[1] * g1 + b3[0];
  double y1 = w3[2] * g0 + w3[3] * g1 + b3[1];
  Tensor y = Forward(m, Tensor({1, 2}, {x0, x1}), Mode::kEval, false).output;
  EXPECT_NEAR(y[0], y0, 1e-12);
  EXPECT_NEAR(y[1], y1, 1e-12);
}

TEST(Backward, DenseWeightGradIsOuterProduct) {
  LayeredModel m({DenseLayer({0.3, -0.2, 0.7, 0.1, 0.9, -0.4}, {0, 0}, 3, 2, 1)});
  Tensor x({1, 3}, {1.5, -2.0, 0.25});
  ForwardResult f = Forward(m, x, Mode::kTrain, true);
  GradientPacket g = Backward(m, f.tape, Tensor({1, 2}, {1.0, 0.0}));
  EXPECT_EQ(g.param_grads[0][0], Tensor({2, 3}, {1.5, -2.0, 0.25, 0.0, 0.0, 0.0}));
  EXPECT_EQ(g.param_grads[0][1], Tensor({2}, {1.0, 0.0}));
}

TEST(Backward, ReluBlocksGradientOfInactiveUnit) {
  LayeredModel m({ReluLayer(2, 1)});
  Tensor x({1, 2}, {-0.5, 0.5});
  ForwardResult f = Forward(m, x, Mode::kTrain, true);
  GradientPacket g = Backward(m, f.tape, Tensor({1, 2}, {3.0, 3.0}));
  EXPECT_EQ(g.boundary_grad[0], 0.0);
  EXPECT_EQ(g.boundary_grad[1], 3.0);
}

TEST(Backward, WithoutTapeIsStateError) {
  sim::RngStream rng(2);
  LayeredModel m = BuildModel(DenseChain(2), rng);
  EXPECT_THROW(Backward(m, std::nullopt, Tensor({1, 3})), StateError);
}

class FiniteDifference : public ::testing::TestWithParam<int> {};

TEST_P(FiniteDifference, AnalyticMatchesCentralDifferences) {
  std::vector<ModelSpec> specs = {
      {{4}, {{LayerKind::kDense, 5}, {LayerKind::kRelu}, {LayerKind::kDense, 3}}},
      {{1, 6, 6},
       {{LayerKind::kConv2d, 2, 3}, {LayerKind::kRelu}, {LayerKind::kMaxPool},
        {LayerKind::kDense, 3}}},
      {{2, 4, 4},
       {{LayerKind::kConv2d, 3, 3}, {LayerKind::kBatchNorm}, {LayerKind::kRelu},
        {LayerKind::kDense, 2}}},
  };
  int seed = GetParam();
  const ModelSpec& spec = specs[static_cast<std::size_t>(seed) % specs.size()];
  sim::RngStream rng(static_cast<std::uint64_t>(seed));
  LayeredModel m = BuildModel(spec, rng);
  Shape xs = spec.input_shape;
  xs.insert(xs.begin(), 3);
  Tensor x(xs);
  for (double& v : x.values()) v = rng.uniform(-1.0, 1.0);
  Shape ys = m.output_shape();
  ys.insert(ys.begin(), 3);
  Tensor w(ys);
  for (double& v : w.values()) v = rng.uniform(-1.0, 1.0);
  testing::FdReport rep = testing::CheckGradients(m, x, w, Mode::kTrain);
  EXPECT_LT(rep.max_rel_error, 1e-4);
  EXPECT_GT(rep.checked, rep.skipped);
}

INSTANTIATE_TEST_SUITE_P(RandomNets, FiniteDifference, ::testing::Range(0, 9));

TEST(SoftmaxCrossEntropy, GradientMatchesFiniteDifference) {
  Tensor logits({2, 3}, {0.2, -1.0, 0.7, 1.5, 0.1, -0.3});
  std::vector<int> labels{2, 0};
  LossResult r = SoftmaxCrossEntropy(logits, labels);
  for (std::size_t i = 0; i < logits.size(); ++i) {
    Tensor up = logits, down = logits;
    up[i] += 1e-6;
    down[i] -= 1e-6;
    double fd = (SoftmaxCrossEntropy(up, labels).loss - SoftmaxCrossEntropy(down, labels).loss) /
                2e-6;
    EXPECT_NEAR(r.grad[i], fd, 1e-8);
  }
}

TEST(SgdStep, ClosedForms) {
  LayeredModel m({DenseLayer({1.0}, {1.0}, 1, 1, 1)});
  GradientPacket g;
  g.param_grads = {{Tensor({1, 1}, {1.0}), Tensor({1}, {0.0})}};
  LayeredModel a = m;
  SgdStep(a, g, 0.1, 0.0);
  EXPECT_DOUBLE_EQ(a.layer(0).params[0][0], 0.9);
  LayeredModel b = m;
  SgdStep(b, g, 0.1, 0.08);
  EXPECT_DOUBLE_EQ(b.layer(0).params[1][0], 0.992);  // zero grad, decay only
}

TEST(SgdStep, TwoStepsEqualSummedStepOnlyWithoutDecay) {
  LayeredModel m({DenseLayer({1.0}, {0.5}, 1, 1, 1)});
  GradientPacket g1, g2, sum;
  g1.param_grads = {{Tensor({1, 1}, {0.25}), Tensor({1}, {0.5})}};
  g2.param_grads = {{Tensor({1, 1}, {-0.75}), Tensor({1}, {1.0})}};
  sum.param_grads = {{Tensor({1, 1}, {-0.5}), Tensor({1}, {1.5})}};
  for (double lambda : {0.0, 0.08}) {
    LayeredModel twice = m, once = m;
    SgdStep(twice, g1, 0.1, lambda);
    SgdStep(twice, g2, 0.1, lambda);
    SgdStep(once, sum, 0.1, lambda);
    double diff = std::abs(twice.layer(0).params[0][0] - once.layer(0).params[0][0]);
    if (lambda == 0.0) {
      EXPECT_LT(diff, 1e-15);
    } else {
      EXPECT_GT(diff, 1e-4);
    }
  }
}

TEST(Checkpoint, RoundTripIsBitExact) {
  sim::RngStream rng(11);
  ModelSpec spec{{1, 4, 4},
                 {{LayerKind::kConv2d, 2, 3}, {LayerKind::kBatchNorm}, {LayerKind::kRelu},
                  {LayerKind::kMaxPool}, {LayerKind::kDense, 3}}};
  LayeredModel m = BuildModel(spec, rng);
  m.layer(0).params[0][0] = 1.0 / 3.0;
  std::stringstream ss;
  WriteCheckpoint(ss, m);
  EXPECT_EQ(ReadCheckpoint(ss), m);
}

TEST(Checkpoint, RejectsGarbage) {
  std::stringstream ss("not a checkpoint");
  EXPECT_ANY_THROW(ReadCheckpoint(ss));
}

TEST(ModelSpec, ShapeInferenceRejectsBadStack) {
  ModelSpec bad{{4}, {{LayerKind::kConv2d, 2, 3}}};
  EXPECT_THROW(bad.shapes(), ShapeError);
}

TEST(TrainStep, ReducesLossOnFixedBatch) {
  sim::RngStream rng(5);
  LayeredModel m = BuildModel(
      {{2}, {{LayerKind::kDense, 8}, {LayerKind::kRelu}, {LayerKind::kDense, 2}}}, rng);
  Tensor x({4, 2}, {1, 1, -1, -1, 1, -1, -1, 1});
  std::vector<int> y{0, 0, 1, 1};
  double first = TrainStep(m, x, y, 0.1, 0.0);
  double last = first;
  for (int i = 0; i < 200; ++i) last = TrainStep(m, x, y, 0.1, 0.0);
  EXPECT_LT(last, first);
}

}  // namespace
}  // namespace splitsim::nn
