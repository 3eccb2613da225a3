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

#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "oracles.h"
#include "splitsim/errors.h"
#include "splitsim/profiler/energy_profile.h"
#include "splitsim/protocol/noise.h"
#include "splitsim/protocol/protocol.h"

namespace splitsim::protocol {
namespace {

struct Moments {
  double variance = 0.0;
  double excess_kurtosis = 0.0;
};

Moments NoiseMoments(double sigma, NoiseFamily family, std::size_t n, std::uint64_t seed) {
  sim::RngStream rng(seed);
  nn::Tensor z({n});
  nn::Tensor y = InjectNoise(z, sigma, rng, family);
  double m2 = 0.0, m4 = 0.0;
  for (double v : y.values()) {
    m2 += v * v;
    m4 += v * v * v * v;
  }
  m2 /= static_cast<double>(n);
  m4 /= static_cast<double>(n);
  return {m2, m4 / (m2 * m2) - 3.0};
}

TEST(InjectNoise, ZeroSigmaIsIdentity) {
  sim::RngStream rng(1);
  nn::Tensor z({2, 3}, {1, -2, 3.5, 0, 1e-9, -7});
  EXPECT_EQ(InjectNoise(z, 0.0, rng), z);
  EXPECT_EQ(rng.counter(), 0u);
}

TEST(InjectNoise, LaplaceVarianceAndKurtosis) {
  Moments a = NoiseMoments(1.5, NoiseFamily::kLaplace, 1000000, 3);
  EXPECT_NEAR(a.variance, 2.25, 0.02);
  Moments b = NoiseMoments(1.0, NoiseFamily::kLaplace, 1000000, 4);
  EXPECT_NEAR(b.excess_kurtosis, 3.0, 0.2);
}

TEST(InjectNoise, GaussianHasNoExcessKurtosis) {
  Moments g = NoiseMoments(1.0, NoiseFamily::kGaussian, 400000, 5);
  EXPECT_NEAR(g.variance, 1.0, 0.01);
  EXPECT_NEAR(g.excess_kurtosis, 0.0, 0.05);
}

TEST(InjectNoise, NegativeSigmaRejected) {
  sim::RngStream rng(1);
  EXPECT_THROW(InjectNoise(nn::Tensor({2}), -0.1, rng), ArgumentError);
}

nn::Layer Scalar(double w, int index) {
  nn::Layer l;
  l.kind = nn::LayerKind::kDense;
  l.index = index;
  l.input_shape = {1};
  l.output_shape = {1};
  l.params = {nn::Tensor({1, 1}, {w}), nn::Tensor({1}, {0.0})};
  return l;
}

TEST(Aggregate, MixedDepthHandExample) {
  // Global {g1, g2, g3}; client 1 at s=1 holds {a}; client 2 at s=2 holds
  // {b1, b2}. Layer 1 -> (a + b1)/2, layer 2 -> (g2 + b2)/2.
  const double g1 = 0.3, g2 = -1.2, g3 = 0.9, a = 2.0, b1 = 0.5, b2 = 4.0;
  Server server(nn::LayeredModel({Scalar(g1, 1), Scalar(g2, 2), Scalar(g3, 3)}), 2);
  ClientState c1, c2;
  c1.id = 1;
  c1.split_point = 1;
  c1.prefix = nn::LayeredModel({Scalar(a, 1)});
  c2.id = 2;
  c2.split_point = 2;
  c2.prefix = nn::LayeredModel({Scalar(b1, 1), Scalar(b2, 2)});
  std::vector<const ClientState*> cs{&c1, &c2};
  AggregationOutcome out = server.Aggregate(cs);
  EXPECT_TRUE(out.applied);
  EXPECT_EQ(server.global().layer(0).params[0][0], (a + b1) / 2.0);
  EXPECT_EQ(server.global().layer(1).params[0][0], (g2 + b2) / 2.0);
  EXPECT_EQ(server.global().layer(2).params[0][0], g3);
}

TEST(Aggregate, SingleDeepClientCopiesPrefix) {
  sim::RngStream rng(3);
  nn::ModelSpec spec{{3}, {{nn::LayerKind::kDense, 3}, {nn::LayerKind::kDense, 3},
                           {nn::LayerKind::kDense, 2}}};
  nn::LayeredModel g = nn::BuildModel(spec, rng);
  Server server(g, 2);
  ClientState c;
  c.split_point = 2;
  c.prefix = nn::SliceModel(nn::BuildModel(spec, rng), 0, 2);
  std::vector<const ClientState*> cs{&c};
  server.Aggregate(cs);
  EXPECT_EQ(nn::SliceModel(server.global(), 0, 2), c.prefix);
}

TEST(Aggregate, IdenticalClientsAreAFixedPoint) {
  sim::RngStream rng(4);
  nn::ModelSpec spec{{3}, {{nn::LayerKind::kDense, 3}, {nn::LayerKind::kDense, 3},
                           {nn::LayerKind::kDense, 2}}};
  nn::LayeredModel g = nn::BuildModel(spec, rng);
  Server server(g, 2);
  std::vector<ClientState> clients(3);
  std::vector<const ClientState*> cs;
  for (std::size_t i = 0; i < clients.size(); ++i) {
    clients[i].split_point = i == 0 ? 1 : 2;
    clients[i].prefix = server.InitialPrefix(clients[i].split_point);
    cs.push_back(&clients[i]);
  }
  server.Aggregate(cs);
  EXPECT_LT(testing::MaxAbsDiff(server.global(), g), 1e-15);
}

TEST(Aggregate, MatchesBruteForceOnRandomRosters) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    sim::RngStream rng(seed);
    int s_max = 1 + static_cast<int>(rng.below(6));
    nn::ModelSpec spec{{3}, {}};
    for (int j = 0; j <= s_max; ++j) spec.layers.push_back({nn::LayerKind::kDense, 3});
    Server server(nn::BuildModel(spec, rng), s_max);
    std::size_t n = 1 + rng.below(8);
    std::vector<ClientState> clients(n);
    std::vector<const ClientState*> cs;
    for (std::size_t i = 0; i < n; ++i) {
      clients[i].id = static_cast<int>(i);
      clients[i].split_point = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(s_max)));
      nn::LayeredModel fresh = nn::BuildModel(spec, rng);
      clients[i].prefix = nn::SliceModel(fresh, 0, static_cast<std::size_t>(clients[i].split_point));
      cs.push_back(&clients[i]);
    }
    nn::LayeredModel expected = testing::BruteForceAverage(server, cs);
    EXPECT_EQ(AveragedPrefix(server, cs), expected) << "seed " << seed;
  }
}

TEST(ClientTurn, ZeroNoiseMatchesCentralizedTraining) {
  nn::ModelSpec spec{{1, 6, 6},
                     {{nn::LayerKind::kConv2d, 2, 3}, {nn::LayerKind::kRelu},
                      {nn::LayerKind::kMaxPool}, {nn::LayerKind::kDense, 3}}};
  for (int s = 1; s <= 3; ++s) {
    EXPECT_LT(testing::SplitVsCentralized(spec, s, 50, 10 + static_cast<std::uint64_t>(s)), 1e-9)
        << "s=" << s;
  }
}

TEST(ClientTurn, ZeroLearningRateChangesNothing) {
  sim::RngStream rng(6);
  nn::ModelSpec spec{{4}, {{nn::LayerKind::kDense, 3}, {nn::LayerKind::kRelu},
                           {nn::LayerKind::kDense, 2}}};
  nn::LayeredModel g = nn::BuildModel(spec, rng);
  Server server(g, 2);
  ClientState c;
  c.split_point = 1;
  c.prefix = server.InitialPrefix(1);
  TrainingConfig cfg;
  cfg.lr = 0.0;
  nn::Tensor x({2, 4}, {0.1, 0.2, 0.3, 0.4, -1, 0, 1, 2});
  ClientTurn(c, server, {x, {0, 1}}, cfg, rng);
  EXPECT_EQ(nn::ConcatModels(c.prefix, server.SuffixView(1)), g);
}

TEST(ClientTurn, BoundaryBytesCountDoubles) {
  sim::RngStream rng(6);
  // 2 samples x 256 values = 512 doubles = 4096 bytes.
  nn::ModelSpec spec{{256}, {{nn::LayerKind::kRelu}, {nn::LayerKind::kDense, 2}}};
  Server server(nn::BuildModel(spec, rng), 1);
  ClientState c;
  c.split_point = 1;
  c.prefix = server.InitialPrefix(1);
  nn::Tensor x({2, 256}, 0.5);
  TurnMetrics m = ClientTurn(c, server, {x, {0, 1}}, TrainingConfig{}, rng);
  EXPECT_EQ(m.boundary_bytes, 4096.0);
}

TEST(Server, RejectsBoundaryShapeMismatch) {
  sim::RngStream rng(2);
  nn::ModelSpec spec{{4}, {{nn::LayerKind::kDense, 3}, {nn::LayerKind::kDense, 2}}};
  Server server(nn::BuildModel(spec, rng), 1);
  BoundaryMessage bad{nn::Tensor({1, 5}), {0}};
  EXPECT_THROW(server.TrainStep(1, bad, TrainingConfig{}), ProtocolError);
  EXPECT_THROW(server.SuffixView(2), RangeError);
}

// Three clients on a separable 4-class image task.
struct Toy {
  std::vector<ClientState> clients;
  Server server;
  sim::Dataset test;
};

Toy MakeToy(std::uint64_t seed) {
  sim::DatasetOptions o;
  o.n_clients = 3;
  o.samples_per_client = 32;
  o.test_samples = 80;
  sim::RngStream rng(seed);
  sim::FederatedData fd = sim::MakeSyntheticDataset(o, rng);
  nn::ModelSpec spec{{1, 8, 8},
                     {{nn::LayerKind::kConv2d, 4, 3}, {nn::LayerKind::kRelu},
                      {nn::LayerKind::kMaxPool}, {nn::LayerKind::kDense, 16},
                      {nn::LayerKind::kRelu}, {nn::LayerKind::kDense, 4}}};
  sim::RngStream init = rng.derive("init");
  Server server(nn::BuildModel(spec, init), 3);
  sim::EnergyPowerProfile prof = profiler::BuildEnergyProfile({}, spec, 3);
  std::vector<ClientState> clients(3);
  for (int i = 0; i < 3; ++i) {
    ClientState& c = clients[static_cast<std::size_t>(i)];
    c.id = i;
    c.split_point = 1 + i;
    c.prefix = server.InitialPrefix(c.split_point);
    c.data = fd.clients[static_cast<std::size_t>(i)];
    c.profile = prof;
  }
  return {std::move(clients), std::move(server), fd.test};
}

TEST(RunTraining, FullScheduleEqualsNoSchedule) {
  Toy a = MakeToy(1), b = MakeToy(1);
  AttendanceSchedule all({{1, 6, {0, 1, 2}}});
  TrainingRecord ra = RunTraining(a.clients, a.server, std::nullopt, 6, a.test, {},
                                  sim::RngStream(3));
  TrainingRecord rb = RunTraining(b.clients, b.server, all, 6, b.test, {}, sim::RngStream(3));
  std::stringstream sa, sb;
  WriteTrainingRecord(sa, ra);
  WriteTrainingRecord(sb, rb);
  EXPECT_EQ(sa.str(), sb.str());
  EXPECT_EQ(a.server.global(), b.server.global());
}

TEST(RunTraining, AbsentClientLogsNoEnergy) {
  Toy t = MakeToy(2);
  AttendanceSchedule sched({{1, 5, {0, 1}}});
  TrainingRecord r = RunTraining(t.clients, t.server, sched, 5, t.test, {}, sim::RngStream(4));
  for (const sim::EnergyEvent& e : r.events) EXPECT_NE(e.client_id, 2);
  for (const EpochRecord& e : r.epochs) {
    for (const ClientEpochEnergy& c : e.clients) EXPECT_NE(c.client_id, 2);
  }
}

TEST(RunTraining, LearnsSeparableTask) {
  Toy t = MakeToy(3);
  TrainingRecord r = RunTraining(t.clients, t.server, std::nullopt, 15, t.test, {},
                                 sim::RngStream(5));
  EXPECT_EQ(r.final_accuracy(), 1.0);
  EXPECT_TRUE(r.epochs[4].aggregated);
  EXPECT_FALSE(r.epochs[3].aggregated);
}

TEST(RunTraining, RecordRoundTrips) {
  Toy t = MakeToy(4);
  TrainingRecord r = RunTraining(t.clients, t.server, std::nullopt, 2, t.test, {},
                                 sim::RngStream(6));
  std::stringstream ss;
  ss << "{\"header\":{\"tool\":\"x\"}}\n";
  WriteTrainingRecord(ss, r);
  TrainingRecord back = ReadTrainingRecord(ss);
  ASSERT_EQ(back.epochs.size(), 2u);
  EXPECT_EQ(back.epochs[1].accuracy, r.epochs[1].accuracy);
  EXPECT_EQ(back.epochs[1].clients[2].comp, r.epochs[1].clients[2].comp);
}

TEST(EvaluateGlobal, UntrainedModelNearChance) {
  double sum = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Toy t = MakeToy(100 + seed);
    std::vector<const ClientState*> none;
    sum += EvaluateGlobal(t.server, none, t.test);
  }
  EXPECT_NEAR(sum / 20.0, 0.25, 0.05) << sum / 20.0;
}

TEST(EvaluateGlobal, SingleSample) {
  Toy t = MakeToy(5);
  RunTraining(t.clients, t.server, std::nullopt, 15, t.test, {}, sim::RngStream(5));
  std::vector<const ClientState*> cs;
  for (const ClientState& c : t.clients) cs.push_back(&c);
  EXPECT_EQ(EvaluateGlobal(t.server, cs, t.test.slice(0, 1)), 1.0);
  EXPECT_THROW(EvaluateGlobal(t.server, cs, sim::Dataset{}), ArgumentError);
}

TEST(AttendanceSchedule, ParsesCommentsAndRejectsBadLines) {
  std::istringstream ok("# header\n1 5 0 1 2\n6 10 0 2  # client 1 leaves\n\n");
  AttendanceSchedule s = AttendanceSchedule::Parse(ok);
  EXPECT_TRUE(s.present(1, 5));
  EXPECT_FALSE(s.present(1, 6));
  EXPECT_TRUE(s.present(2, 10));
  EXPECT_FALSE(s.present(0, 11));
  std::istringstream bad("5 2 0\n");
  EXPECT_THROW(AttendanceSchedule::Parse(bad), ArgumentError);
  std::vector<int> roster{0, 1};
  EXPECT_THROW(s.Validate(roster), ArgumentError);
}

}  // namespace
}  // namespace splitsim::protocol
