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

#include "oracles.h"
#include "splitsim/bilevel/optimizer.h"
#include "splitsim/errors.h"

namespace splitsim::bilevel {
namespace {

using profiler::PrivacyLeakageTable;

PrivacyLeakageTable Table(const std::vector<std::vector<double>>& rows,
                          std::vector<double> sigmas) {
  PrivacyLeakageTable t(static_cast<int>(rows.size()), std::move(sigmas));
  for (std::size_t s = 0; s < rows.size(); ++s) {
    for (std::size_t j = 0; j < rows[s].size(); ++j) t.set(static_cast<int>(s + 1), j, rows[s][j]);
  }
  return t;
}

sim::EnergyPowerProfile Profile(const std::vector<double>& energy,
                                const std::vector<double>& peak, double p_max) {
  sim::EnergyPowerProfile p;
  p.p_max = p_max;
  for (std::size_t i = 0; i < energy.size(); ++i) {
    sim::SplitEnergy r;
    r.split_point = static_cast<int>(i + 1);
    r.e_comp = energy[i];
    r.p_peak = peak[i];
    p.rows.push_back(r);
  }
  return p;
}

NoiseAssignmentTable Nat(std::vector<double> sigma) {
  NoiseAssignmentTable n;
  n.saturated.assign(sigma.size(), 0);
  n.sigma = std::move(sigma);
  return n;
}

TEST(InitNoiseTable, PicksFirstSigmaAtOrBelowThreshold) {
  auto plt = Table({{0.9, 0.7, 0.5, 0.4}, {0.6, 0.5, 0.45, 0.4}, {0.5, 0.4, 0.3, 0.2}},
                   {0.0, 0.5, 1.0, 1.5});
  NoiseAssignmentTable nat = InitNoiseTable(plt, 0.5);
  EXPECT_EQ(nat.sigma, (std::vector<double>{1.0, 0.5, 0.0}));
  EXPECT_EQ(nat.saturated, (std::vector<char>{0, 0, 0}));
}

TEST(InitNoiseTable, SaturatedRowTakesLargestSigma) {
  auto plt = Table({{0.9, 0.8}, {0.3, 0.2}}, {0.0, 2.5});
  NoiseAssignmentTable nat = InitNoiseTable(plt, 0.5);
  EXPECT_EQ(nat.sigma, (std::vector<double>{2.5, 0.0}));
  EXPECT_EQ(nat.saturated, (std::vector<char>{1, 0}));
}

TEST(InitNoiseTable, DeeperSplitsNeedLessNoise) {
  // FSIM falls with both depth and noise, so the assigned noise is
  // non-increasing in the split point.
  std::vector<double> sigmas;
  for (int j = 0; j <= 50; ++j) sigmas.push_back(0.05 * j);
  std::vector<std::vector<double>> rows;
  for (int s = 1; s <= 6; ++s) {
    std::vector<double> row;
    for (double sg : sigmas) row.push_back(0.95 / (1.0 + 0.15 * s + 0.4 * sg));
    rows.push_back(row);
  }
  NoiseAssignmentTable nat = InitNoiseTable(Table(rows, sigmas), 0.6);
  for (int s = 2; s <= 6; ++s) EXPECT_LE(nat.at(s), nat.at(s - 1));
  EXPECT_GT(nat.at(1), 0.0);
}

TEST(InitNoiseTable, RejectsThresholdOutsideUnitInterval) {
  auto plt = Table({{0.5}}, {0.0});
  EXPECT_THROW(InitNoiseTable(plt, 0.0), ArgumentError);
  EXPECT_THROW(InitNoiseTable(plt, 1.0), ArgumentError);
}

TEST(NoiseTableIo, RoundTrips) {
  NoiseAssignmentTable nat = Nat({1.25, 0.5, 0.0});
  nat.saturated[0] = 1;
  nat.round = 3;
  std::stringstream ss;
  WriteNoiseTable(ss, nat);
  EXPECT_EQ(ReadNoiseTable(ss), nat);
}

TEST(NoiseTableIo, RejectsOutOfOrderRows) {
  std::istringstream is("round\t0\ns\tsigma\n2\t0.5\n");
  EXPECT_THROW(ReadNoiseTable(is), ArgumentError);
}

TEST(FeasibleSplitRange, IncreasingEnergySpansFromOne) {
  auto p = Profile({1, 2, 3, 4}, {1, 1, 1, 1}, 2.0);
  SplitRange r = FeasibleSplitRange(p);
  EXPECT_EQ(r.lo, 1);
  EXPECT_EQ(r.hi, 4);
}

TEST(FeasibleSplitRange, EnergyDipMovesLowerBound) {
  auto p = Profile({5, 4, 4.5, 3, 2, 2.5}, {1, 1, 1, 1, 1, 1}, 2.0);
  EXPECT_EQ(FeasibleSplitRange(p).lo, 5);
}

TEST(FeasibleSplitRange, PowerCapBoundsDepth) {
  auto p = Profile({1, 2, 3, 4}, {1.0, 1.5, 2.5, 3.0}, 2.0);
  EXPECT_EQ(FeasibleSplitRange(p).hi, 2);
}

TEST(FeasibleSplitRange, NoFeasiblePointThrows) {
  auto p = Profile({1, 2}, {3.0, 4.0}, 2.0);
  try {
    FeasibleSplitRange(p, 7);
    FAIL();
  } catch (const InfeasibleClientError& e) {
    EXPECT_NE(std::string(e.what()).find("client 7"), std::string::npos);
  }
}

TEST(SelectSplitPoint, HandFixture) {
  // f(1) = 0.5*0.6 + 0.5*0.2 = 0.40, f(2) = 0.45, f(3) = 0.675.
  auto plt = Table({{0.6}, {0.4}, {0.35}}, {0.0});
  auto p = Profile({0.2, 0.5, 1.0}, {1, 1, 1}, 2.0);
  SplitDecision d = SelectSplitPoint(p, 0.5, Nat({0, 0, 0}), plt);
  EXPECT_EQ(d.split_point, 1);
  EXPECT_NEAR(d.objective, 0.40, 1e-12);
  EXPECT_NEAR(d.energy_norm, 0.2, 1e-12);
}

TEST(SelectSplitPoint, ExtremeAlphaCollapsesToOneTerm) {
  auto plt = Table({{0.6}, {0.4}, {0.35}}, {0.0});
  auto p = Profile({0.2, 0.5, 1.0}, {1, 1, 1}, 2.0);
  EXPECT_EQ(SelectSplitPoint(p, 0.0, Nat({0, 0, 0}), plt).split_point, 1);
  EXPECT_EQ(SelectSplitPoint(p, 1.0, Nat({0, 0, 0}), plt).split_point, 3);
}

TEST(SelectSplitPoint, SkipsPointsOverPowerCapInsideRange) {
  auto plt = Table({{0.6}, {0.1}, {0.35}}, {0.0});
  auto p = Profile({0.2, 0.5, 1.0}, {1, 5, 1}, 2.0);
  SplitDecision d = SelectSplitPoint(p, 1.0, Nat({0, 0, 0}), plt);
  EXPECT_EQ(d.split_point, 3);
  EXPECT_LE(d.p_peak, d.p_max);
}

TEST(SelectSplitPoint, UsesAssignedNoise) {
  auto plt = Table({{0.9, 0.3}, {0.5, 0.45}}, {0.0, 1.0});
  auto p = Profile({1, 1}, {1, 1}, 2.0);
  EXPECT_EQ(SelectSplitPoint(p, 1.0, Nat({0, 0}), plt).split_point, 2);
  SplitDecision d = SelectSplitPoint(p, 1.0, Nat({1.0, 0}), plt);
  EXPECT_EQ(d.split_point, 1);
  EXPECT_DOUBLE_EQ(d.fsim, 0.3);
}

TEST(SelectSplitPoint, RejectsBadAlphaAndShortTables) {
  auto plt = Table({{0.6}}, {0.0});
  auto p = Profile({1, 2}, {1, 1}, 2.0);
  EXPECT_THROW(SelectSplitPoint(p, 1.5, Nat({0}), plt), ArgumentError);
  EXPECT_THROW(SelectSplitPoint(p, 0.5, Nat({0}), plt), ArgumentError);
}

TEST(SelectSplitPoint, MatchesEnumerationOnRandomFixtures) {
  sim::RngStream rng(99);
  int checked = 0;
  for (int i = 0; i < 500; ++i) {
    testing::SplitFixture f = testing::RandomSplitFixture(rng);
    int want = testing::EnumerateSplit(f.profile, f.alpha, f.nat, f.plt);
    if (want == 0) {
      EXPECT_THROW(SelectSplitPoint(f.profile, f.alpha, f.nat, f.plt), InfeasibleClientError);
      continue;
    }
    EXPECT_EQ(SelectSplitPoint(f.profile, f.alpha, f.nat, f.plt).split_point, want) << i;
    ++checked;
  }
  EXPECT_GT(checked, 400);
}

TEST(ReassignNoise, ScalesByShortfall) {
  NoiseAssignmentTable out = ReassignNoise(Nat({1.0, 2.0}), 0.80, 0.85);
  EXPECT_NEAR(out.sigma[0], 0.9, 1e-12);
  EXPECT_NEAR(out.sigma[1], 1.8, 1e-12);
}

TEST(ReassignNoise, MultiplierClampsAtFloor) {
  NoiseAssignmentTable out = ReassignNoise(Nat({1.0}), 0.3, 0.8);
  EXPECT_NEAR(out.sigma[0], kMultiplierFloor, 1e-12);
}

TEST(ReassignNoise, HonoursSigmaFloor) {
  NoiseAssignmentTable out = ReassignNoise(Nat({1.0, 0.05}), 0.3, 0.8, 0.2);
  EXPECT_DOUBLE_EQ(out.sigma[0], 0.2);
  EXPECT_DOUBLE_EQ(out.sigma[1], 0.2);
}

TEST(ReassignNoise, RequiresShortfall) {
  EXPECT_THROW(ReassignNoise(Nat({1.0}), 0.9, 0.85), ContractError);
  EXPECT_THROW(ReassignNoise(Nat({1.0}), 0.85, 0.85), ContractError);
}

TEST(ReassignNoise, RepeatedApplicationNeverRaisesNoise) {
  NoiseAssignmentTable nat = Nat({2.5, 1.0, 0.4});
  for (int t = 0; t < 20; ++t) {
    NoiseAssignmentTable next = ReassignNoise(nat, 0.7, 0.9);
    for (int s = 1; s <= 3; ++s) EXPECT_LE(next.at(s), nat.at(s));
    nat = next;
  }
}

class OptimizeTest : public ::testing::Test {
 protected:
  void SetUp() override {
    plt_ = Table({{0.9, 0.6, 0.4}, {0.8, 0.5, 0.3}, {0.7, 0.4, 0.25}}, {0.0, 1.0, 2.0});
    for (int i = 0; i < 3; ++i) {
      ClientProfile c;
      c.id = i;
      c.alpha = 0.3 * i + 0.2;
      c.profile = Profile({0.1, 0.3, 0.6}, {1, 1, 1}, 2.0);
      clients_.push_back(c);
    }
  }
  PrivacyLeakageTable plt_;
  std::vector<ClientProfile> clients_;
};

TEST_F(OptimizeTest, StopsAfterFirstRoundWhenTargetMet) {
  OptimizerConfig cfg;
  cfg.a_ref = 0.0;
  cfg.t_fsim = 0.5;
  OptimizeResult r = Optimize(clients_, plt_, cfg, [](auto&, int) { return 0.5; });
  EXPECT_EQ(r.rounds, 1);
  EXPECT_TRUE(r.converged);
}

TEST_F(OptimizeTest, NoiseNeverRisesAcrossRounds) {
  OptimizerConfig cfg;
  cfg.a_ref = 1.0;
  cfg.beta = 0.9;
  cfg.t_fsim = 0.5;
  cfg.max_rounds = 6;
  OptimizeResult r = Optimize(clients_, plt_, cfg,
                              [](auto&, int t) { return 0.5 + 0.05 * t; });
  EXPECT_EQ(r.rounds, 6);
  EXPECT_FALSE(r.converged);
  for (std::size_t t = 1; t < r.trace.size(); ++t) {
    for (int s = 1; s <= 3; ++s) EXPECT_LE(r.trace[t].nat.at(s), r.trace[t - 1].nat.at(s));
  }
  EXPECT_EQ(r.best_round, 5);
}

TEST_F(OptimizeTest, ConvergesOnceProbeReachesTarget) {
  OptimizerConfig cfg;
  cfg.a_ref = 1.0;
  cfg.beta = 0.9;
  cfg.t_fsim = 0.5;
  cfg.max_rounds = 10;
  OptimizeResult r = Optimize(clients_, plt_, cfg,
                              [](auto&, int t) { return t < 2 ? 0.6 : 0.95; });
  EXPECT_EQ(r.rounds, 3);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.best_round, 2);
  EXPECT_EQ(r.decisions.size(), 3u);
  EXPECT_DOUBLE_EQ(r.a_min, 0.9);
}

TEST_F(OptimizeTest, EmptyRosterIsRejected) {
  EXPECT_THROW(Optimize({}, plt_, OptimizerConfig{}, [](auto&, int) { return 1.0; }),
               ArgumentError);
}

}  // namespace
}  // namespace splitsim::bilevel
