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

#include "splitsim/profiler/privacy_table.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>

#include "splitsim/attack/fsim.h"
#include "splitsim/errors.h"
#include "splitsim/sim/format.h"

namespace splitsim::profiler {

std::vector<double> NoiseGrid(double sigma_hi, double step, double sigma_lo) {
  if (!(step > 0.0) || !(sigma_hi >= sigma_lo) || sigma_lo < 0.0) {
    throw ArgumentError("noise grid needs step > 0 and 0 <= lo <= hi");
  }
  auto count = static_cast<std::size_t>(std::floor((sigma_hi - sigma_lo) / step + 1e-9)) + 1;
  std::vector<double> grid;
  grid.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    double v = sigma_lo + static_cast<double>(i) * step;
    grid.push_back(std::round(v * 1e6) / 1e6);
  }
  return grid;
}

PrivacyLeakageTable::PrivacyLeakageTable(int s_max, std::vector<double> sigmas)
    : s_max_(s_max), sigmas_(std::move(sigmas)) {
  if (s_max_ < 1) throw ArgumentError("privacy table needs s_max >= 1");
  if (sigmas_.empty()) throw ArgumentError("privacy table needs a noise grid");
  for (std::size_t i = 1; i < sigmas_.size(); ++i) {
    if (!(sigmas_[i] > sigmas_[i - 1])) {
      throw ArgumentError("noise grid must be strictly ascending");
    }
  }
  std::size_t n = static_cast<std::size_t>(s_max_) * sigmas_.size();
  values_.assign(n, 0.0);
  converged_.assign(n, 1);
  filled_.assign(n, 0);
}

std::size_t PrivacyLeakageTable::Offset(int split_point,
                                        std::size_t sigma_index) const {
  if (split_point < 1 || split_point > s_max_ || sigma_index >= sigmas_.size()) {
    throw RangeError("privacy table cell (" + std::to_string(split_point) + ", " +
                     std::to_string(sigma_index) + ") out of range");
  }
  return static_cast<std::size_t>(split_point - 1) * sigmas_.size() + sigma_index;
}

double PrivacyLeakageTable::at(int split_point, std::size_t sigma_index) const {
  return values_[Offset(split_point, sigma_index)];
}

void PrivacyLeakageTable::set(int split_point, std::size_t sigma_index,
                              double fsim, bool converged) {
  std::size_t i = Offset(split_point, sigma_index);
  values_[i] = fsim;
  converged_[i] = converged ? 1 : 0;
  filled_[i] = 1;
}

bool PrivacyLeakageTable::converged(int split_point,
                                    std::size_t sigma_index) const {
  return converged_[Offset(split_point, sigma_index)] != 0;
}

double PrivacyLeakageTable::Lookup(int split_point, double sigma) const {
  if (sigma <= sigmas_.front()) return at(split_point, 0);
  if (sigma >= sigmas_.back()) return at(split_point, sigmas_.size() - 1);
  auto hi = static_cast<std::size_t>(
      std::upper_bound(sigmas_.begin(), sigmas_.end(), sigma) - sigmas_.begin());
  std::size_t lo = hi - 1;
  double t = (sigma - sigmas_[lo]) / (sigmas_[hi] - sigmas_[lo]);
  return (1.0 - t) * at(split_point, lo) + t * at(split_point, hi);
}

void PrivacyLeakageTable::Validate() const {
  if (s_max_ < 1 || sigmas_.empty()) throw ArgumentError("privacy table is empty");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!filled_[i]) throw ArgumentError("privacy table has a missing cell");
    if (!(values_[i] >= 0.0 && values_[i] <= 1.0)) {
      throw ArgumentError("privacy table value outside [0,1]");
    }
  }
}

void WritePrivacyTable(std::ostream& os, const PrivacyLeakageTable& table) {
  os << 's';
  for (double s : table.sigmas()) os << '\t' << sim::FormatDouble(s);
  os << '\n';
  for (int s = 1; s <= table.s_max(); ++s) {
    os << s;
    for (std::size_t j = 0; j < table.sigmas().size(); ++j) {
      os << '\t' << sim::FormatDouble(table.at(s, j));
      if (!table.converged(s, j)) os << '*';
    }
    os << '\n';
  }
}

PrivacyLeakageTable ReadPrivacyTable(std::istream& is) {
  std::string line;
  std::vector<double> sigmas;
  std::vector<std::vector<std::string>> rows;
  bool have_header = false;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string tok;
    std::vector<std::string> toks;
    while (std::getline(ls, tok, '\t')) toks.push_back(tok);
    if (!have_header) {
      if (toks.empty() || toks[0] != "s") {
        throw ArgumentError("privacy table: expected header starting with 's'");
      }
      for (std::size_t i = 1; i < toks.size(); ++i) sigmas.push_back(sim::ParseDouble(toks[i]));
      have_header = true;
      continue;
    }
    if (toks.size() != sigmas.size() + 1) {
      throw ArgumentError("privacy table: row '" + toks[0] + "' has " +
                          std::to_string(toks.size() - 1) + " cells, expected " +
                          std::to_string(sigmas.size()));
    }
    rows.push_back(std::move(toks));
  }
  if (!have_header || rows.empty()) throw ArgumentError("privacy table is empty");
  PrivacyLeakageTable table(static_cast<int>(rows.size()), sigmas);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    int s = static_cast<int>(sim::ParseDouble(rows[r][0]));
    if (s != static_cast<int>(r) + 1) {
      throw ArgumentError("privacy table: split points must be 1..s_max in order");
    }
    for (std::size_t j = 0; j < sigmas.size(); ++j) {
      std::string cell = rows[r][j + 1];
      bool ok = true;
      if (!cell.empty() && cell.back() == '*') {
        ok = false;
        cell.pop_back();
      }
      table.set(s, j, sim::ParseDouble(cell), ok);
    }
  }
  table.Validate();
  return table;
}

PrivacyTableBuild BuildPrivacyLeakageTable(const nn::LayeredModel& victim,
                                           const sim::Dataset& public_data,
                                           int s_max,
                                           std::span<const double> sigmas,
                                           const AttackBudget& budget,
                                           sim::RngStream rng,
                                           unsigned threads) {
  if (s_max < 1 || static_cast<std::size_t>(s_max) > victim.depth()) {
    throw ArgumentError("s_max " + std::to_string(s_max) + " outside 1.." +
                        std::to_string(victim.depth()));
  }
  if (budget.samples == 0 || public_data.size() < budget.samples) {
    throw ArgumentError("public dataset has " + std::to_string(public_data.size()) +
                        " samples, attack budget needs " +
                        std::to_string(budget.samples));
  }
  std::size_t m = budget.samples;
  std::size_t n_sigma = sigmas.size();
  PrivacyTableBuild out;
  out.table = PrivacyLeakageTable(s_max, std::vector<double>(sigmas.begin(), sigmas.end()));
  out.stats.assign(static_cast<std::size_t>(s_max), std::vector<CellStats>(n_sigma));

  // One task per (s, sample): every sigma shares the noise base and the
  // attack's starting state.
  struct Result {
    double fsim = 0.0;
    bool converged = true;
    nn::Tensor x_hat;
  };
  std::size_t tasks = static_cast<std::size_t>(s_max) * m;
  std::vector<std::vector<Result>> results(tasks, std::vector<Result>(n_sigma));
  auto run = [&](std::size_t task) {
    int s = static_cast<int>(task / m) + 1;
    std::size_t j = task % m;
    nn::LayeredModel prefix = nn::SliceModel(victim, 0, static_cast<std::size_t>(s));
    std::vector<std::size_t> row{j};
    nn::Tensor x = public_data.batch(row);
    nn::Tensor z0 = nn::Forward(prefix, x, nn::Mode::kEval, false).output;
    sim::RngStream xi_rng = rng.path("xi", static_cast<std::uint64_t>(s), j);
    std::vector<double> xi(z0.size());
    for (double& v : xi) v = protocol::DrawNoise(1.0, budget.noise_family, xi_rng);
    nn::Tensor original(public_data.sample_shape, public_data.inputs[j]);
    for (std::size_t k = 0; k < n_sigma; ++k) {
      nn::Tensor z = z0;
      for (std::size_t i = 0; i < z.size(); ++i) z[i] += sigmas[k] * xi[i];
      attack::ReconstructionResult r = attack::UnsplitReconstruct(
          z, prefix, budget.options,
          rng.path("attack", static_cast<std::uint64_t>(s), j));
      nn::Tensor x_hat(public_data.sample_shape,
                       std::vector<double>(r.x_hat.values().begin(), r.x_hat.values().end()));
      Result& res = results[task][k];
      res.fsim = attack::Fsim(original, x_hat);
      res.converged = r.converged;
      res.x_hat = std::move(x_hat);
    }
  };
  unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(tasks)));
  if (workers == 1) {
    for (std::size_t t = 0; t < tasks; ++t) run(t);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t t = next++; t < tasks; t = next++) run(t);
      });
    }
    for (std::thread& t : pool) t.join();
  }

  for (int s = 1; s <= s_max; ++s) {
    for (std::size_t k = 0; k < n_sigma; ++k) {
      CellStats& c = out.stats[static_cast<std::size_t>(s - 1)][k];
      c.n = m;
      double sum = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        const Result& res = results[static_cast<std::size_t>(s - 1) * m + j][k];
        sum += res.fsim;
        c.converged = c.converged && res.converged;
      }
      c.mean = sum / static_cast<double>(m);
      double var = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        double d = results[static_cast<std::size_t>(s - 1) * m + j][k].fsim - c.mean;
        var += d * d;
      }
      c.stddev = std::sqrt(var / static_cast<double>(m));
      out.table.set(s, k, c.mean, c.converged);
      for (std::size_t j = 0; j < m; ++j) {
        Result& res = results[static_cast<std::size_t>(s - 1) * m + j][k];
        out.reconstructions.push_back(
            {std::move(res.x_hat), public_data.labels[j], res.fsim});
      }
    }
  }
  return out;
}

}  // namespace splitsim::profiler
