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

#ifndef SPLITSIM_PROTOCOL_PROTOCOL_H_
#define SPLITSIM_PROTOCOL_PROTOCOL_H_

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "splitsim/nn/model.h"
#include "splitsim/protocol/noise.h"
#include "splitsim/sim/dataset.h"
#include "splitsim/sim/energy.h"
#include "splitsim/sim/rng.h"

namespace splitsim::protocol {

inline constexpr int kDefaultAggregationPeriod = 5;
inline constexpr std::size_t kBytesPerValue = sizeof(double);

struct TrainingConfig {
  double lr = 0.05;
  std::size_t batch_size = 16;
  double l2_lambda = 0.0;
  NoiseFamily noise_family = NoiseFamily::kLaplace;
  int aggregation_period = kDefaultAggregationPeriod;  // R, in epochs
};

// Client i: prefix W^{1:s_i}, its noise level and preference, private data.
struct ClientState {
  int id = 0;
  nn::LayeredModel prefix;
  int split_point = 1;
  double noise_level = 0.0;
  double alpha = 0.5;
  sim::Dataset data;
  sim::EnergyPowerProfile profile;

  // Throws ArgumentError when the state breaks its invariants.
  void Validate(int s_max, int n_class) const;
};

// The only thing a client sends the server during training. It carries the
// noise-injected representation and labels; there is deliberately no field
// for raw inputs.
struct BoundaryMessage {
  nn::Tensor representation;
  std::vector<int> labels;
};

struct ServerReply {
  nn::Tensor boundary_grad;
  double loss = 0.0;
};

struct AggregationOutcome {
  bool applied = false;
  std::size_t clients = 0;
  std::string warning;
};

// Shared server model plus one shadow copy of layers s+1..s_max per split
// point s < s_max in use. Clients at split s train against
// shadow(s) ++ W^{s_max+1:k}; the tail is shared by everyone. Aggregation
// replaces W^{1:s_max} and discards the shadows, which are rebuilt lazily
// from the new global layers.
class Server {
 public:
  Server(nn::LayeredModel global, int s_max,
         int aggregation_period = kDefaultAggregationPeriod);

  const nn::LayeredModel& global() const { return global_; }
  int s_max() const { return s_max_; }
  int depth() const { return static_cast<int>(global_.depth()); }
  int aggregation_period() const { return aggregation_period_; }
  double a_min() const { return a_min_; }
  void set_a_min(double a_min) { a_min_ = a_min; }

  // Layers s+1..k as currently trained for clients at split point s.
  nn::LayeredModel SuffixView(int split_point) const;
  // Layers s+1..s_max used to fill in a shallower client during
  // aggregation; empty when s == s_max.
  nn::LayeredModel FillLayers(int split_point) const;
  // Copy of W^{1:s} handed to a client that starts at split point s.
  nn::LayeredModel InitialPrefix(int split_point) const;
  bool has_shadow(int split_point) const { return shadows_.count(split_point) > 0; }

  // Server half of a training step: forward through the suffix, loss,
  // backward, update suffix layers, return the boundary gradient.
  ServerReply TrainStep(int split_point, const BoundaryMessage& message,
                        const TrainingConfig& config);

  // W^{1:s_max} <- mean_i (W_ci ++ fill(s_i)); layers past s_max untouched.
  AggregationOutcome Aggregate(std::span<const ClientState* const> clients);

 private:
  void CheckSplit(int split_point) const;

  nn::LayeredModel global_;
  int s_max_;
  int aggregation_period_;
  double a_min_ = 0.0;
  std::map<int, nn::LayeredModel> shadows_;
};

// Layers 1..s_max of the aggregate mean_i (W_ci ++ fill(s_i)), summed in
// the given client order and divided by N.
nn::LayeredModel AveragedPrefix(const Server& server,
                                std::span<const ClientState* const> clients);

struct Batch {
  nn::Tensor x;
  std::vector<int> labels;
};

struct TurnMetrics {
  double loss = 0.0;
  double boundary_bytes = 0.0;  // |z| * 8
  double prefix_flops = 0.0;
};

// One client training step against the server.
TurnMetrics ClientTurn(ClientState& client, Server& server, const Batch& batch,
                       const TrainingConfig& config, sim::RngStream& rng);

// Epoch-range attendance. Epochs are 1-based and inclusive.
class AttendanceSchedule {
 public:
  struct Span {
    int first_epoch = 1;
    int last_epoch = 1;
    std::vector<int> clients;
  };

  AttendanceSchedule() = default;
  explicit AttendanceSchedule(std::vector<Span> spans)
      : spans_(std::move(spans)) {}

  bool present(int client_id, int epoch) const;
  const std::vector<Span>& spans() const { return spans_; }
  // Every listed id must be in the roster.
  void Validate(std::span<const int> roster) const;

  // Lines of "epoch_start epoch_end client_ids..."; '#' starts a comment.
  static AttendanceSchedule Parse(std::istream& is);

 private:
  std::vector<Span> spans_;
};

struct ClientEpochEnergy {
  int client_id = 0;
  double comm = 0.0;
  double comp = 0.0;
  double idle = 0.0;
  double peak_watts = 0.0;
  double total() const { return comm + comp + idle; }
};

struct EpochRecord {
  int epoch = 0;
  double accuracy = 0.0;
  double mean_loss = 0.0;
  bool aggregated = false;
  std::vector<int> present;
  std::vector<ClientEpochEnergy> clients;  // present clients only
};

struct TrainingRecord {
  std::vector<EpochRecord> epochs;
  std::vector<sim::EnergyEvent> events;
  std::vector<std::string> warnings;

  double final_accuracy() const {
    return epochs.empty() ? 0.0 : epochs.back().accuracy;
  }
};

// One JSON object per epoch:
// {"epoch","A_t","loss","aggregated","present",
//  "clients":{"<id>":{"comm_J","comp_J","idle_J","peak_W"}}}
void WriteTrainingRecord(std::ostream& os, const TrainingRecord& record);
// Lines without an "epoch" key (headers) are skipped.
TrainingRecord ReadTrainingRecord(std::istream& is);

// Global accuracy G_acc: the fill-and-average prefix of `clients`
// followed by the server's layers past s_max, evaluated on test.
double EvaluateGlobal(const Server& server,
                      std::span<const ClientState* const> clients,
                      const sim::Dataset& test);

// Sequential split learning: each epoch, present clients take turns in
// ascending id over their whole dataset; aggregation every R epochs over
// the clients present that epoch; A_t measured after every epoch.
TrainingRecord RunTraining(std::vector<ClientState>& clients, Server& server,
                           const std::optional<AttendanceSchedule>& schedule,
                           int epochs, const sim::Dataset& test,
                           const TrainingConfig& config, sim::RngStream rng);

}  // namespace splitsim::protocol

#endif  // SPLITSIM_PROTOCOL_PROTOCOL_H_
