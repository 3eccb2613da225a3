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

#include "splitsim/protocol/protocol.h"

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "splitsim/errors.h"

namespace splitsim::protocol {

void ClientState::Validate(int s_max, int n_class) const {
  if (split_point < 1 || split_point > s_max) {
    throw ArgumentError("client " + std::to_string(id) + ": split point " +
                        std::to_string(split_point) + " outside 1.." +
                        std::to_string(s_max));
  }
  if (!(noise_level >= 0.0)) {
    throw ArgumentError("client " + std::to_string(id) + ": negative noise");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw ArgumentError("client " + std::to_string(id) + ": alpha outside [0,1]");
  }
  if (data.empty()) {
    throw ArgumentError("client " + std::to_string(id) + ": empty dataset");
  }
  for (int y : data.labels) {
    if (y < 0 || y >= n_class) {
      throw ArgumentError("client " + std::to_string(id) + ": label " +
                          std::to_string(y) + " out of range");
    }
  }
}

Server::Server(nn::LayeredModel global, int s_max, int aggregation_period)
    : global_(std::move(global)),
      s_max_(s_max),
      aggregation_period_(aggregation_period) {
  if (s_max_ < 1 || s_max_ + 1 > depth()) {
    throw ArgumentError("s_max " + std::to_string(s_max_) +
                        " must leave at least one server layer (k = " +
                        std::to_string(depth()) + ")");
  }
  if (aggregation_period_ < 1) {
    throw ArgumentError("aggregation period must be positive");
  }
}

void Server::CheckSplit(int split_point) const {
  if (split_point < 1 || split_point > s_max_) {
    throw RangeError("split point " + std::to_string(split_point) +
                     " outside 1.." + std::to_string(s_max_));
  }
}

nn::LayeredModel Server::FillLayers(int split_point) const {
  CheckSplit(split_point);
  auto it = shadows_.find(split_point);
  if (it != shadows_.end()) return it->second;
  return nn::SliceModel(global_, static_cast<std::size_t>(split_point),
                        static_cast<std::size_t>(s_max_));
}

nn::LayeredModel Server::SuffixView(int split_point) const {
  return nn::ConcatModels(
      FillLayers(split_point),
      nn::SliceModel(global_, static_cast<std::size_t>(s_max_),
                     global_.depth()));
}

nn::LayeredModel Server::InitialPrefix(int split_point) const {
  CheckSplit(split_point);
  return nn::SliceModel(global_, 0, static_cast<std::size_t>(split_point));
}

ServerReply Server::TrainStep(int split_point, const BoundaryMessage& message,
                              const TrainingConfig& config) {
  CheckSplit(split_point);
  nn::LayeredModel suffix = SuffixView(split_point);
  if (message.representation.sample_shape() != suffix.input_shape()) {
    throw ProtocolError("representation " +
                        nn::ShapeString(message.representation.shape()) +
                        " does not fit the server suffix at split point " +
                        std::to_string(split_point) + " (expects " +
                        nn::ShapeString(suffix.input_shape()) + ")");
  }
  nn::ForwardResult fwd =
      nn::Forward(suffix, message.representation, nn::Mode::kTrain, true);
  nn::LossResult loss = nn::SoftmaxCrossEntropy(fwd.output, message.labels);
  nn::GradientPacket packet = nn::Backward(suffix, fwd.tape, loss.grad);
  packet.loss_value = loss.loss;
  nn::SgdStep(suffix, packet, config.lr, config.l2_lambda);
  nn::ApplyBatchStatistics(suffix, *fwd.tape);

  std::size_t shadow_depth = static_cast<std::size_t>(s_max_ - split_point);
  if (shadow_depth > 0) {
    shadows_[split_point] = nn::SliceModel(suffix, 0, shadow_depth);
  }
  auto& layers = global_.mutable_layers();
  for (std::size_t j = shadow_depth; j < suffix.depth(); ++j) {
    layers[static_cast<std::size_t>(s_max_) + j - shadow_depth] = suffix.layer(j);
  }
  return {std::move(packet.boundary_grad), loss.loss};
}

nn::LayeredModel AveragedPrefix(const Server& server,
                                std::span<const ClientState* const> clients) {
  std::size_t s_max = static_cast<std::size_t>(server.s_max());
  if (clients.empty()) return nn::SliceModel(server.global(), 0, s_max);
  std::vector<nn::LayeredModel> fills;
  fills.reserve(clients.size());
  for (const ClientState* c : clients) {
    if (static_cast<int>(c->prefix.depth()) != c->split_point) {
      throw ProtocolError("client " + std::to_string(c->id) +
                          " prefix depth does not match its split point");
    }
    fills.push_back(server.FillLayers(c->split_point));
  }
  std::vector<nn::Layer> out;
  out.reserve(s_max);
  double n = static_cast<double>(clients.size());
  for (std::size_t j = 0; j < s_max; ++j) {
    nn::Layer layer = server.global().layer(j);
    for (nn::Tensor& p : layer.params) {
      for (double& v : p.values()) v = 0.0;
    }
    for (std::size_t i = 0; i < clients.size(); ++i) {
      std::size_t s = static_cast<std::size_t>(clients[i]->split_point);
      const nn::Layer& src =
          j < s ? clients[i]->prefix.layer(j) : fills[i].layer(j - s);
      for (std::size_t p = 0; p < layer.params.size(); ++p) {
        auto dst = layer.params[p].values();
        auto from = src.params[p].values();
        for (std::size_t e = 0; e < dst.size(); ++e) dst[e] += from[e];
      }
    }
    for (nn::Tensor& p : layer.params) {
      for (double& v : p.values()) v /= n;
    }
    out.push_back(std::move(layer));
  }
  return nn::LayeredModel(std::move(out));
}

AggregationOutcome Server::Aggregate(
    std::span<const ClientState* const> clients) {
  AggregationOutcome outcome;
  if (clients.empty()) {
    outcome.warning = "aggregation skipped: no clients";
    return outcome;
  }
  for (const ClientState* c : clients) CheckSplit(c->split_point);
  nn::LayeredModel avg = AveragedPrefix(*this, clients);
  auto& layers = global_.mutable_layers();
  for (std::size_t j = 0; j < avg.depth(); ++j) layers[j] = avg.layer(j);
  shadows_.clear();
  outcome.applied = true;
  outcome.clients = clients.size();
  return outcome;
}

TurnMetrics ClientTurn(ClientState& client, Server& server, const Batch& batch,
                       const TrainingConfig& config, sim::RngStream& rng) {
  if (static_cast<int>(client.prefix.depth()) != client.split_point) {
    throw ProtocolError("client " + std::to_string(client.id) +
                        " prefix depth does not match its split point");
  }
  nn::ForwardResult fwd =
      nn::Forward(client.prefix, batch.x, nn::Mode::kTrain, true);
  TurnMetrics metrics;
  metrics.boundary_bytes =
      static_cast<double>(fwd.output.size() * kBytesPerValue);
  for (const nn::Layer& l : client.prefix.layers()) {
    metrics.prefix_flops += l.flops_per_sample();
  }
  metrics.prefix_flops *= static_cast<double>(batch.labels.size());

  BoundaryMessage message{
      InjectNoise(fwd.output, client.noise_level, rng, config.noise_family),
      batch.labels};
  ServerReply reply = server.TrainStep(client.split_point, message, config);
  nn::GradientPacket packet =
      nn::Backward(client.prefix, fwd.tape, reply.boundary_grad);
  packet.loss_value = reply.loss;
  nn::SgdStep(client.prefix, packet, config.lr, config.l2_lambda);
  nn::ApplyBatchStatistics(client.prefix, *fwd.tape);
  metrics.loss = reply.loss;
  return metrics;
}

bool AttendanceSchedule::present(int client_id, int epoch) const {
  for (const Span& s : spans_) {
    if (epoch < s.first_epoch || epoch > s.last_epoch) continue;
    if (std::find(s.clients.begin(), s.clients.end(), client_id) !=
        s.clients.end()) {
      return true;
    }
  }
  return false;
}

void AttendanceSchedule::Validate(std::span<const int> roster) const {
  for (const Span& s : spans_) {
    for (int id : s.clients) {
      if (std::find(roster.begin(), roster.end(), id) == roster.end()) {
        throw ArgumentError("schedule lists unknown client " +
                            std::to_string(id));
      }
    }
  }
}

AttendanceSchedule AttendanceSchedule::Parse(std::istream& is) {
  std::vector<Span> spans;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) {
      line.resize(hash);
    }
    std::istringstream ls(line);
    Span s;
    if (!(ls >> s.first_epoch)) continue;
    if (!(ls >> s.last_epoch) || s.last_epoch < s.first_epoch ||
        s.first_epoch < 1) {
      throw ArgumentError("schedule line " + std::to_string(line_no) +
                          ": expected 'epoch_start epoch_end ids...'");
    }
    int id = 0;
    while (ls >> id) s.clients.push_back(id);
    if (!ls.eof()) {
      throw ArgumentError("schedule line " + std::to_string(line_no) +
                          ": bad client id");
    }
    spans.push_back(std::move(s));
  }
  return AttendanceSchedule(std::move(spans));
}

void WriteTrainingRecord(std::ostream& os, const TrainingRecord& record) {
  for (const EpochRecord& e : record.epochs) {
    nlohmann::ordered_json j;
    j["epoch"] = e.epoch;
    j["A_t"] = e.accuracy;
    j["loss"] = e.mean_loss;
    j["aggregated"] = e.aggregated;
    j["present"] = e.present;
    nlohmann::ordered_json clients = nlohmann::ordered_json::object();
    for (const ClientEpochEnergy& c : e.clients) {
      clients[std::to_string(c.client_id)] = {{"comm_J", c.comm},
                                              {"comp_J", c.comp},
                                              {"idle_J", c.idle},
                                              {"peak_W", c.peak_watts}};
    }
    j["clients"] = std::move(clients);
    os << j.dump() << '\n';
  }
}

TrainingRecord ReadTrainingRecord(std::istream& is) {
  TrainingRecord record;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    if (!j.contains("epoch")) continue;
    EpochRecord e;
    e.epoch = j.at("epoch").get<int>();
    e.accuracy = j.at("A_t").get<double>();
    e.mean_loss = j.value("loss", 0.0);
    e.aggregated = j.at("aggregated").get<bool>();
    e.present = j.value("present", std::vector<int>{});
    for (auto& [id, v] : j.at("clients").items()) {
      ClientEpochEnergy c;
      c.client_id = std::stoi(id);
      c.comm = v.at("comm_J").get<double>();
      c.comp = v.at("comp_J").get<double>();
      c.idle = v.at("idle_J").get<double>();
      c.peak_watts = v.at("peak_W").get<double>();
      e.clients.push_back(c);
    }
    std::sort(e.clients.begin(), e.clients.end(),
              [](const auto& a, const auto& b) { return a.client_id < b.client_id; });
    record.epochs.push_back(std::move(e));
  }
  return record;
}

double EvaluateGlobal(const Server& server,
                      std::span<const ClientState* const> clients,
                      const sim::Dataset& test) {
  if (test.empty()) throw ArgumentError("evaluation needs a non-empty test set");
  nn::LayeredModel composite = nn::ConcatModels(
      AveragedPrefix(server, clients),
      nn::SliceModel(server.global(), static_cast<std::size_t>(server.s_max()),
                     server.global().depth()));
  nn::Tensor logits =
      nn::Forward(composite, test.all_inputs(), nn::Mode::kEval, false).output;
  std::vector<int> pred = nn::Argmax(logits);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] == test.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

TrainingRecord RunTraining(std::vector<ClientState>& clients, Server& server,
                           const std::optional<AttendanceSchedule>& schedule,
                           int epochs, const sim::Dataset& test,
                           const TrainingConfig& config, sim::RngStream rng) {
  if (epochs < 1) throw ArgumentError("epochs must be at least 1");
  if (config.batch_size == 0) throw ArgumentError("batch size must be positive");
  std::vector<std::size_t> order(clients.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return clients[a].id < clients[b].id;
  });
  if (schedule) {
    std::vector<int> roster;
    for (const ClientState& c : clients) roster.push_back(c.id);
    schedule->Validate(roster);
  }

  TrainingRecord record;
  std::set<int> participated;
  for (int epoch = 1; epoch <= epochs; ++epoch) {
    EpochRecord er;
    er.epoch = epoch;
    std::size_t epoch_begin = record.events.size();
    double loss_sum = 0.0;
    std::size_t loss_count = 0;
    std::vector<const ClientState*> present;
    for (std::size_t idx : order) {
      ClientState& c = clients[idx];
      if (schedule && !schedule->present(c.id, epoch)) continue;
      present.push_back(&c);
      participated.insert(c.id);
      er.present.push_back(c.id);

      std::vector<std::size_t> rows(c.data.size());
      std::iota(rows.begin(), rows.end(), std::size_t{0});
      sim::RngStream order_rng = rng.path("order", static_cast<std::uint64_t>(c.id),
                                          static_cast<std::uint64_t>(epoch));
      sim::Shuffle(rows, order_rng);
      std::size_t batches = 0;
      double bytes = 0.0;
      for (std::size_t start = 0; start < rows.size();
           start += config.batch_size) {
        std::size_t end = std::min(rows.size(), start + config.batch_size);
        std::span<const std::size_t> sel(rows.data() + start, end - start);
        Batch batch{c.data.batch(sel), c.data.batch_labels(sel)};
        sim::RngStream noise_rng =
            rng.path("noise", static_cast<std::uint64_t>(c.id),
                     static_cast<std::uint64_t>(epoch), batches);
        TurnMetrics m = ClientTurn(c, server, batch, config, noise_rng);
        loss_sum += m.loss;
        ++loss_count;
        bytes += m.boundary_bytes;
        ++batches;
      }
      std::vector<sim::EnergyEvent> events = sim::AccountTurnEnergy(
          c.profile, c.split_point, bytes / static_cast<double>(batches),
          batches, c.id, epoch);
      record.events.insert(record.events.end(), events.begin(), events.end());
    }

    if (epoch % server.aggregation_period() == 0) {
      AggregationOutcome outcome = server.Aggregate(present);
      er.aggregated = outcome.applied;
      if (!outcome.warning.empty()) {
        record.warnings.push_back("epoch " + std::to_string(epoch) + ": " +
                                  outcome.warning);
      }
      if (outcome.applied) {
        for (const ClientState* c : present) {
          double upload = static_cast<double>(c->prefix.parameter_count() *
                                              kBytesPerValue);
          record.events.push_back(
              {c->id, epoch, sim::EnergyKind::kComm,
               c->profile.joules_per_byte * upload,
               std::min(c->profile.comm_watts, c->profile.at(c->split_point).p_peak)});
        }
      }
    }

    for (const ClientState* c : present) {
      std::vector<sim::EnergyEvent> mine;
      for (std::size_t e = epoch_begin; e < record.events.size(); ++e) {
        if (record.events[e].client_id == c->id) mine.push_back(record.events[e]);
      }
      sim::EnergyTotals t = sim::SumEvents(mine);
      er.clients.push_back({c->id, t.comm, t.comp, t.idle, t.peak_watts});
    }

    std::vector<const ClientState*> evaluated;
    for (std::size_t idx : order) {
      if (participated.count(clients[idx].id)) evaluated.push_back(&clients[idx]);
    }
    er.accuracy = EvaluateGlobal(server, evaluated, test);
    er.mean_loss = loss_count ? loss_sum / static_cast<double>(loss_count) : 0.0;
    record.epochs.push_back(std::move(er));
  }
  return record;
}

}  // namespace splitsim::protocol
