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

#ifndef SPLITSIM_CLI_CONFIG_H_
#define SPLITSIM_CLI_CONFIG_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "splitsim/attack/reconstruct.h"
#include "splitsim/nn/layer.h"
#include "splitsim/profiler/energy_profile.h"
#include "splitsim/profiler/reference.h"
#include "splitsim/protocol/protocol.h"
#include "splitsim/sim/dataset.h"

namespace splitsim::cli {

inline constexpr const char* kToolVersion = "splitsim 0.1.0";

struct ModelConfig {
  nn::ModelSpec arch;
  int s_max = 1;
};

struct ClientsConfig {
  int n = 1;
  std::vector<double> alpha;  // one per client
  std::vector<profiler::DeviceParams> devices;  // one per client
  // Optional fixture profile per client; empty entries use the device.
  std::vector<std::string> profile_files;
  std::optional<protocol::AttendanceSchedule> schedule;
};

struct TrainingSection {
  protocol::TrainingConfig protocol;
  int epochs = 30;
};

struct OptimizerSection {
  double beta = 0.95;
  std::optional<double> t_fsim;  // unset: derive from reconstructions
  int max_rounds = 5;
  double sigma_floor = 0.0;
  int probe_epochs = 30;
};

struct PrivacySection {
  double sigma_max = 2.5;
  double sigma_step = 0.05;
  std::size_t samples = 8;
  attack::AttackOptions attack;
  protocol::NoiseFamily noise_family = protocol::NoiseFamily::kLaplace;
  unsigned threads = 1;
  std::size_t tfsim_bins = 10;
};

struct ReconstructSection {
  std::vector<int> split_points;
  std::vector<double> sigmas;
  std::size_t samples = 8;
};

struct MiaCase {
  int shadow_stage = 20;
  int target_stage = 20;
  double l2_lambda = 0.0;
};

struct MiaSection {
  std::vector<MiaCase> cases;
  int split_point = 1;
  int n_clients = 1;
  std::size_t members = 32;  // per pool
  double pixel_noise = 0.3;
  bool null_test = true;
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  ModelConfig model;
  sim::DatasetOptions data;
  std::size_t public_samples = 256;
  ClientsConfig clients;
  TrainingSection training;
  OptimizerSection optimizer;
  PrivacySection privacy;
  profiler::ReferenceTraining reference;
  ReconstructSection reconstruct;
  MiaSection mia;
  std::vector<int> scaling_counts;
};

// Every key with its default value.
nlohmann::json DefaultConfigJson();

// Defaults overlaid with `user`. Unknown keys are rejected.
nlohmann::json MergeConfig(const nlohmann::json& user);

// "a.b.c=value"; value parsed as JSON, falling back to a plain string.
void ApplyOverride(nlohmann::json& config, const std::string& assignment);

// Validates and converts. `base_dir` resolves relative file paths. Throws
// ConfigError naming the offending field.
ExperimentConfig ParseConfig(const nlohmann::json& resolved,
                             const std::string& base_dir = ".");

// Parses text; syntax errors become ConfigError with line and column.
nlohmann::json ParseConfigText(const std::string& text);

// FNV-1a over the canonical dump of the resolved config.
std::string ConfigHash(const nlohmann::json& resolved);

// "conv2d:4", "conv2d:4:5", "dense:16", "relu", "maxpool", "batchnorm".
nn::LayerSpec ParseLayerToken(const std::string& token);
std::string LayerToken(const nn::LayerSpec& spec);

}  // namespace splitsim::cli

#endif  // SPLITSIM_CLI_CONFIG_H_
