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

#include "splitsim/cli/config.h"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "splitsim/errors.h"
#include "splitsim/sim/format.h"
#include "splitsim/sim/rng.h"

namespace splitsim::cli {

using nlohmann::json;

namespace {

json DeviceDefaults() {
  profiler::DeviceParams d;
  return {{"joules_per_byte", d.joules_per_byte},
          {"joules_per_flop", d.joules_per_flop},
          {"idle_watts", d.idle_watts},
          {"idle_seconds_per_batch", d.idle_seconds_per_batch},
          {"comm_watts", d.comm_watts},
          {"base_watts", d.base_watts},
          {"watts_per_mflop", d.watts_per_mflop},
          {"p_max", d.p_max},
          {"batches_per_epoch", d.batches_per_epoch},
          {"batch_size", d.batch_size},
          {"bytes_per_value", d.bytes_per_value}};
}

json MiaCaseDefaults() {
  return {{"shadow_stage", 40}, {"target_stage", 40}, {"lambda", 0.0}};
}

// Overlays `user` onto `base`. Keys must exist in `base`; a null default
// accepts any value.
void Overlay(json& base, const json& user, const std::string& path) {
  if (!user.is_object()) {
    throw ConfigError("field '" + (path.empty() ? std::string("<root>") : path) +
                      "': expected an object");
  }
  for (auto it = user.begin(); it != user.end(); ++it) {
    std::string key = path.empty() ? it.key() : path + "." + it.key();
    if (!base.contains(it.key())) throw ConfigError("field '" + key + "': unknown key");
    json& slot = base[it.key()];
    if (slot.is_object()) {
      Overlay(slot, it.value(), key);
    } else if (key == "clients.devices") {
      if (!it.value().is_array()) throw ConfigError("field '" + key + "': expected an array");
      slot = json::array();
      for (std::size_t i = 0; i < it.value().size(); ++i) {
        json d = DeviceDefaults();
        Overlay(d, it.value()[i], key + "[" + std::to_string(i) + "]");
        slot.push_back(d);
      }
    } else if (key == "mia.cases") {
      if (!it.value().is_array()) throw ConfigError("field '" + key + "': expected an array");
      slot = json::array();
      for (std::size_t i = 0; i < it.value().size(); ++i) {
        json c = MiaCaseDefaults();
        Overlay(c, it.value()[i], key + "[" + std::to_string(i) + "]");
        slot.push_back(c);
      }
    } else {
      slot = it.value();
    }
  }
}

const json& At(const json& j, const std::string& dotted) {
  const json* cur = &j;
  std::size_t start = 0;
  while (true) {
    std::size_t dot = dotted.find('.', start);
    std::string key = dotted.substr(start, dot == std::string::npos ? std::string::npos
                                                                    : dot - start);
    if (!cur->is_object() || !cur->contains(key)) {
      throw ConfigError("field '" + dotted + "': missing");
    }
    cur = &(*cur)[key];
    if (dot == std::string::npos) return *cur;
    start = dot + 1;
  }
}

[[noreturn]] void Fail(const std::string& field, const std::string& why) {
  throw ConfigError("field '" + field + "': " + why);
}

double Num(const json& j, const std::string& field) {
  const json& v = At(j, field);
  if (!v.is_number()) Fail(field, "expected a number");
  return v.get<double>();
}

double NumIn(const json& j, const std::string& field, double lo, double hi,
             bool lo_open = false) {
  double v = Num(j, field);
  if (lo_open ? !(v > lo) : !(v >= lo)) {
    Fail(field, "must be " + std::string(lo_open ? "> " : ">= ") + sim::FormatDouble(lo));
  }
  if (!(v <= hi)) Fail(field, "must be <= " + sim::FormatDouble(hi));
  return v;
}

long long Int(const json& j, const std::string& field, long long lo) {
  const json& v = At(j, field);
  if (!v.is_number_integer()) Fail(field, "expected an integer");
  long long x = v.get<long long>();
  if (x < lo) Fail(field, "must be >= " + std::to_string(lo));
  return x;
}

bool Bool(const json& j, const std::string& field) {
  const json& v = At(j, field);
  if (!v.is_boolean()) Fail(field, "expected true or false");
  return v.get<bool>();
}

std::string Str(const json& j, const std::string& field) {
  const json& v = At(j, field);
  if (!v.is_string()) Fail(field, "expected a string");
  return v.get<std::string>();
}

profiler::DeviceParams ParseDevice(const json& d, const std::string& field) {
  auto num = [&](const char* key) {
    const json& v = d.at(key);
    std::string f = field + "." + key;
    if (!v.is_number()) Fail(f, "expected a number");
    double x = v.get<double>();
    if (!(x > 0.0)) Fail(f, "must be > 0");
    return x;
  };
  auto count = [&](const char* key) {
    const json& v = d.at(key);
    std::string f = field + "." + key;
    if (!v.is_number_integer() || v.get<long long>() < 1) Fail(f, "expected a positive integer");
    return static_cast<std::size_t>(v.get<long long>());
  };
  profiler::DeviceParams p;
  p.joules_per_byte = num("joules_per_byte");
  p.joules_per_flop = num("joules_per_flop");
  p.idle_watts = num("idle_watts");
  p.idle_seconds_per_batch = num("idle_seconds_per_batch");
  p.comm_watts = num("comm_watts");
  p.base_watts = num("base_watts");
  p.watts_per_mflop = num("watts_per_mflop");
  p.p_max = num("p_max");
  p.batches_per_epoch = num("batches_per_epoch");
  p.batch_size = count("batch_size");
  p.bytes_per_value = count("bytes_per_value");
  return p;
}

std::string JoinPath(const std::string& base, const std::string& path) {
  if (path.empty() || path[0] == '/' || base.empty() || base == ".") return path;
  return base + "/" + path;
}

}  // namespace

nn::LayerSpec ParseLayerToken(const std::string& token) {
  std::vector<std::string> parts;
  std::stringstream ss(token);
  std::string part;
  while (std::getline(ss, part, ':')) parts.push_back(part);
  if (parts.empty()) throw ConfigError("empty layer token");
  nn::LayerSpec spec;
  try {
    spec.kind = nn::ParseLayerKind(parts[0]);
  } catch (const ArgumentError& e) {
    throw ConfigError(e.what());
  }
  bool needs_units = spec.kind == nn::LayerKind::kDense || spec.kind == nn::LayerKind::kConv2d;
  std::size_t max_parts = spec.kind == nn::LayerKind::kConv2d ? 3 : (needs_units ? 2 : 1);
  if (parts.size() > max_parts || (needs_units && parts.size() < 2)) {
    throw ConfigError("layer '" + token + "': expected " +
                      (spec.kind == nn::LayerKind::kConv2d ? "conv2d:units[:kernel]"
                       : needs_units                      ? "dense:units"
                                                          : std::string(parts[0])));
  }
  auto positive = [&](const std::string& s) {
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || v < 1) {
      throw ConfigError("layer '" + token + "': '" + s + "' is not a positive integer");
    }
    return static_cast<std::size_t>(v);
  };
  if (parts.size() >= 2) spec.units = positive(parts[1]);
  if (parts.size() == 3) spec.kernel = positive(parts[2]);
  return spec;
}

std::string LayerToken(const nn::LayerSpec& spec) {
  std::string out(nn::LayerKindName(spec.kind));
  if (spec.kind == nn::LayerKind::kDense || spec.kind == nn::LayerKind::kConv2d) {
    out += ":" + std::to_string(spec.units);
  }
  if (spec.kind == nn::LayerKind::kConv2d && spec.kernel != 3) {
    out += ":" + std::to_string(spec.kernel);
  }
  return out;
}

json DefaultConfigJson() {
  return {
      {"seed", 1},
      {"model",
       {{"input", {1, 8, 8}},
        {"layers", {"conv2d:4", "relu", "maxpool", "conv2d:8", "relu", "maxpool", "dense:4"}},
        {"s_max", 6}}},
      {"data",
       {{"kind", "mini-images"},
        {"n_class", 4},
        {"samples_per_client", 64},
        {"test_samples", 200},
        {"public_samples", 256},
        {"iid", true},
        {"image_size", 8},
        {"pixel_noise", 0.1},
        {"blob_dims", 2},
        {"blob_separation", 4.0},
        {"spiral_noise", 0.1}}},
      {"clients",
       {{"n", 3},
        {"alpha", {0.5}},
        {"device", DeviceDefaults()},
        {"devices", json::array()},
        {"profile_files", json::array()},
        {"schedule", nullptr}}},
      {"training",
       {{"aggregation_period", protocol::kDefaultAggregationPeriod},
        {"lr", 0.05},
        {"batch_size", 16},
        {"epochs", 30},
        {"l2_lambda", 0.0},
        {"noise_family", "laplace"}}},
      {"optimizer",
       {{"beta", 0.95},
        {"t_fsim", "auto"},
        {"max_rounds", 5},
        {"sigma_floor", 0.0},
        {"probe_epochs", 30}}},
      {"privacy",
       {{"sigma_max", 2.5},
        {"sigma_step", 0.05},
        {"samples", 8},
        {"iterations", 400},
        {"lr_input", 0.3},
        {"lr_model", 0.05},
        {"tv_weight", 1e-3},
        {"init_jitter", 0.1},
        {"threads", 1},
        {"tfsim_bins", 10}}},
      {"reference", {{"epochs", 30}, {"lr", 0.05}, {"batch_size", 16}, {"l2_lambda", 0.0}}},
      {"reconstruct",
       {{"split_points", json::array()},
        {"sigmas", {0.0, 0.5, 1.0, 1.5, 2.0, 2.5}},
        {"samples", 8}}},
      {"mia",
       {{"cases", json::array({MiaCaseDefaults()})},
        {"split_point", 1},
        {"n_clients", 1},
        {"members", 32},
        {"pixel_noise", 0.3},
        {"null_test", true}}},
      {"scaling", {{"counts", {3, 5, 8}}}},
  };
}

json MergeConfig(const json& user) {
  json merged = DefaultConfigJson();
  Overlay(merged, user, "");
  return merged;
}

void ApplyOverride(json& config, const std::string& assignment) {
  std::size_t eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + assignment + "': expected key=value");
  }
  std::string key = assignment.substr(0, eq);
  std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  json patch = value;
  std::vector<std::string> parts;
  std::stringstream ss(key);
  std::string part;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) {
    if (it->empty()) throw ConfigError("override '" + assignment + "': empty key segment");
    patch = json{{*it, patch}};
  }
  Overlay(config, patch, "");
}

json ParseConfigText(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config syntax: ") + e.what());
  }
}

std::string ConfigHash(const json& resolved) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(sim::Fnv1a64(resolved.dump())));
  return buf;
}

ExperimentConfig ParseConfig(const json& j, const std::string& base_dir) {
  ExperimentConfig c;
  c.seed = static_cast<std::uint64_t>(Int(j, "seed", 0));

  // model
  const json& input = At(j, "model.input");
  if (!input.is_array() || input.empty()) Fail("model.input", "expected a non-empty array");
  for (const json& d : input) {
    if (!d.is_number_integer() || d.get<long long>() < 1) {
      Fail("model.input", "dimensions must be positive integers");
    }
    c.model.arch.input_shape.push_back(static_cast<std::size_t>(d.get<long long>()));
  }
  const json& layers = At(j, "model.layers");
  if (!layers.is_array() || layers.size() < 2) {
    Fail("model.layers", "expected at least two layers");
  }
  for (std::size_t i = 0; i < layers.size(); ++i) {
    std::string f = "model.layers[" + std::to_string(i) + "]";
    if (!layers[i].is_string()) Fail(f, "expected a layer token string");
    try {
      c.model.arch.layers.push_back(ParseLayerToken(layers[i].get<std::string>()));
    } catch (const ConfigError& e) {
      Fail(f, e.what());
    }
  }
  try {
    c.model.arch.shapes();
  } catch (const std::exception& e) {
    Fail("model.layers", e.what());
  }
  c.model.s_max = static_cast<int>(Int(j, "model.s_max", 1));
  if (static_cast<std::size_t>(c.model.s_max) + 1 > c.model.arch.depth()) {
    Fail("model.s_max", "must leave at least one server layer (k = " +
                            std::to_string(c.model.arch.depth()) + ")");
  }

  // data
  try {
    c.data.kind = sim::ParseDatasetKind(Str(j, "data.kind"));
  } catch (const ArgumentError& e) {
    Fail("data.kind", e.what());
  }
  c.data.n_class = static_cast<int>(Int(j, "data.n_class", 2));
  c.data.samples_per_client = static_cast<std::size_t>(Int(j, "data.samples_per_client", 1));
  c.data.test_samples = static_cast<std::size_t>(Int(j, "data.test_samples", 1));
  c.public_samples = static_cast<std::size_t>(Int(j, "data.public_samples", 2));
  c.data.iid = Bool(j, "data.iid");
  c.data.image_size = static_cast<std::size_t>(Int(j, "data.image_size", 4));
  c.data.pixel_noise = NumIn(j, "data.pixel_noise", 0.0, 10.0);
  c.data.blob_dims = static_cast<std::size_t>(Int(j, "data.blob_dims", 1));
  c.data.blob_separation = NumIn(j, "data.blob_separation", 0.0, 1e6);
  c.data.spiral_noise = NumIn(j, "data.spiral_noise", 0.0, 10.0);
  if (c.data.kind == sim::DatasetKind::kMiniImages && c.data.n_class > sim::kMiniImageTemplates) {
    Fail("data.n_class", "mini-images supports at most " +
                             std::to_string(sim::kMiniImageTemplates) + " classes");
  }
  if (c.data.kind == sim::DatasetKind::kTwoSpirals && c.data.n_class != 2) {
    Fail("data.n_class", "two-spirals has exactly 2 classes");
  }
  nn::Shape expected = c.data.kind == sim::DatasetKind::kMiniImages
                           ? nn::Shape{1, c.data.image_size, c.data.image_size}
                       : c.data.kind == sim::DatasetKind::kBlobs ? nn::Shape{c.data.blob_dims}
                                                                 : nn::Shape{2};
  if (c.model.arch.input_shape != expected) {
    Fail("model.input", "dataset produces samples of shape " + nn::ShapeString(expected));
  }
  if (nn::ShapeSize(c.model.arch.shapes().back().output) !=
      static_cast<std::size_t>(c.data.n_class)) {
    Fail("model.layers", "last layer must output n_class = " + std::to_string(c.data.n_class) +
                             " logits");
  }

  // clients
  const json& n = At(j, "clients.n");
  if (!n.is_number_integer() || n.get<long long>() < 1) {
    Fail("clients.n", "roster is empty; need at least one client");
  }
  c.clients.n = static_cast<int>(n.get<long long>());
  const json& alpha = At(j, "clients.alpha");
  if (!alpha.is_array() || alpha.empty()) Fail("clients.alpha", "expected a non-empty array");
  if (alpha.size() != 1 && alpha.size() != static_cast<std::size_t>(c.clients.n)) {
    Fail("clients.alpha", "expected 1 or clients.n = " + std::to_string(c.clients.n) +
                              " values, got " + std::to_string(alpha.size()));
  }
  for (int i = 0; i < c.clients.n; ++i) {
    const json& a = alpha[alpha.size() == 1 ? 0 : static_cast<std::size_t>(i)];
    std::string f = "clients.alpha[" + std::to_string(alpha.size() == 1 ? 0 : i) + "]";
    if (!a.is_number() || a.get<double>() < 0.0 || a.get<double>() > 1.0) {
      Fail(f, "must be a number in [0,1]");
    }
    c.clients.alpha.push_back(a.get<double>());
  }
  profiler::DeviceParams base = ParseDevice(At(j, "clients.device"), "clients.device");
  const json& devices = At(j, "clients.devices");
  if (!devices.empty() && devices.size() != static_cast<std::size_t>(c.clients.n)) {
    Fail("clients.devices", "expected 0 or clients.n entries");
  }
  for (int i = 0; i < c.clients.n; ++i) {
    c.clients.devices.push_back(
        devices.empty() ? base
                        : ParseDevice(devices[static_cast<std::size_t>(i)],
                                      "clients.devices[" + std::to_string(i) + "]"));
  }
  const json& files = At(j, "clients.profile_files");
  if (!files.is_array() ||
      (!files.empty() && files.size() != static_cast<std::size_t>(c.clients.n))) {
    Fail("clients.profile_files", "expected 0 or clients.n paths");
  }
  for (std::size_t i = 0; i < files.size(); ++i) {
    std::string f = "clients.profile_files[" + std::to_string(i) + "]";
    if (!files[i].is_string()) Fail(f, "expected a path string");
    std::string path = files[i].get<std::string>();
    if (!path.empty()) {
      path = JoinPath(base_dir, path);
      if (!std::ifstream(path)) Fail(f, "file '" + path + "' does not exist");
    }
    c.clients.profile_files.push_back(path);
  }
  const json& schedule = At(j, "clients.schedule");
  if (schedule.is_string()) {
    std::string path = JoinPath(base_dir, schedule.get<std::string>());
    std::ifstream is(path);
    if (!is) Fail("clients.schedule", "file '" + path + "' does not exist");
    try {
      c.clients.schedule = protocol::AttendanceSchedule::Parse(is);
    } catch (const std::exception& e) {
      Fail("clients.schedule", e.what());
    }
  } else if (schedule.is_array()) {
    std::vector<protocol::AttendanceSchedule::Span> spans;
    for (std::size_t i = 0; i < schedule.size(); ++i) {
      std::string f = "clients.schedule[" + std::to_string(i) + "]";
      const json& s = schedule[i];
      if (!s.is_object() || !s.contains("first") || !s.contains("last") ||
          !s.contains("clients")) {
        Fail(f, "expected {first, last, clients}");
      }
      protocol::AttendanceSchedule::Span span;
      if (!s["first"].is_number_integer() || !s["last"].is_number_integer() ||
          !s["clients"].is_array()) {
        Fail(f, "first/last must be integers and clients an array");
      }
      span.first_epoch = s["first"].get<int>();
      span.last_epoch = s["last"].get<int>();
      if (span.first_epoch < 1 || span.last_epoch < span.first_epoch) {
        Fail(f, "need 1 <= first <= last");
      }
      for (const json& id : s["clients"]) {
        if (!id.is_number_integer()) Fail(f, "client ids must be integers");
        span.clients.push_back(id.get<int>());
      }
      spans.push_back(std::move(span));
    }
    c.clients.schedule = protocol::AttendanceSchedule(std::move(spans));
  } else if (!schedule.is_null()) {
    Fail("clients.schedule", "expected null, a path, or an array of spans");
  }
  if (c.clients.schedule) {
    std::vector<int> roster(static_cast<std::size_t>(c.clients.n));
    for (int i = 0; i < c.clients.n; ++i) roster[static_cast<std::size_t>(i)] = i;
    try {
      c.clients.schedule->Validate(roster);
    } catch (const std::exception& e) {
      Fail("clients.schedule", e.what());
    }
  }

  // training
  c.training.protocol.aggregation_period =
      static_cast<int>(Int(j, "training.aggregation_period", 1));
  c.training.protocol.lr = NumIn(j, "training.lr", 0.0, 1e6, true);
  c.training.protocol.batch_size = static_cast<std::size_t>(Int(j, "training.batch_size", 1));
  c.training.epochs = static_cast<int>(Int(j, "training.epochs", 1));
  c.training.protocol.l2_lambda = NumIn(j, "training.l2_lambda", 0.0, 1e6);
  try {
    c.training.protocol.noise_family = protocol::ParseNoiseFamily(Str(j, "training.noise_family"));
  } catch (const ArgumentError& e) {
    Fail("training.noise_family", e.what());
  }

  // optimizer
  c.optimizer.beta = NumIn(j, "optimizer.beta", 0.0, 1.0, true);
  const json& t = At(j, "optimizer.t_fsim");
  if (t.is_string()) {
    if (t.get<std::string>() != "auto") Fail("optimizer.t_fsim", "expected \"auto\" or a number");
  } else {
    c.optimizer.t_fsim = NumIn(j, "optimizer.t_fsim", 0.0, 1.0, true);
    if (*c.optimizer.t_fsim >= 1.0) Fail("optimizer.t_fsim", "must be < 1");
  }
  c.optimizer.max_rounds = static_cast<int>(Int(j, "optimizer.max_rounds", 1));
  c.optimizer.sigma_floor = NumIn(j, "optimizer.sigma_floor", 0.0, 1e6);
  c.optimizer.probe_epochs = static_cast<int>(Int(j, "optimizer.probe_epochs", 1));

  // privacy
  c.privacy.sigma_max = NumIn(j, "privacy.sigma_max", 0.0, 1e6);
  c.privacy.sigma_step = NumIn(j, "privacy.sigma_step", 0.0, 1e6, true);
  c.privacy.samples = static_cast<std::size_t>(Int(j, "privacy.samples", 1));
  if (c.privacy.samples > c.data.test_samples) {
    Fail("privacy.samples", "exceeds data.test_samples (attacked samples come from the "
                            "public test split)");
  }
  c.privacy.attack.iterations = static_cast<int>(Int(j, "privacy.iterations", 0));
  c.privacy.attack.lr_input = NumIn(j, "privacy.lr_input", 0.0, 1e6);
  c.privacy.attack.lr_model = NumIn(j, "privacy.lr_model", 0.0, 1e6);
  c.privacy.attack.tv_weight = NumIn(j, "privacy.tv_weight", 0.0, 1e6);
  c.privacy.attack.init_jitter = NumIn(j, "privacy.init_jitter", 0.0, 0.5);
  c.privacy.noise_family = c.training.protocol.noise_family;
  c.privacy.threads = static_cast<unsigned>(Int(j, "privacy.threads", 1));
  c.privacy.tfsim_bins = static_cast<std::size_t>(Int(j, "privacy.tfsim_bins", 1));

  // reference
  c.reference.epochs = static_cast<int>(Int(j, "reference.epochs", 0));
  c.reference.lr = NumIn(j, "reference.lr", 0.0, 1e6, true);
  c.reference.batch_size = static_cast<std::size_t>(Int(j, "reference.batch_size", 1));
  c.reference.l2_lambda = NumIn(j, "reference.l2_lambda", 0.0, 1e6);

  // reconstruct
  const json& sp = At(j, "reconstruct.split_points");
  if (!sp.is_array()) Fail("reconstruct.split_points", "expected an array");
  for (const json& s : sp) {
    if (!s.is_number_integer() || s.get<int>() < 1 || s.get<int>() > c.model.s_max) {
      Fail("reconstruct.split_points", "entries must be integers in 1..s_max");
    }
    c.reconstruct.split_points.push_back(s.get<int>());
  }
  if (c.reconstruct.split_points.empty()) {
    for (int s = 1; s <= c.model.s_max; ++s) c.reconstruct.split_points.push_back(s);
  }
  const json& sg = At(j, "reconstruct.sigmas");
  if (!sg.is_array() || sg.empty()) Fail("reconstruct.sigmas", "expected a non-empty array");
  for (const json& s : sg) {
    if (!s.is_number() || s.get<double>() < 0.0) {
      Fail("reconstruct.sigmas", "entries must be non-negative numbers");
    }
    c.reconstruct.sigmas.push_back(s.get<double>());
  }
  for (std::size_t i = 1; i < c.reconstruct.sigmas.size(); ++i) {
    if (!(c.reconstruct.sigmas[i] > c.reconstruct.sigmas[i - 1])) {
      Fail("reconstruct.sigmas", "must be strictly ascending");
    }
  }
  c.reconstruct.samples = static_cast<std::size_t>(Int(j, "reconstruct.samples", 1));
  if (c.reconstruct.samples > c.data.test_samples) {
    Fail("reconstruct.samples", "exceeds data.test_samples");
  }

  // mia
  const json& cases = At(j, "mia.cases");
  if (!cases.is_array() || cases.empty()) Fail("mia.cases", "expected a non-empty array");
  for (std::size_t i = 0; i < cases.size(); ++i) {
    std::string f = "mia.cases[" + std::to_string(i) + "]";
    MiaCase mc;
    mc.shadow_stage = static_cast<int>(Int(cases[i], "shadow_stage", 0));
    mc.target_stage = static_cast<int>(Int(cases[i], "target_stage", 0));
    const json& l = cases[i].at("lambda");
    if (!l.is_number() || l.get<double>() < 0.0) Fail(f + ".lambda", "must be >= 0");
    mc.l2_lambda = l.get<double>();
    c.mia.cases.push_back(mc);
  }
  c.mia.split_point = static_cast<int>(Int(j, "mia.split_point", 1));
  if (c.mia.split_point > c.model.s_max) Fail("mia.split_point", "must be <= model.s_max");
  c.mia.n_clients = static_cast<int>(Int(j, "mia.n_clients", 1));
  c.mia.members = static_cast<std::size_t>(Int(j, "mia.members", 2));
  c.mia.pixel_noise = NumIn(j, "mia.pixel_noise", 0.0, 10.0);
  c.mia.null_test = Bool(j, "mia.null_test");

  // scaling
  const json& counts = At(j, "scaling.counts");
  if (!counts.is_array() || counts.empty()) Fail("scaling.counts", "expected a non-empty array");
  for (const json& v : counts) {
    if (!v.is_number_integer() || v.get<int>() < 1) {
      Fail("scaling.counts", "entries must be integers >= 1");
    }
    c.scaling_counts.push_back(v.get<int>());
  }
  return c;
}

}  // namespace splitsim::cli
