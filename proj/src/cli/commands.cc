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

#include "splitsim/cli/commands.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "splitsim/errors.h"
#include "splitsim/profiler/energy_profile.h"
#include "splitsim/sim/format.h"

namespace splitsim::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string ReadText(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::string OutPath(const RunContext& ctx, const std::string& name) {
  return (fs::path(ctx.out_dir) / name).string();
}

// Opens a prerequisite artifact or throws DependencyError naming it.
std::ifstream Require(const RunContext& ctx, const std::string& name,
                      const std::string& producer) {
  std::string path = OutPath(ctx, name);
  std::ifstream is(path);
  if (!is) {
    throw DependencyError("missing prerequisite file '" + path + "'; run `splitsim " +
                          producer + "` first");
  }
  return is;
}

// Writes through a buffer so a failed command leaves no partial file.
void WriteFile(const RunContext& ctx, const std::string& name, const std::string& body) {
  fs::create_directories(ctx.out_dir);
  std::string path = OutPath(ctx, name);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw StateError("cannot write '" + path + "'");
  os << body;
}

std::string StripComments(std::istream& is) {
  std::string line, out;
  while (std::getline(is, line)) {
    if (!line.empty() && line[0] == '#') continue;
    out += line;
    out += '\n';
  }
  return out;
}

std::string EnergyFileName(int id) { return "energy_client_" + std::to_string(id) + ".tsv"; }

std::vector<std::string> SplitTabs(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string tok;
  while (std::getline(ss, tok, '\t')) out.push_back(tok);
  return out;
}

std::vector<sim::EnergyPowerProfile> ReadProfiles(const RunContext& ctx) {
  std::vector<sim::EnergyPowerProfile> out;
  for (int i = 0; i < ctx.config.clients.n; ++i) {
    std::ifstream is = Require(ctx, EnergyFileName(i), "profile energy");
    out.push_back(sim::ReadProfile(is));
    if (out.back().s_max() != ctx.config.model.s_max) {
      throw DependencyError("'" + OutPath(ctx, EnergyFileName(i)) +
                            "' was profiled for a different s_max; rerun `splitsim profile "
                            "energy`");
    }
  }
  return out;
}

profiler::PrivacyLeakageTable ReadPlt(const RunContext& ctx) {
  std::ifstream is = Require(ctx, "privacy_table.tsv", "profile privacy");
  profiler::PrivacyLeakageTable plt = profiler::ReadPrivacyTable(is);
  if (plt.s_max() != ctx.config.model.s_max) {
    throw DependencyError("'" + OutPath(ctx, "privacy_table.tsv") +
                          "' was built for a different s_max; rerun `splitsim profile privacy`");
  }
  return plt;
}

Thresholds ReadThresholdFile(const RunContext& ctx) {
  std::ifstream is = Require(ctx, "thresholds.tsv", "profile privacy");
  return ReadThresholds(is);
}

json DecisionJson(const bilevel::SplitDecision& d) {
  return {{"client", d.client_id}, {"s", d.split_point},      {"sigma", d.sigma},
          {"fsim", d.fsim},        {"energy_norm", d.energy_norm}, {"objective", d.objective},
          {"p_peak", d.p_peak},    {"p_max", d.p_max},        {"lo", d.range.lo},
          {"hi", d.range.hi}};
}

std::string Jsonl(const RunContext& ctx, const std::vector<json>& rows) {
  std::string out = JsonHeader(ctx).dump() + "\n";
  for (const json& r : rows) out += r.dump() + "\n";
  return out;
}

// ---- subcommands ----------------------------------------------------------

void CmdProfilePrivacy(const RunContext& ctx, std::ostream& out) {
  PrivacyStage stage = RunPrivacyStage(ctx.config);
  const auto& plt = stage.build.table;

  std::ostringstream table;
  WriteTsvHeader(table, ctx);
  profiler::WritePrivacyTable(table, plt);
  WriteFile(ctx, "privacy_table.tsv", table.str());

  std::ostringstream stats;
  WriteTsvHeader(stats, ctx);
  stats << "s\tsigma\tmean_fsim\tstd_fsim\tn\tconverged\n";
  for (int s = 1; s <= plt.s_max(); ++s) {
    for (std::size_t k = 0; k < plt.sigmas().size(); ++k) {
      const profiler::CellStats& c = stage.build.stats[static_cast<std::size_t>(s - 1)][k];
      stats << s << '\t' << sim::FormatDouble(plt.sigmas()[k]) << '\t'
            << sim::FormatDouble(c.mean) << '\t' << sim::FormatDouble(c.stddev) << '\t' << c.n
            << '\t' << (c.converged ? 1 : 0) << '\n';
    }
  }
  WriteFile(ctx, "privacy_stats.tsv", stats.str());

  std::ostringstream th;
  WriteTsvHeader(th, ctx);
  WriteThresholds(th, stage, ctx.config.optimizer.beta);
  WriteFile(ctx, "thresholds.tsv", th.str());

  std::ostringstream ckpt;
  WriteTsvHeader(ckpt, ctx);
  nn::WriteCheckpoint(ckpt, stage.reference.model);
  WriteFile(ctx, "reference_model.ckpt", ckpt.str());

  out << "A_ref " << sim::FormatDouble(stage.reference.accuracy) << ", A_min "
      << sim::FormatDouble(stage.a_min) << ", T_FSIM " << sim::FormatDouble(stage.t_fsim)
      << (stage.t_fsim_auto ? " (auto)" : " (config)") << "\n";
}

void CmdProfileEnergy(const RunContext& ctx, std::ostream& out) {
  std::vector<sim::EnergyPowerProfile> profiles = MakeProfiles(ctx.config);
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    std::ostringstream os;
    WriteTsvHeader(os, ctx);
    sim::WriteProfile(os, profiles[i]);
    WriteFile(ctx, EnergyFileName(static_cast<int>(i)), os.str());
  }
  out << "wrote " << profiles.size() << " energy profiles\n";
}

void CmdOptimize(const RunContext& ctx, std::ostream& out) {
  profiler::PrivacyLeakageTable plt = ReadPlt(ctx);
  Thresholds th = ReadThresholdFile(ctx);
  std::vector<sim::EnergyPowerProfile> profiles = ReadProfiles(ctx);
  sim::FederatedData data = MakeClientData(ctx.config);
  bilevel::OptimizeResult result = RunOptimizeStage(ctx.config, data, profiles, plt, th);

  std::vector<json> rows;
  for (const bilevel::RoundTrace& t : result.trace) {
    json decisions = json::array();
    for (const auto& d : t.decisions) decisions.push_back(DecisionJson(d));
    json saturated = json::array();
    for (char c : t.nat.saturated) saturated.push_back(c != 0);
    rows.push_back({{"round", t.round},
                    {"G_acc", t.g_acc},
                    {"A_min", result.a_min},
                    {"F", t.total_fsim},
                    {"sigma", t.nat.sigma},
                    {"saturated", saturated},
                    {"decisions", decisions}});
  }
  rows.push_back({{"final",
                   {{"converged", result.converged},
                    {"rounds", result.rounds},
                    {"best_round", result.best_round}}}});
  WriteFile(ctx, "optimize_trace.jsonl", Jsonl(ctx, rows));

  std::ostringstream as;
  WriteTsvHeader(as, ctx);
  WriteAssignment(as, result.decisions, ctx.config.clients.alpha);
  WriteFile(ctx, "assignment.tsv", as.str());

  std::ostringstream nt;
  WriteTsvHeader(nt, ctx);
  bilevel::WriteNoiseTable(nt, result.nat);
  WriteFile(ctx, "noise_table.tsv", nt.str());

  out << (result.converged ? "converged" : "did not converge") << " after " << result.rounds
      << " round(s); best round " << result.best_round << "\n";
}

void CmdTrain(const RunContext& ctx, std::ostream& out) {
  std::ifstream as = Require(ctx, "assignment.tsv", "optimize");
  std::vector<bilevel::SplitDecision> decisions = ReadAssignment(as);
  std::vector<sim::EnergyPowerProfile> profiles = ReadProfiles(ctx);
  sim::FederatedData data = MakeClientData(ctx.config);
  bilevel::CampaignResult result = RunTrainStage(ctx.config, data, profiles, decisions);

  std::ostringstream rec;
  rec << JsonHeader(ctx).dump() << "\n";
  protocol::WriteTrainingRecord(rec, result.record);
  WriteFile(ctx, "training_record.jsonl", rec.str());

  std::ostringstream ckpt;
  WriteTsvHeader(ckpt, ctx);
  nn::WriteCheckpoint(ckpt, result.global);
  WriteFile(ctx, "global_model.ckpt", ckpt.str());

  for (const std::string& w : result.record.warnings) out << "warning: " << w << "\n";
  out << "final accuracy " << sim::FormatDouble(result.record.final_accuracy()) << "\n";
}

void CmdReconstruct(const RunContext& ctx, std::ostream& out) {
  const ExperimentConfig& cfg = ctx.config;
  std::ifstream ck = Require(ctx, "reference_model.ckpt", "profile privacy");
  std::istringstream body(StripComments(ck));
  nn::LayeredModel victim = nn::ReadCheckpoint(body);

  sim::FederatedData pub = MakePublicData(cfg);
  int deepest = 0;
  for (int s : cfg.reconstruct.split_points) deepest = std::max(deepest, s);
  profiler::AttackBudget budget{cfg.reconstruct.samples, cfg.privacy.attack,
                                cfg.privacy.noise_family};
  sim::RngStream root(cfg.seed);
  profiler::PrivacyTableBuild build = profiler::BuildPrivacyLeakageTable(
      victim, pub.test, deepest, cfg.reconstruct.sigmas, budget, root.derive("reconstruct"),
      cfg.privacy.threads);

  std::vector<json> rows;
  std::size_t m = cfg.reconstruct.samples;
  std::size_t n_sigma = cfg.reconstruct.sigmas.size();
  for (int s : cfg.reconstruct.split_points) {
    for (std::size_t k = 0; k < n_sigma; ++k) {
      const profiler::CellStats& c = build.stats[static_cast<std::size_t>(s - 1)][k];
      for (std::size_t j = 0; j < m; ++j) {
        const attack::LabeledReconstruction& r =
            build.reconstructions[(static_cast<std::size_t>(s - 1) * n_sigma + k) * m + j];
        nn::Shape batched = r.x_hat.shape();
        batched.insert(batched.begin(), 1);
        nn::Tensor x(batched, std::vector<double>(r.x_hat.values().begin(),
                                                  r.x_hat.values().end()));
        int predicted = nn::Argmax(nn::Forward(victim, x, nn::Mode::kEval, false).output)[0];
        rows.push_back({{"record", "sample"},
                        {"s", s},
                        {"sigma", cfg.reconstruct.sigmas[k]},
                        {"sample", pub.test.ids[j]},
                        {"label", r.label},
                        {"fsim", r.fsim},
                        {"recognized", predicted == r.label}});
      }
      rows.push_back({{"record", "cell"},
                      {"s", s},
                      {"sigma", cfg.reconstruct.sigmas[k]},
                      {"mean_fsim", c.mean},
                      {"std_fsim", c.stddev},
                      {"n", c.n},
                      {"converged", c.converged}});
    }
  }
  WriteFile(ctx, "reconstruction.jsonl", Jsonl(ctx, rows));
  out << "attacked " << m << " sample(s) at " << cfg.reconstruct.split_points.size()
      << " split point(s) x " << n_sigma << " noise level(s)\n";
}

void CmdMia(const RunContext& ctx, std::ostream& out) {
  std::vector<attack::MiaResult> results = RunMiaStage(ctx.config);
  std::vector<json> rows;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const attack::MiaResult& r = results[i];
    bool null_row = ctx.config.mia.null_test && i + 1 == results.size();
    rows.push_back({{"shadow_stage", r.shadow_stage},
                    {"target_stage", r.target_stage},
                    {"lambda", r.l2_lambda},
                    {"s", r.split_point},
                    {"null_test", null_row},
                    {"accuracy", r.accuracy}});
    out << (null_row ? "null " : "") << "shadow " << r.shadow_stage << " target "
        << r.target_stage << " lambda " << sim::FormatDouble(r.l2_lambda) << ": "
        << sim::FormatDouble(r.accuracy) << "\n";
  }
  WriteFile(ctx, "mia.jsonl", Jsonl(ctx, rows));
}

void CmdReport(const RunContext& ctx, std::ostream& out) {
  std::ifstream as = Require(ctx, "assignment.tsv", "optimize");
  std::vector<bilevel::SplitDecision> decisions = ReadAssignment(as);
  std::ifstream rs = Require(ctx, "training_record.jsonl", "train");
  protocol::TrainingRecord record = protocol::ReadTrainingRecord(rs);
  Summary sum = Summarize(decisions, record);

  std::ostringstream os;
  WriteTsvHeader(os, ctx);
  os << "accuracy\tfsim_total\tmean_epoch_energy_J\tclients\tepochs\n"
     << sim::FormatDouble(sum.accuracy) << '\t' << sim::FormatDouble(sum.fsim_total) << '\t'
     << sim::FormatDouble(sum.mean_epoch_energy) << '\t' << sum.clients << '\t' << sum.epochs
     << '\n';
  WriteFile(ctx, "summary.tsv", os.str());

  std::ostringstream pc;
  WriteTsvHeader(pc, ctx);
  pc << "client\ts\tsigma\tfsim\tmean_epoch_energy_J\n";
  for (std::size_t i = 0; i < decisions.size(); ++i) {
    const auto& d = decisions[i];
    pc << d.client_id << '\t' << d.split_point << '\t' << sim::FormatDouble(d.sigma) << '\t'
       << sim::FormatDouble(d.fsim) << '\t' << sim::FormatDouble(sum.client_energy[i]) << '\n';
  }
  WriteFile(ctx, "summary_clients.tsv", pc.str());
  out << "accuracy " << sim::FormatDouble(sum.accuracy) << ", FSIM_total "
      << sim::FormatDouble(sum.fsim_total) << ", mean epoch energy "
      << sim::FormatDouble(sum.mean_epoch_energy) << " J\n";
}

void CmdScaling(const RunContext& ctx, std::ostream& out) {
  profiler::PrivacyLeakageTable plt = ReadPlt(ctx);
  Thresholds th = ReadThresholdFile(ctx);
  std::ostringstream os;
  WriteTsvHeader(os, ctx);
  os << "n\taccuracy\tfsim_total\tfsim_per_client\tA_min\trounds\tconverged\n";
  for (int n : ctx.config.scaling_counts) {
    ScalingRow r = RunScalingPoint(ctx.config, n, plt, th);
    os << r.n << '\t' << sim::FormatDouble(r.accuracy) << '\t'
       << sim::FormatDouble(r.fsim_total) << '\t' << sim::FormatDouble(r.fsim_per_client())
       << '\t' << sim::FormatDouble(r.a_min) << '\t' << r.rounds << '\t'
       << (r.converged ? 1 : 0) << '\n';
    out << "N=" << n << ": accuracy " << sim::FormatDouble(r.accuracy) << ", FSIM_total "
        << sim::FormatDouble(r.fsim_total) << "\n";
  }
  WriteFile(ctx, "scaling.tsv", os.str());
}

void CmdExportData(const RunContext& ctx, std::ostream& out) {
  sim::FederatedData data = MakeClientData(ctx.config);
  std::ostringstream os;
  WriteTsvHeader(os, ctx);
  sim::WriteDataset(os, data);
  WriteFile(ctx, "dataset.tsv", os.str());
  out << "wrote " << data.clients.size() << " client shares and " << data.test.size()
      << " test samples\n";
}

}  // namespace

// ---- context --------------------------------------------------------------

RunContext LoadContext(const std::optional<std::string>& config_path,
                       const std::optional<std::uint64_t>& seed,
                       const std::vector<std::string>& overrides,
                       const std::string& out_dir) {
  RunContext ctx;
  std::string base_dir = ".";
  if (config_path) {
    json user = ParseConfigText(ReadText(*config_path));
    ctx.resolved = MergeConfig(user);
    fs::path parent = fs::path(*config_path).parent_path();
    if (!parent.empty()) base_dir = parent.string();
  } else {
    ctx.resolved = DefaultConfigJson();
  }
  if (seed) ctx.resolved["seed"] = *seed;
  for (const std::string& o : overrides) ApplyOverride(ctx.resolved, o);
  ctx.config = ParseConfig(ctx.resolved, base_dir);
  ctx.hash = ConfigHash(ctx.resolved);
  ctx.out_dir = out_dir;
  return ctx;
}

void WriteTsvHeader(std::ostream& os, const RunContext& ctx) {
  os << "# tool\t" << kToolVersion << "\n# config_hash\t" << ctx.hash << "\n# seed\t"
     << ctx.config.seed << "\n";
}

json JsonHeader(const RunContext& ctx) {
  return {{"header", {{"tool", kToolVersion}, {"config_hash", ctx.hash}, {"seed", ctx.config.seed}}}};
}

sim::FederatedData MakeClientData(const ExperimentConfig& cfg) {
  sim::DatasetOptions opts = cfg.data;
  opts.n_clients = cfg.clients.n;
  sim::RngStream rng = sim::RngStream(cfg.seed).derive("data");
  return sim::MakeSyntheticDataset(opts, rng);
}

sim::FederatedData MakePublicData(const ExperimentConfig& cfg) {
  sim::DatasetOptions opts = cfg.data;
  opts.n_clients = 1;
  opts.iid = true;
  opts.samples_per_client = cfg.public_samples;
  sim::RngStream rng = sim::RngStream(cfg.seed).derive("public");
  return sim::MakeSyntheticDataset(opts, rng);
}

std::vector<sim::EnergyPowerProfile> MakeProfiles(const ExperimentConfig& cfg) {
  std::vector<sim::EnergyPowerProfile> out;
  for (int i = 0; i < cfg.clients.n; ++i) {
    auto idx = static_cast<std::size_t>(i);
    if (idx < cfg.clients.profile_files.size() && !cfg.clients.profile_files[idx].empty()) {
      const std::string& path = cfg.clients.profile_files[idx];
      std::ifstream is(path);
      if (!is) throw ConfigError("field 'clients.profile_files': cannot open '" + path + "'");
      sim::EnergyPowerProfile p = sim::ReadProfile(is);
      if (p.s_max() != cfg.model.s_max) {
        throw ConfigError("field 'clients.profile_files[" + std::to_string(i) + "]': '" +
                          path + "' covers s_max " + std::to_string(p.s_max()) +
                          ", model.s_max is " + std::to_string(cfg.model.s_max));
      }
      out.push_back(std::move(p));
    } else {
      out.push_back(profiler::BuildEnergyProfile(cfg.clients.devices[idx], cfg.model.arch,
                                                 cfg.model.s_max));
    }
  }
  return out;
}

PrivacyStage RunPrivacyStage(const ExperimentConfig& cfg) {
  PrivacyStage st;
  sim::RngStream root(cfg.seed);
  sim::FederatedData pub = MakePublicData(cfg);
  st.reference = profiler::ComputeReferenceAccuracy(cfg.model.arch, pub.clients[0], pub.test,
                                                    cfg.reference, root.derive("reference"));
  st.a_min = profiler::ComputeAMin(st.reference.accuracy, cfg.optimizer.beta);
  std::vector<double> grid = profiler::NoiseGrid(cfg.privacy.sigma_max, cfg.privacy.sigma_step);
  profiler::AttackBudget budget{cfg.privacy.samples, cfg.privacy.attack,
                                cfg.privacy.noise_family};
  st.build = profiler::BuildPrivacyLeakageTable(st.reference.model, pub.test, cfg.model.s_max,
                                                grid, budget, root.derive("privacy"),
                                                cfg.privacy.threads);
  st.tfsim = attack::FindTFsim(st.reference.model, st.build.reconstructions, cfg.data.n_class,
                               cfg.privacy.tfsim_bins);
  if (cfg.optimizer.t_fsim) {
    st.t_fsim = *cfg.optimizer.t_fsim;
    st.t_fsim_auto = false;
  } else {
    st.t_fsim = st.tfsim.threshold;
  }
  return st;
}

void WriteThresholds(std::ostream& os, const PrivacyStage& st, double beta) {
  os << "key\tvalue\n"
     << "A_ref\t" << sim::FormatDouble(st.reference.accuracy) << "\n"
     << "beta\t" << sim::FormatDouble(beta) << "\n"
     << "A_min\t" << sim::FormatDouble(st.a_min) << "\n"
     << "T_FSIM\t" << sim::FormatDouble(st.t_fsim) << "\n"
     << "T_FSIM_source\t" << (st.t_fsim_auto ? "auto" : "config") << "\n"
     << "T_FSIM_search\t" << sim::FormatDouble(st.tfsim.threshold) << "\n"
     << "T_FSIM_fallback\t" << (st.tfsim.fallback ? 1 : 0) << "\n";
  os << "# cohort\tfsim_lo\tfsim_hi\tcount\taccuracy\tqualifies\n";
  for (std::size_t i = 0; i < st.tfsim.cohorts.size(); ++i) {
    const attack::Cohort& c = st.tfsim.cohorts[i];
    os << "cohort\t" << sim::FormatDouble(c.fsim_lo) << '\t' << sim::FormatDouble(c.fsim_hi)
       << '\t' << c.count << '\t' << sim::FormatDouble(c.accuracy) << '\t'
       << (c.qualifies ? 1 : 0) << "\n";
  }
}

Thresholds ReadThresholds(std::istream& is) {
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> t = SplitTabs(line);
    if (t.size() == 2) kv[t[0]] = t[1];
  }
  auto get = [&](const char* key) {
    auto it = kv.find(key);
    if (it == kv.end()) throw ArgumentError(std::string("thresholds: missing ") + key);
    return sim::ParseDouble(it->second);
  };
  Thresholds th;
  th.a_ref = get("A_ref");
  th.beta = get("beta");
  th.a_min = get("A_min");
  th.t_fsim = get("T_FSIM");
  return th;
}

bilevel::CampaignSetup MakeCampaignSetup(const ExperimentConfig& cfg,
                                         const sim::FederatedData& data,
                                         const std::vector<sim::EnergyPowerProfile>& profiles,
                                         int epochs) {
  bilevel::CampaignSetup setup;
  setup.arch = cfg.model.arch;
  setup.s_max = cfg.model.s_max;
  for (int i = 0; i < cfg.clients.n; ++i) {
    auto idx = static_cast<std::size_t>(i);
    setup.clients.push_back({i, cfg.clients.alpha[idx], data.clients[idx], profiles[idx]});
  }
  setup.test = data.test;
  setup.training = cfg.training.protocol;
  setup.epochs = epochs;
  setup.schedule = cfg.clients.schedule;
  return setup;
}

bilevel::OptimizeResult RunOptimizeStage(const ExperimentConfig& cfg,
                                         const sim::FederatedData& data,
                                         const std::vector<sim::EnergyPowerProfile>& profiles,
                                         const profiler::PrivacyLeakageTable& plt,
                                         const Thresholds& th) {
  std::vector<bilevel::ClientProfile> roster;
  for (int i = 0; i < cfg.clients.n; ++i) {
    auto idx = static_cast<std::size_t>(i);
    roster.push_back({i, cfg.clients.alpha[idx], profiles[idx]});
  }
  bilevel::OptimizerConfig oc;
  oc.beta = th.beta;
  oc.a_ref = th.a_ref;
  oc.t_fsim = th.t_fsim;
  oc.max_rounds = cfg.optimizer.max_rounds;
  oc.sigma_floor = cfg.optimizer.sigma_floor;
  bilevel::SplitLearningProbe probe(
      MakeCampaignSetup(cfg, data, profiles, cfg.optimizer.probe_epochs), cfg.seed);
  return bilevel::Optimize(roster, plt, oc,
                           [&probe](const std::vector<bilevel::SplitDecision>& d, int round) {
                             return probe(d, round);
                           });
}

bilevel::CampaignResult RunTrainStage(const ExperimentConfig& cfg,
                                      const sim::FederatedData& data,
                                      const std::vector<sim::EnergyPowerProfile>& profiles,
                                      const std::vector<bilevel::SplitDecision>& decisions) {
  sim::RngStream root(cfg.seed);
  return bilevel::RunCampaign(MakeCampaignSetup(cfg, data, profiles, cfg.training.epochs),
                              decisions, root.derive("train-init"), root.derive("train"));
}

void WriteAssignment(std::ostream& os, const std::vector<bilevel::SplitDecision>& decisions,
                     const std::vector<double>& alpha) {
  os << "client\talpha\ts\tsigma\tfsim\tenergy_norm\tobjective\tp_peak\tp_max\tlo\thi\n";
  for (const auto& d : decisions) {
    double a = static_cast<std::size_t>(d.client_id) < alpha.size()
                   ? alpha[static_cast<std::size_t>(d.client_id)]
                   : 0.0;
    os << d.client_id << '\t' << sim::FormatDouble(a) << '\t' << d.split_point << '\t'
       << sim::FormatDouble(d.sigma) << '\t' << sim::FormatDouble(d.fsim) << '\t'
       << sim::FormatDouble(d.energy_norm) << '\t' << sim::FormatDouble(d.objective) << '\t'
       << sim::FormatDouble(d.p_peak) << '\t' << sim::FormatDouble(d.p_max) << '\t'
       << d.range.lo << '\t' << d.range.hi << '\n';
  }
}

std::vector<bilevel::SplitDecision> ReadAssignment(std::istream& is) {
  std::vector<bilevel::SplitDecision> out;
  std::vector<std::string> cols;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> t = SplitTabs(line);
    if (cols.empty()) {
      cols = t;
      for (const char* need : {"client", "s", "sigma", "fsim"}) {
        if (std::find(cols.begin(), cols.end(), need) == cols.end()) {
          throw ArgumentError(std::string("assignment: missing column ") + need);
        }
      }
      continue;
    }
    if (t.size() != cols.size()) throw ArgumentError("assignment: ragged row '" + line + "'");
    bilevel::SplitDecision d;
    for (std::size_t i = 0; i < cols.size(); ++i) {
      const std::string& c = cols[i];
      if (c == "client") d.client_id = std::stoi(t[i]);
      else if (c == "s") d.split_point = std::stoi(t[i]);
      else if (c == "sigma") d.sigma = sim::ParseDouble(t[i]);
      else if (c == "fsim") d.fsim = sim::ParseDouble(t[i]);
      else if (c == "energy_norm") d.energy_norm = sim::ParseDouble(t[i]);
      else if (c == "objective") d.objective = sim::ParseDouble(t[i]);
      else if (c == "p_peak") d.p_peak = sim::ParseDouble(t[i]);
      else if (c == "p_max") d.p_max = sim::ParseDouble(t[i]);
      else if (c == "lo") d.range.lo = std::stoi(t[i]);
      else if (c == "hi") d.range.hi = std::stoi(t[i]);
    }
    out.push_back(d);
  }
  if (out.empty()) throw ArgumentError("assignment: no rows");
  return out;
}

Summary Summarize(const std::vector<bilevel::SplitDecision>& decisions,
                  const protocol::TrainingRecord& record) {
  Summary s;
  s.accuracy = record.final_accuracy();
  s.clients = static_cast<int>(decisions.size());
  s.epochs = static_cast<int>(record.epochs.size());
  for (const auto& d : decisions) s.fsim_total += d.fsim;
  s.client_energy.assign(decisions.size(), 0.0);
  double total = 0.0;
  for (const protocol::EpochRecord& e : record.epochs) {
    for (const protocol::ClientEpochEnergy& c : e.clients) {
      total += c.total();
      for (std::size_t i = 0; i < decisions.size(); ++i) {
        if (decisions[i].client_id == c.client_id) s.client_energy[i] += c.total();
      }
    }
  }
  if (s.epochs > 0) {
    s.mean_epoch_energy = total / s.epochs;
    for (double& e : s.client_energy) e /= s.epochs;
  }
  return s;
}

ScalingRow RunScalingPoint(const ExperimentConfig& base, int n,
                           const profiler::PrivacyLeakageTable& plt, const Thresholds& th) {
  if (n < 1) throw ConfigError("field 'scaling.counts': entries must be >= 1");
  ExperimentConfig cfg = base;
  std::size_t total = base.data.samples_per_client * static_cast<std::size_t>(base.clients.n);
  cfg.data.samples_per_client = std::max<std::size_t>(1, total / static_cast<std::size_t>(n));
  cfg.clients.n = n;
  cfg.clients.alpha.clear();
  cfg.clients.devices.clear();
  cfg.clients.profile_files.clear();
  cfg.clients.schedule.reset();
  for (int i = 0; i < n; ++i) {
    std::size_t src = static_cast<std::size_t>(i % base.clients.n);
    cfg.clients.alpha.push_back(base.clients.alpha[src]);
    cfg.clients.devices.push_back(base.clients.devices[src]);
    if (!base.clients.profile_files.empty()) {
      cfg.clients.profile_files.push_back(base.clients.profile_files[src]);
    }
  }
  sim::FederatedData data = MakeClientData(cfg);
  std::vector<sim::EnergyPowerProfile> profiles = MakeProfiles(cfg);
  bilevel::OptimizeResult opt = RunOptimizeStage(cfg, data, profiles, plt, th);
  bilevel::CampaignResult trained = RunTrainStage(cfg, data, profiles, opt.decisions);
  ScalingRow row;
  row.n = n;
  row.accuracy = trained.record.final_accuracy();
  for (const auto& d : opt.decisions) row.fsim_total += d.fsim;
  row.a_min = opt.a_min;
  row.rounds = opt.rounds;
  row.converged = opt.converged;
  return row;
}

std::vector<attack::MiaResult> RunMiaStage(const ExperimentConfig& cfg) {
  sim::DatasetOptions opts = cfg.data;
  opts.n_clients = 4;
  opts.iid = true;
  opts.samples_per_client = cfg.mia.members;
  opts.pixel_noise = cfg.mia.pixel_noise;
  opts.test_samples = 1;
  sim::RngStream root(cfg.seed);
  sim::RngStream data_rng = root.derive("mia-data");
  sim::FederatedData fd = sim::MakeSyntheticDataset(opts, data_rng);
  attack::MiaPools pools{fd.clients[0], fd.clients[1], fd.clients[2], fd.clients[3]};

  auto options_for = [&](const MiaCase& c) {
    attack::MiaOptions o;
    o.arch = cfg.model.arch;
    o.split_point = cfg.mia.split_point;
    o.s_max = cfg.model.s_max;
    o.n_clients = cfg.mia.n_clients;
    o.shadow_stage_epochs = c.shadow_stage;
    o.target_stage_epochs = c.target_stage;
    o.l2_lambda = c.l2_lambda;
    o.training = cfg.training.protocol;
    return o;
  };
  std::vector<attack::MiaResult> out;
  for (std::size_t i = 0; i < cfg.mia.cases.size(); ++i) {
    out.push_back(attack::MiaAttack(pools, options_for(cfg.mia.cases[i]), root.path("mia", i)));
  }
  if (cfg.mia.null_test) {
    attack::MiaOptions o = options_for(cfg.mia.cases.front());
    o.shuffle_membership = true;
    out.push_back(attack::MiaAttack(pools, o, root.derive("mia-null")));
  }
  return out;
}

// ---- dispatch -------------------------------------------------------------

int RunCli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Desk-scale split learning privacy/energy simulator", "splitsim"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "Experiment config (JSON)")->check(CLI::ExistingFile);
  CLI::Option* seed_opt = app.add_option("--seed", seed, "Override the config seed");
  app.add_option("--out", out_dir, "Output directory")->capture_default_str();
  app.add_option("--override", overrides, "key.path=value, applied in order")
      ->allow_extra_args(false)
      ->take_all();

  CLI::App* profile = app.add_subcommand("profile", "Build profiling tables");
  profile->require_subcommand(1);
  CLI::App* p_privacy = profile->add_subcommand("privacy", "Privacy leakage table and thresholds");
  CLI::App* p_energy = profile->add_subcommand("energy", "Per-client energy/power tables");
  CLI::App* optimize = app.add_subcommand("optimize", "Bi-level split/noise search");
  CLI::App* train = app.add_subcommand("train", "Train with the optimized assignment");
  CLI::App* attack_cmd = app.add_subcommand("attack", "Run an attack");
  attack_cmd->require_subcommand(1);
  CLI::App* a_recon = attack_cmd->add_subcommand("reconstruct", "Model inversion sweep");
  CLI::App* a_mia = attack_cmd->add_subcommand("mia", "Membership inference cases");
  CLI::App* report = app.add_subcommand("report", "Summarize assignment and training record");
  CLI::App* scaling = app.add_subcommand("scaling", "Optimize and train per client count");
  CLI::App* print_config = app.add_subcommand("print-config", "Print the resolved config");
  CLI::App* export_data = app.add_subcommand("export-data", "Dump the synthetic dataset");
  for (CLI::App* sub : {profile, attack_cmd}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  try {
    std::optional<std::string> cfg_path;
    if (!config_path.empty()) cfg_path = config_path;
    std::optional<std::uint64_t> seed_override;
    if (seed_opt->count() > 0) seed_override = seed;
    RunContext ctx = LoadContext(cfg_path, seed_override, overrides, out_dir);

    if (print_config->parsed()) {
      out << ctx.resolved.dump(2) << "\n";
    } else if (p_privacy->parsed()) {
      CmdProfilePrivacy(ctx, out);
    } else if (p_energy->parsed()) {
      CmdProfileEnergy(ctx, out);
    } else if (optimize->parsed()) {
      CmdOptimize(ctx, out);
    } else if (train->parsed()) {
      CmdTrain(ctx, out);
    } else if (a_recon->parsed()) {
      CmdReconstruct(ctx, out);
    } else if (a_mia->parsed()) {
      CmdMia(ctx, out);
    } else if (report->parsed()) {
      CmdReport(ctx, out);
    } else if (scaling->parsed()) {
      CmdScaling(ctx, out);
    } else if (export_data->parsed()) {
      CmdExportData(ctx, out);
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DependencyError& e) {
    err << "dependency error: " << e.what() << "\n";
    return 3;
  } catch (const InfeasibleClientError& e) {
    err << "infeasible client: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace splitsim::cli
