// Copyright 2026 The Epicontrol Authors
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

#include "epicontrol/harness.h"

#include <cctype>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "epicontrol/errors.h"
#include "epicontrol/observation.h"
#include "epicontrol/risk_model.h"
#include "epicontrol/world.h"

namespace epicontrol {
namespace {

std::string file_tag(const std::string& method) {
  std::string out;
  for (char c : method) {
    out += std::isalnum(static_cast<unsigned char>(c)) || c == '.' ? c : '_';
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("out", fmt::format("cannot write {}", path.string()));
  return out;
}

void prepare_out_dir(const RunSetup& setup) {
  std::error_code ec;
  std::filesystem::create_directories(setup.out_dir, ec);
  if (ec) {
    throw ConfigError("out", fmt::format("cannot create {}: {}", setup.out_dir.string(),
                                         ec.message()));
  }
}

void append_lines(std::vector<std::string>& dst, const std::string& block, const std::string& prefix) {
  std::stringstream ss(block);
  std::string line;
  while (std::getline(ss, line)) dst.push_back(prefix + line);
}

std::string join_seeds(const std::vector<std::uint64_t>& seeds) {
  std::string out;
  for (std::size_t i = 0; i < seeds.size(); ++i) out += (i ? "," : "") + std::to_string(seeds[i]);
  return out;
}

EpisodeSummary summarize(const std::string& scenario, std::uint64_t seed,
                         const EpisodeMetrics& m, int days, bool guard) {
  return {scenario, seed, m.infections(), m.cost(), m.score(), days, guard};
}

ComparisonRow evaluate_rows(const RunSetup& setup, const GnnParams& params,
                            const std::string& method, const std::string& command,
                            std::ofstream& jsonl) {
  std::vector<EpisodeSummary> eps;
  for (std::uint64_t seed : setup.seeds) {
    WorldConfig wc = setup.world;
    wc.rng_seed = seed;
    const EvalResult r = evaluate_policy(wc, params, setup.train);
    auto hdr = provenance_header(command, setup);
    hdr.push_back(fmt::format("method: {}", method));
    hdr.push_back(fmt::format("episode_seed: {}", seed));
    std::ofstream daily =
        open_out(setup.out_dir / fmt::format("daily_{}_seed{}.csv", file_tag(method), seed));
    write_daily_csv(daily, r.metrics, hdr);
    eps.push_back(summarize(setup.scenario, seed, r.metrics,
                            static_cast<int>(r.metrics.days().size()), false));
    jsonl << summary_json(eps.back()) << "\n";
  }
  return {method, mean_over(eps)};
}

Checkpoint make_checkpoint(const RunSetup& setup, const TrainConfig& cfg, const GnnParams& params) {
  Checkpoint ckpt;
  ckpt.meta.shape = cfg.network;
  ckpt.meta.seed = setup.seeds.front();
  ckpt.meta.population = setup.world.population;
  ckpt.meta.n_areas = setup.world.n_areas;
  ckpt.params = params;
  return ckpt;
}

void write_diagnostics_csv(const std::filesystem::path& path, const TrainResult& r,
                           const std::vector<std::string>& header) {
  std::ofstream out = open_out(path);
  for (const auto& c : header) out << "# " << c << "\n";
  out << "update_index,policy_loss,value_loss,entropy,grad_norm,approx_kl,clip_fraction,"
         "first_epoch_ratio_deviation,optimizer_steps\n";
  for (std::size_t k = 0; k < r.diagnostics.size(); ++k) {
    const UpdateDiagnostics& d = r.diagnostics[k];
    out << fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{}\n", k + 1,
                       d.policy_loss, d.value_loss, d.entropy, d.grad_norm, d.approx_kl,
                       d.clip_fraction, d.first_epoch_ratio_deviation, d.optimizer_steps);
  }
}

TrainResult train_variant(const RunSetup& setup, const TrainConfig& cfg, const std::string& tag,
                          const std::string& command) {
  if (setup.seeds.empty()) throw ConfigError("seeds", "at least one seed is required");
  TrainResult r = train(setup.world, cfg, setup.seeds.front());
  RunSetup shown = setup;
  shown.train = cfg;
  auto hdr = provenance_header(command, shown);
  hdr.push_back(fmt::format("train_seed: {}", setup.seeds.front()));
  hdr.push_back(fmt::format("best_eval_score: {:.17g}", r.best_score));
  const std::string suffix = tag.empty() ? "" : "_" + tag;
  std::ofstream curve = open_out(setup.out_dir / fmt::format("training_curve{}.csv", suffix));
  write_curve_csv(curve, r.curve, hdr);
  write_diagnostics_csv(setup.out_dir / fmt::format("train_diagnostics{}.csv", suffix), r, hdr);
  save_checkpoint(setup.out_dir / fmt::format("model{}.ckpt", suffix),
                  make_checkpoint(setup, cfg, r.best));
  return r;
}

}  // namespace

const std::vector<ScenarioPreset>& scenario_presets() {
  static const std::vector<ScenarioPreset> presets = {
      {"default", 11, 10000, 1, false},
      {"larger", 98, 10000, 1, false},
      {"changeable", 11, 10000, 1, true},
      {"late", 11, 10000, 5, false},
  };
  return presets;
}

const ScenarioPreset& find_scenario(const std::string& name) {
  std::string valid;
  for (const auto& p : scenario_presets()) {
    if (p.name == name) return p;
    valid += (valid.empty() ? "" : ", ") + p.name;
  }
  throw ConfigError("scenario", fmt::format("unknown scenario '{}' (valid: {})", name, valid));
}

WorldConfig world_for(const ScenarioPreset& preset) {
  WorldConfig w;
  w.n_areas = preset.n_areas;
  w.population = preset.population;
  w.t_start = preset.t_start;
  w.changeable_mobility = preset.changeable_mobility;
  if (preset.changeable_mobility) w.commercial_visit_prob = 0.8;
  return w;
}

Ablation parse_ablation(const std::string& name) {
  if (name == "no_graph") return Ablation::kNoGraph;
  if (name == "no_guard") return Ablation::kNoGuard;
  throw ConfigError("ablation", fmt::format("unknown ablation '{}' (valid: no_graph, no_guard)", name));
}

std::string ablation_name(Ablation a) { return a == Ablation::kNoGraph ? "no_graph" : "no_guard"; }

void apply_ablation(TrainConfig& cfg, Ablation a) {
  if (a == Ablation::kNoGraph) cfg.network.trunk = TrunkKind::kMlp;
  if (a == Ablation::kNoGuard) cfg.guard_enabled = false;
}

RunSetup make_setup(const std::string& scenario, const std::optional<std::filesystem::path>& config,
                    std::optional<int> population_override) {
  RunSetup s;
  s.scenario = scenario;
  s.world = world_for(find_scenario(scenario));
  if (config) {
    for (const auto& [key, value] : read_key_values(*config)) {
      if (!apply_world_key(s.world, key, value) && !apply_train_key(s.train, key, value)) {
        throw ConfigError(key, fmt::format("unknown key in {}", config->string()));
      }
    }
  }
  if (population_override) s.world.population = *population_override;
  s.world.validate();
  s.train.validate();
  return s;
}

std::vector<std::uint64_t> parse_seeds(const std::string& list) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) seeds.push_back(parse_u64_field("seeds", item));
  if (seeds.empty()) throw ConfigError("seeds", "expected a comma-separated list");
  return seeds;
}

std::vector<std::string> provenance_header(const std::string& command, const RunSetup& setup) {
  std::vector<std::string> out;
  out.push_back(fmt::format("command: {}", command));
  out.push_back(fmt::format("scenario: {}", setup.scenario));
  out.push_back(fmt::format("seeds: {}", join_seeds(setup.seeds)));
  std::string abl;
  for (Ablation a : setup.ablations) abl += (abl.empty() ? "" : ",") + ablation_name(a);
  if (!abl.empty()) out.push_back(fmt::format("ablations: {}", abl));
  append_lines(out, to_key_values(setup.world), "world.");
  append_lines(out, to_key_values(setup.train), "train.");
  return out;
}

void write_comparison_csv(std::ostream& out, const std::vector<ComparisonRow>& rows,
                          const std::vector<std::string>& header_comments) {
  for (const auto& c : header_comments) out << "# " << c << "\n";
  out << "method,I,Q,score,score_exact,episodes\n";
  for (const auto& r : rows) {
    out << fmt::format("{},{:.2f},{:.2f},{},{:.17g},{}\n", r.method, r.mean.infections,
                       r.mean.cost, format_score(r.mean.score), r.mean.score, r.mean.episodes);
  }
}

BaselineEpisode run_baseline_episode(const WorldConfig& world_cfg, const Baseline& baseline,
                                     int risk_lookback_days) {
  WorldState world = build_world(world_cfg);
  const RiskConfig risk{risk_lookback_days, world_cfg.p_s, world_cfg.p_c};
  BaselineEpisode ep;
  const std::vector<Action> idle(world.population(), Action::kNoIntervention);
  while (!world.finished()) {
    DayOutcome out;
    if (world.intervention_active()) {
      const Observation obs = observe(world);
      const RiskVector r = baseline.kind == BaselineKind::kExpert ? estimate_risk(obs, risk)
                                                                 : RiskVector{};
      out = step_day(world, baseline_actions(baseline, obs, r, world_cfg.rng_seed));
    } else {
      out = step_day(world, idle);
    }
    ep.metrics.accumulate_day(counts_from(out));
    ++ep.days_simulated;
  }
  return ep;
}

std::vector<ComparisonRow> run_baseline(const RunSetup& setup,
                                        const std::vector<std::string>& baselines) {
  prepare_out_dir(setup);
  std::vector<Baseline> parsed;
  for (const auto& name : baselines) parsed.push_back(Baseline::parse(name));
  std::ofstream jsonl = open_out(setup.out_dir / "episodes.jsonl");
  std::vector<ComparisonRow> rows;
  for (const Baseline& b : parsed) {
    std::vector<EpisodeSummary> eps;
    for (std::uint64_t seed : setup.seeds) {
      WorldConfig wc = setup.world;
      wc.rng_seed = seed;
      const BaselineEpisode ep = run_baseline_episode(wc, b, setup.train.risk_lookback_days);
      auto hdr = provenance_header("baseline", setup);
      hdr.push_back(fmt::format("method: {}", b.name()));
      hdr.push_back(fmt::format("episode_seed: {}", seed));
      std::ofstream daily =
          open_out(setup.out_dir / fmt::format("daily_{}_seed{}.csv", file_tag(b.name()), seed));
      write_daily_csv(daily, ep.metrics, hdr);
      eps.push_back(summarize(setup.scenario, seed, ep.metrics, ep.days_simulated, false));
      jsonl << summary_json(eps.back()) << "\n";
    }
    rows.push_back({b.name(), mean_over(eps)});
  }
  std::ofstream table = open_out(setup.out_dir / "comparison.csv");
  write_comparison_csv(table, rows, provenance_header("baseline", setup));
  return rows;
}

TrainResult run_train(const RunSetup& setup) {
  prepare_out_dir(setup);
  TrainConfig cfg = setup.train;
  for (Ablation a : setup.ablations) apply_ablation(cfg, a);
  return train_variant(setup, cfg, "", "train");
}

ComparisonRow run_eval(const RunSetup& setup, const std::filesystem::path& checkpoint,
                       const std::string& method) {
  const Checkpoint ckpt = load_checkpoint(checkpoint);
  check_compatible(ckpt.meta, setup.world.population, setup.world.n_areas,
                   setup.train.network.layers);
  prepare_out_dir(setup);
  std::ofstream jsonl = open_out(setup.out_dir / "episodes.jsonl");
  ComparisonRow row = evaluate_rows(setup, ckpt.params, method, "eval", jsonl);
  auto hdr = provenance_header("eval", setup);
  hdr.push_back(fmt::format("checkpoint: {}", checkpoint.filename().string()));
  std::ofstream table = open_out(setup.out_dir / "comparison.csv");
  write_comparison_csv(table, {row}, hdr);
  return row;
}

std::vector<ComparisonRow> run_ablate(const RunSetup& setup) {
  prepare_out_dir(setup);
  std::vector<Ablation> variants = setup.ablations;
  if (variants.empty()) variants = {Ablation::kNoGraph, Ablation::kNoGuard};
  std::ofstream jsonl = open_out(setup.out_dir / "episodes.jsonl");
  std::vector<ComparisonRow> rows;
  const TrainResult full = train_variant(setup, setup.train, "full", "ablate");
  rows.push_back(evaluate_rows(setup, full.best, "full", "ablate", jsonl));
  for (Ablation a : variants) {
    TrainConfig cfg = setup.train;
    apply_ablation(cfg, a);
    const TrainResult r = train_variant(setup, cfg, ablation_name(a), "ablate");
    rows.push_back(evaluate_rows(setup, r.best, ablation_name(a), "ablate", jsonl));
  }
  std::ofstream table = open_out(setup.out_dir / "comparison.csv");
  write_comparison_csv(table, rows, provenance_header("ablate", setup));
  return rows;
}

void run_dump_risk(const RunSetup& setup, const std::string& baseline) {
  prepare_out_dir(setup);
  const Baseline b = Baseline::parse(baseline);
  const RiskConfig risk{setup.train.risk_lookback_days, setup.world.p_s, setup.world.p_c};
  std::ofstream out = open_out(setup.out_dir / "risk.csv");
  auto hdr = provenance_header("dump-risk", setup);
  hdr.push_back(fmt::format("method: {}", b.name()));
  for (const auto& c : hdr) out << "# " << c << "\n";
  out << "seed,day,individual_id,p_infe,infected\n";
  for (std::uint64_t seed : setup.seeds) {
    WorldConfig wc = setup.world;
    wc.rng_seed = seed;
    WorldState world = build_world(wc);
    while (!world.finished()) {
      const Observation obs = observe(world);
      const RiskVector r = estimate_risk(obs, risk);
      for (int i = 0; i < world.population(); ++i) {
        out << fmt::format("{},{},{},{:.9g},{}\n", seed, world.day, i, r.p_infe[i],
                           world.individuals[i].health.infected() ? 1 : 0);
      }
      std::vector<Action> actions(world.population(), Action::kNoIntervention);
      if (world.intervention_active()) actions = baseline_actions(b, obs, r, seed);
      step_day(world, actions);
    }
  }
}

void run_dump_actions(const RunSetup& setup,
                      const std::optional<std::filesystem::path>& checkpoint) {
  GnnParams params;
  if (checkpoint) {
    const Checkpoint ckpt = load_checkpoint(*checkpoint);
    check_compatible(ckpt.meta, setup.world.population, setup.world.n_areas,
                     setup.train.network.layers);
    params = ckpt.params;
  } else {
    params = init_params(setup.seeds.front(), setup.train.network);
  }
  prepare_out_dir(setup);
  const RiskConfig risk = risk_config_for(setup.world, setup.train);
  std::ofstream out = open_out(setup.out_dir / "actions.csv");
  auto hdr = provenance_header("dump-actions", setup);
  hdr.push_back(checkpoint ? fmt::format("checkpoint: {}", checkpoint->filename().string())
                           : std::string("checkpoint: none (random initialization)"));
  for (const auto& c : hdr) out << "# " << c << "\n";
  out << "seed,day,individual_id,p_infe,P1,P2,P3,action\n";
  for (std::uint64_t seed : setup.seeds) {
    WorldConfig wc = setup.world;
    wc.rng_seed = seed;
    WorldState world = build_world(wc);
    const std::vector<Action> idle(world.population(), Action::kNoIntervention);
    while (!world.finished()) {
      if (!world.intervention_active()) {
        step_day(world, idle);
        continue;
      }
      const PolicyStep ps = policy_step(world, params, risk);
      for (int i = 0; i < world.population(); ++i) {
        const auto t = ps.thresholds.thresholds.row(i);
        out << fmt::format("{},{},{},{:.9g},{:.9g},{:.9g},{:.9g},{}\n", seed, world.day, i,
                           ps.risk.p_infe[i], t[0], t[1], t[2],
                           action_name(ps.decision.actions[i]));
      }
      step_day(world, ps.decision.actions);
    }
  }
}

}  // namespace epicontrol
