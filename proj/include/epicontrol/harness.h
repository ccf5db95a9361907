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

#ifndef EPICONTROL_HARNESS_H_
#define EPICONTROL_HARNESS_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "epicontrol/checkpoint.h"
#include "epicontrol/metrics.h"
#include "epicontrol/policy.h"
#include "epicontrol/ppo.h"
#include "epicontrol/world_config.h"

namespace epicontrol {

struct ScenarioPreset {
  std::string name;
  int n_areas = 11;
  int population = 10000;
  int t_start = 1;
  bool changeable_mobility = false;
};

const std::vector<ScenarioPreset>& scenario_presets();
// Throws ConfigError listing the valid names.
const ScenarioPreset& find_scenario(const std::string& name);

WorldConfig world_for(const ScenarioPreset& preset);

enum class Ablation { kNoGraph, kNoGuard };
Ablation parse_ablation(const std::string& name);
std::string ablation_name(Ablation a);
void apply_ablation(TrainConfig& cfg, Ablation a);

// Everything a subcommand needs; reproducible from the config file and seeds.
struct RunSetup {
  std::string scenario = "default";
  WorldConfig world;
  TrainConfig train;
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  std::vector<Ablation> ablations;
  std::filesystem::path out_dir = "out";
};

// Scenario preset, then config file keys, then the population override.
// Unknown keys in the file are a ConfigError.
RunSetup make_setup(const std::string& scenario, const std::optional<std::filesystem::path>& config,
                    std::optional<int> population_override);

std::vector<std::uint64_t> parse_seeds(const std::string& list);

// Comment lines naming the subcommand, scenario, seeds and full config.
std::vector<std::string> provenance_header(const std::string& command, const RunSetup& setup);

struct ComparisonRow {
  std::string method;
  MetricsMean mean;
};

void write_comparison_csv(std::ostream& out, const std::vector<ComparisonRow>& rows,
                          const std::vector<std::string>& header_comments = {});

struct BaselineEpisode {
  EpisodeMetrics metrics;
  int days_simulated = 0;
};

// One full-horizon episode with a rule-based policy.
BaselineEpisode run_baseline_episode(const WorldConfig& world_cfg, const Baseline& baseline,
                                     int risk_lookback_days);

// Runs each baseline on each seed. Writes comparison.csv, episodes.jsonl and
// one daily_<method>_seed<s>.csv per episode into setup.out_dir.
std::vector<ComparisonRow> run_baseline(const RunSetup& setup,
                                        const std::vector<std::string>& baselines);

// Trains with setup.seeds.front(); writes model.ckpt (+ manifest, best
// evaluation Score), training_curve.csv and train_diagnostics.csv.
TrainResult run_train(const RunSetup& setup);

// Evaluates a checkpoint on every seed. Never writes to the checkpoint.
ComparisonRow run_eval(const RunSetup& setup, const std::filesystem::path& checkpoint,
                       const std::string& method = "learned");

// Trains the full model and each requested ablation with the same seed and
// budget, then evaluates all of them on setup.seeds.
std::vector<ComparisonRow> run_ablate(const RunSetup& setup);

// Per-day infection probabilities under a rule-based policy: risk.csv with
// rows day,individual_id,p_infe.
void run_dump_risk(const RunSetup& setup, const std::string& baseline);

// Per-day thresholds and chosen actions of a learned policy (random
// initialization when no checkpoint is given): actions.csv.
void run_dump_actions(const RunSetup& setup, const std::optional<std::filesystem::path>& checkpoint);

}  // namespace epicontrol

#endif  // EPICONTROL_HARNESS_H_
