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

// Command-line entry point for scenario runs, training and evaluation.
//
// Exit codes: 0 success, 2 usage or configuration error, 3 numeric failure,
// 1 internal error.

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "epicontrol/errors.h"
#include "epicontrol/harness.h"
#include "epicontrol/policy.h"

namespace {

using namespace epicontrol;

struct CommonFlags {
  std::string scenario = "default";
  std::string seeds = "1,2,3";
  std::string config;
  std::string out = "out";
  std::vector<std::string> ablations;
  int population = 0;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--scenario", f.scenario, "default, larger, changeable or late")
      ->capture_default_str();
  cmd->add_option("--seeds", f.seeds, "comma-separated seed list")->capture_default_str();
  cmd->add_option("--config", f.config, "key = value file overriding world and training settings");
  cmd->add_option("--out", f.out, "output directory")->capture_default_str();
  cmd->add_option("--ablation", f.ablations, "no_graph or no_guard (repeatable)");
  cmd->add_option("--population-override", f.population, "replace the scenario population")
      ->check(CLI::PositiveNumber);
}

RunSetup setup_from(const CommonFlags& f) {
  std::optional<std::filesystem::path> config;
  if (!f.config.empty()) config = f.config;
  std::optional<int> population;
  if (f.population > 0) population = f.population;
  RunSetup s = make_setup(f.scenario, config, population);
  s.seeds = parse_seeds(f.seeds);
  for (const auto& a : f.ablations) s.ablations.push_back(parse_ablation(a));
  s.out_dir = f.out;
  return s;
}

void print_rows(const std::vector<ComparisonRow>& rows) {
  fmt::print("{:<16} {:>10} {:>14} {:>10}\n", "method", "I", "Q", "score");
  for (const auto& r : rows) {
    fmt::print("{:<16} {:>10.2f} {:>14.2f} {:>10}\n", r.method, r.mean.infections, r.mean.cost,
               format_score(r.mean.score));
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Epidemic intervention simulator and policy trainer"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::vector<std::string> baselines;
  std::string checkpoint;
  std::string risk_policy = "no_intervention";

  auto* baseline = app.add_subcommand("baseline", "run rule-based policies over seeds");
  add_common(baseline, flags);
  baseline->add_option("--baseline", baselines, "policy name (repeatable; default: all)");

  auto* train_cmd = app.add_subcommand("train", "train a policy and save its best checkpoint");
  add_common(train_cmd, flags);

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint over seeds");
  add_common(eval, flags);
  eval->add_option("--checkpoint", checkpoint, "checkpoint file")->required();

  auto* ablate = app.add_subcommand("ablate", "train the full model and its ablations, compare");
  add_common(ablate, flags);

  auto* dump_risk = app.add_subcommand("dump-risk", "write daily infection probabilities");
  add_common(dump_risk, flags);
  dump_risk->add_option("--baseline", risk_policy, "policy driving the episode")
      ->capture_default_str();

  auto* dump_actions = app.add_subcommand("dump-actions", "write daily thresholds and actions");
  add_common(dump_actions, flags);
  dump_actions->add_option("--checkpoint", checkpoint, "checkpoint file (default: random init)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const RunSetup setup = setup_from(flags);
    if (baseline->parsed()) {
      print_rows(run_baseline(setup, baselines.empty() ? baseline_names() : baselines));
    } else if (train_cmd->parsed()) {
      const TrainResult r = run_train(setup);
      fmt::print("updates {}  env days {}  best eval score {}\n", r.updates, r.env_days_consumed,
                 format_score(r.best_score));
    } else if (eval->parsed()) {
      print_rows({run_eval(setup, checkpoint)});
    } else if (ablate->parsed()) {
      print_rows(run_ablate(setup));
    } else if (dump_risk->parsed()) {
      run_dump_risk(setup, risk_policy);
    } else if (dump_actions->parsed()) {
      std::optional<std::filesystem::path> ckpt;
      if (!checkpoint.empty()) ckpt = checkpoint;
      run_dump_actions(setup, ckpt);
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 1;
  }
  return 0;
}
