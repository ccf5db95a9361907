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

// Acceptance run: one PASS/FAIL line per criterion. With arguments, only
// the listed criterion numbers are run.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "epicontrol/contact_gnn.h"
#include "epicontrol/harness.h"
#include "epicontrol/metrics.h"
#include "epicontrol/policy.h"
#include "epicontrol/ppo.h"
#include "epicontrol/risk_model.h"
#include "epicontrol/world.h"
#include "support/oracles.h"
#include "support/scratch_dir.h"

using namespace epicontrol;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// (I, Q, printed Score); a printed Score of 0 stands for ">10000".
struct TableRow {
  double i, q, printed;
};

const std::vector<TableRow>& table_rows() {
  static const std::vector<TableRow> rows = {
      // Main comparison, three scenarios.
      {8289, 123153.00, 0}, {6588, 92563.00, 0}, {8115, 113596.00, 0},
      {58, 294460.50, 0}, {56, 294508.50, 0}, {55, 294491.50, 0},
      {276, 6997.50, 3.75}, {204, 9187.50, 4.01}, {294, 7837.00, 3.99},
      {319, 8210.00, 4.16}, {269, 8404.50, 4.03}, {328, 8724.50, 4.32},
      {1108, 212940.00, 0}, {1212, 211146.50, 0}, {943, 212498.00, 0},
      {3557, 120731.00, 0}, {2302, 92569.50, 0}, {3133, 119958.50, 0},
      {210, 6408.21, 3.42}, {177, 4794.87, 3.04}, {193, 6091.76, 3.31},
      {220, 7067.01, 3.58}, {190, 5640.15, 3.22}, {205, 7899.03, 3.71},
      {187, 5689.79, 3.22}, {183, 4935.03, 3.08}, {187, 7112.14, 3.49},
      {137, 3748.58, 2.77}, {170, 4606.17, 2.99}, {153, 4068.09, 2.86},
      // Late intervention.
      {8040, 119175.00, 0}, {70, 274364.50, 0}, {340, 8985.50, 4.43},
      {323, 8388.00, 4.22}, {2091, 195949.00, 0}, {3331, 115858.00, 0},
      {304, 7808.13, 4.02}, {291, 8193.50, 4.06}, {270, 7197.86, 3.77},
      {193, 5061.64, 3.13},
  };
  return rows;
}

Verdict criterion_1() {
  const auto t0 = Clock::now();
  int finite = 0, capped = 0, bad = 0;
  double worst = 0.0;
  for (const TableRow& r : table_rows()) {
    const double s = score(r.i, r.q);
    if (r.printed == 0) {
      ++capped;
      if (format_score(s) != ">10000") ++bad;
    } else {
      ++finite;
      const double err = std::abs(s - r.printed);
      worst = std::max(worst, err);
      if (err > 0.01) ++bad;
    }
  }
  const double t = seconds_since(t0);
  return {bad == 0 && t < 1.0,
          fmt::format("{} finite scores, max |error| {:.4f}; {} capped rows; {} mismatches; {:.3f}s",
                      finite, worst, capped, bad, t)};
}

Verdict criterion_2() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(0xACCE552);
  std::uniform_int_distribution<int> look(1, 3);
  std::uniform_real_distribution<double> p(0.0, 0.5);
  double worst = 0.0;
  int people = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const auto w = epicontrol::testing::random_tiny_world(rng, 5, 2, 3);
    const RiskConfig cfg{look(rng), p(rng), p(rng)};
    const RiskVector got = estimate_risk(epicontrol::testing::make_observation(w), cfg);
    const RiskVector want = epicontrol::testing::brute_force_risk(w, cfg);
    if (got.size() != want.size()) return {false, fmt::format("size mismatch in world {}", rep)};
    for (int i = 0; i < got.size(); ++i) {
      worst = std::max(worst, std::abs(got.p_infe[i] - want.p_infe[i]));
      ++people;
    }
  }
  const double t = seconds_since(t0);
  return {worst <= 1e-12 && t < 10.0,
          fmt::format("200 worlds, {} individuals, max |diff| {:.3g}; {:.3f}s", people, worst, t)};
}

Verdict criterion_3() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(0xACCE553);
  std::normal_distribution<double> nd(0.0, 1.0);
  const NetworkShape shape{2, 3, false, TrunkKind::kContactGnn};
  double worst = 0.0;
  long long checked = 0;
  for (int rep = 0; rep < 50; ++rep) {
    const GnnParams params = epicontrol::testing::random_params(rng, shape);
    const StateFeatures f = epicontrol::testing::random_features(rng, 4, 2, shape.layers);
    Matrix r(4, 4);
    for (double& v : r.values()) v = nd(rng);
    const auto g = epicontrol::testing::finite_difference_check(params, f, r, nd(rng));
    worst = std::max(worst, g.max_rel_error);
    checked += g.checked;
  }
  const double t = seconds_since(t0);
  return {worst < 1e-4 && t < 30.0,
          fmt::format("50 instances, {} parameters, max rel error {:.3g}; {:.3f}s", checked, worst,
                      t)};
}

Verdict criterion_4() {
  const auto t0 = Clock::now();
  constexpr int kRows = 100000;
  std::mt19937_64 rng(0xACCE554);
  std::uniform_real_distribution<double> mag(-3.0, 3.0);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Matrix raw(kRows, 4);
  for (int i = 0; i < kRows; ++i) {
    const double scale = std::pow(10.0, mag(rng));
    for (int j = 0; j < 4; ++j) raw(i, j) = scale * unit(rng);
  }
  const ThresholdMatrix th = thresholds_from_values(raw);
  int violations = 0;
  double worst_sum = 0.0, worst_mass = 0.0;
  for (int i = 0; i < kRows; ++i) {
    const double p1 = th.thresholds(i, 0), p2 = th.thresholds(i, 1), p3 = th.thresholds(i, 2);
    if (!(0.0 <= p1 && p1 <= p2 && p2 <= p3 && p3 <= 1.0)) ++violations;
    double sum = 0.0;
    // Interval masses against a long-double softmax of the negated values.
    long double hi = -raw(i, 0);
    for (int j = 1; j < 4; ++j) hi = std::max(hi, static_cast<long double>(-raw(i, j)));
    long double z = 0.0L;
    for (int j = 0; j < 4; ++j) z += std::exp(static_cast<long double>(-raw(i, j)) - hi);
    for (int j = 0; j < 4; ++j) {
      sum += th.mass(i, j);
      const long double want = std::exp(static_cast<long double>(-raw(i, j)) - hi) / z;
      worst_mass = std::max(worst_mass, static_cast<double>(std::abs(th.mass(i, j) - want)));
    }
    worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
  }
  const double t = seconds_since(t0);
  return {violations == 0 && worst_sum <= 1e-9 && worst_mass <= 1e-9,
          fmt::format("{} rows, {} ordering violations, max |sum - 1| {:.3g}, max mass error "
                      "{:.3g}; {:.3f}s",
                      kRows, violations, worst_sum, worst_mass, t)};
}

Verdict criterion_5() {
  const auto t0 = Clock::now();
  constexpr int kRuns = 400;
  WorldConfig cfg;
  cfg.initial_seed_count = 1;
  long long secondary = 0;
  for (int run = 0; run < kRuns; ++run) {
    cfg.rng_seed = 50000 + run;
    WorldState w = build_world(cfg);
    int index = -1;
    for (const Individual& ind : w.individuals) {
      if (ind.health.infected()) index = ind.id;
    }
    const std::vector<Action> none(cfg.population, Action::kNoIntervention);
    // The index case stops mixing once symptomatic and hospitalized.
    while (!w.finished() && w.individuals[index].health.kind == Health::kAsymptomatic) {
      step_day(w, none);
    }
    for (const Individual& ind : w.individuals) {
      if (ind.infected_by == index) ++secondary;
    }
  }
  const double r0 = static_cast<double>(secondary) / kRuns;
  const double t = seconds_since(t0);
  return {r0 >= 2.0 && r0 <= 2.5 && t < 120.0,
          fmt::format("{} runs at M={}, mean secondary infections {:.3f}; {:.1f}s", kRuns,
                      cfg.population, r0, t)};
}

Verdict criterion_6(const fs::path& scratch) {
  const auto t0 = Clock::now();
  RunSetup s = make_setup("default", std::nullopt, std::nullopt);
  s.seeds = {1, 2, 3};
  s.out_dir = scratch / "c6";
  const auto rows = run_baseline(s, baseline_names());
  auto find = [&](const std::string& name) {
    for (const auto& r : rows) {
      if (r.method == name) return r.mean;
    }
    return MetricsMean{};
  };
  const MetricsMean none = find("no_intervention"), lock = find("lockdown"),
                    e1 = find("expert(0.01)"), e15 = find("expert(0.015)"),
                    ds = find("degree_sample"), dord = find("degree_order");
  // Lockdown bound: the smallest infection count reported for it.
  constexpr double kLockdownInfections = 58.0;
  int late_infections = 0;
  for (std::uint64_t seed : s.seeds) {
    WorldConfig wc = s.world;
    wc.rng_seed = seed;
    WorldState w = build_world(wc);
    const std::vector<Action> iso(wc.population, Action::kIsolate);
    while (!w.finished()) {
      const DayOutcome out = step_day(w, iso);
      if (out.intervention_active) late_infections += out.new_infections;
    }
  }
  std::vector<std::string> failed;
  if (!(none.score > 10000)) failed.push_back("no_intervention");
  if (!(lock.score > 10000 && lock.infections <= kLockdownInfections && late_infections == 0)) {
    failed.push_back("lockdown");
  }
  if (!(e1.score < none.score)) failed.push_back("expert(0.01)");
  for (const MetricsMean& d : {ds, dord}) {
    if (!(d.score > e1.score && d.score > e15.score)) failed.push_back("degree");
  }
  const double t = seconds_since(t0);
  if (t >= 1800.0) failed.push_back("runtime");
  std::string detail;
  for (const auto& r : rows) {
    detail += fmt::format("{} I={:.1f} S={}; ", r.method, r.mean.infections,
                          format_score(r.mean.score));
  }
  detail += fmt::format("lockdown infections after start {}", late_infections);
  for (const auto& f : failed) detail += "; failed: " + f;
  return {failed.empty(), fmt::format("{}; {:.1f}s", detail, t)};
}

struct SmokeRun {
  TrainResult result;
  EvalSummary test_initial;
  EvalSummary test_final;
  double seconds = 0.0;
};

constexpr std::uint64_t kSmokeTrainSeed = 7;
const std::vector<std::uint64_t> kTestSeeds = {1, 2, 3};

RunSetup smoke_setup() {
  return make_setup("default", fs::path(EPICONTROL_SMOKE_CONFIG), std::nullopt);
}

SmokeRun smoke_train(std::optional<Ablation> ablation) {
  const RunSetup s = smoke_setup();
  TrainConfig cfg = s.train;
  if (ablation) apply_ablation(cfg, *ablation);
  const auto t0 = Clock::now();
  SmokeRun run;
  run.result = train(s.world, cfg, kSmokeTrainSeed);
  run.seconds = seconds_since(t0);
  run.test_initial = evaluate_on_seeds(s.world, run.result.initial, cfg, kTestSeeds);
  run.test_final = evaluate_on_seeds(s.world, run.result.best, cfg, kTestSeeds);
  return run;
}

Verdict criterion_7(const SmokeRun& full) {
  const TrainResult& r = full.result;
  int non_finite = 0;
  double worst_dev = 0.0;
  for (const UpdateDiagnostics& d : r.diagnostics) {
    if (!d.finite || !std::isfinite(d.policy_loss) || !std::isfinite(d.value_loss) ||
        !std::isfinite(d.entropy)) {
      ++non_finite;
    }
    worst_dev = std::max(worst_dev, d.first_epoch_ratio_deviation);
  }
  const bool pass = full.test_final.score < full.test_initial.score && non_finite == 0 &&
                    worst_dev == 0.0 && r.env_days_consumed >= 20000 && full.seconds < 3600.0;
  return {pass, fmt::format("M=500, {} env days, {} updates: test Score {:.3f} -> {:.3f} "
                            "(I {:.1f} -> {:.1f}); non-finite updates {}; max first-epoch "
                            "|ratio - 1| {:.3g}; {:.0f}s",
                            r.env_days_consumed, r.updates, full.test_initial.score,
                            full.test_final.score, full.test_initial.infections,
                            full.test_final.infections, non_finite, worst_dev, full.seconds)};
}

Verdict criterion_8(const SmokeRun& full, const SmokeRun& no_graph, const SmokeRun& no_guard) {
  const double f = full.test_final.score;
  const double g = no_graph.test_final.score;
  const double e = no_guard.test_final.score;
  return {f <= g && f <= e,
          fmt::format("test Score full {:.3f}, no_graph {:.3f}, no_guard {:.3f}", f, g, e)};
}

int run_cli(const std::string& args) {
  const std::string cmd = fmt::format("\"{}\" {} > /dev/null 2>&1", EPICONTROL_CLI_PATH, args);
  return std::system(cmd.c_str());
}

Verdict criterion_9(const fs::path& scratch) {
  const auto t0 = Clock::now();
  const fs::path cfg = scratch / "tiny.conf";
  std::ofstream(cfg) << "population = 300\ntotal_steps = 240\nrollout_days = 120\n"
                        "eval_interval = 1\neval_seeds = 101\nguard_threshold = 8\n";
  const std::string common = fmt::format("--seeds 1,2 --config \"{}\"", cfg.string());
  const fs::path ckpt = scratch / "run0_train" / "model.ckpt";
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"baseline", "baseline " + common},
      {"train", "train " + common},
      {"eval", "eval " + common + fmt::format(" --checkpoint \"{}\"", ckpt.string())},
      {"ablate", "ablate " + common},
      {"dump-risk", "dump-risk --baseline 'expert(0.01)' " + common},
      {"dump-actions",
       "dump-actions " + common + fmt::format(" --checkpoint \"{}\"", ckpt.string())},
  };
  std::vector<std::string> failed;
  int compared = 0;
  for (const auto& [name, args] : commands) {
    std::vector<fs::path> outs;
    for (int run = 0; run < 2; ++run) {
      std::string tag = name;
      std::replace(tag.begin(), tag.end(), '-', '_');
      outs.push_back(scratch / fmt::format("run{}_{}", run, tag));
      if (run_cli(args + fmt::format(" --out \"{}\"", outs.back().string())) != 0) {
        failed.push_back(name + " exit");
      }
    }
    int files = 0;
    for (const auto& entry : fs::directory_iterator(outs[0])) {
      if (entry.path().extension() != ".csv") continue;
      ++files;
      const fs::path twin = outs[1] / entry.path().filename();
      if (!fs::exists(twin) || slurp(entry.path()) != slurp(twin)) {
        failed.push_back(name + ":" + entry.path().filename().string());
      }
    }
    if (files == 0) failed.push_back(name + " wrote no csv");
    compared += files;
  }
  std::string detail = fmt::format("{} subcommands, {} csv files compared", commands.size(),
                                   compared);
  for (const auto& f : failed) detail += "; differs: " + f;
  return {failed.empty(), fmt::format("{}; {:.1f}s", detail, seconds_since(t0))};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
  auto selected = [&](int c) { return wanted.empty() || wanted.count(c) > 0; };

  epicontrol::testing::ScratchDir scratch("acceptance");
  int failures = 0;
  auto report = [&](int c, const Verdict& v) {
    std::printf("criterion %d: %s  %s\n", c, v.pass ? "PASS" : "FAIL", v.detail.c_str());
    std::fflush(stdout);
    if (!v.pass) ++failures;
  };

  if (selected(1)) report(1, criterion_1());
  if (selected(2)) report(2, criterion_2());
  if (selected(3)) report(3, criterion_3());
  if (selected(4)) report(4, criterion_4());
  if (selected(5)) report(5, criterion_5());
  if (selected(6)) report(6, criterion_6(scratch.path()));
  if (selected(7) || selected(8)) {
    const SmokeRun full = smoke_train(std::nullopt);
    if (selected(7)) report(7, criterion_7(full));
    if (selected(8)) {
      const SmokeRun no_graph = smoke_train(Ablation::kNoGraph);
      const SmokeRun no_guard = smoke_train(Ablation::kNoGuard);
      report(8, criterion_8(full, no_graph, no_guard));
    }
  }
  if (selected(9)) report(9, criterion_9(scratch.path()));
  return failures == 0 ? 0 : 1;
}
