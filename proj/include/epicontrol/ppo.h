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

#ifndef EPICONTROL_PPO_H_
#define EPICONTROL_PPO_H_

#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "epicontrol/contact_gnn.h"
#include "epicontrol/metrics.h"
#include "epicontrol/policy.h"
#include "epicontrol/risk_model.h"
#include "epicontrol/world.h"
#include "epicontrol/world_config.h"

namespace epicontrol {

struct TrainConfig {
  double theta_I = 500.0;
  double theta_Q = 10000.0;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip_eps = 0.2;
  double entropy_coef = 0.01;
  double value_coef = 0.5;
  double learning_rate = 1e-4;
  double max_grad_norm = 0.5;
  long long total_steps = 200000;  // environment days
  int epochs_per_update = 4;
  int minibatch_days = 16;
  // Whole episodes are collected until at least this many policy days are
  // buffered.
  int rollout_days = 480;
  int guard_threshold = 250;
  double guard_penalty = -100.0;
  bool guard_enabled = true;
  int eval_interval = 5;  // updates between evaluations
  std::vector<std::uint64_t> eval_seeds = {101, 102, 103};
  NetworkShape network;
  int risk_lookback_days = 5;

  void validate() const;
};

bool apply_train_key(TrainConfig& cfg, const std::string& key, const std::string& value);
std::string to_key_values(const TrainConfig& cfg);

// Risk estimation uses the world's transmission probabilities.
RiskConfig risk_config_for(const WorldConfig& world, const TrainConfig& cfg);

double compute_reward(double delta_I, double delta_Q, const TrainConfig& cfg);

struct RolloutSample {
  StateFeatures features;
  std::vector<Action> actions;
  std::vector<double> p_infe;
  double log_prob = 0.0;  // summed over individuals
  double reward = 0.0;
  double value = 0.0;
  bool done = false;
  double advantage = 0.0;
  double ret = 0.0;
};

struct RolloutBuffer {
  std::vector<RolloutSample> samples;
  std::uint64_t params_version = 0;

  std::size_t size() const { return samples.size(); }
};

struct EpisodeResult {
  EpisodeMetrics metrics;
  double total_reward = 0.0;
  int days_simulated = 0;
  bool guard_triggered = false;
  int policy_days = 0;  // days with an active intervention
};

// One policy decision for the current world state.
struct PolicyStep {
  StateFeatures features;
  RiskVector risk;
  ThresholdMatrix thresholds;
  ActionDecision decision;
  double value = 0.0;
};
PolicyStep policy_step(const WorldState& world, const GnnParams& params, const RiskConfig& risk);

// Runs `world` to its horizon (or until the guard fires) appending one sample
// per day with an active intervention. Days before the intervention starts
// consume environment steps but carry no decision.
EpisodeResult collect_episode(WorldState& world, const GnnParams& params, const TrainConfig& cfg,
                              RolloutBuffer& buffer);

// Generalized advantage estimates with a zero bootstrap after `done` and at
// the end of the sequence.
std::vector<double> gae_advantages(const std::vector<double>& rewards,
                                   const std::vector<double>& values,
                                   const std::vector<bool>& done, double gamma, double lambda);

// Fills ret = advantage + value, then normalizes advantages over the buffer.
void compute_gae(RolloutBuffer& buffer, double gamma, double lambda);

struct UpdateDiagnostics {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double grad_norm = 0.0;  // before clipping, mean over steps
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
  // Largest |ratio - 1| over every sample before the first optimizer step.
  double first_epoch_ratio_deviation = 0.0;
  int optimizer_steps = 0;
  bool finite = true;
};

class AdamOptimizer {
 public:
  AdamOptimizer(const GnnParams& like, double learning_rate);
  void step(GnnParams& params, const GnnParams& grad);
  long long steps() const { return t_; }

 private:
  double lr_;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double eps_ = 1e-8;
  long long t_ = 0;
  GnnParams m_;
  GnnParams v_;
};

// Per-day loss terms and their gradient for one stored sample.
struct SampleLoss {
  double policy = 0.0;
  double value = 0.0;
  double entropy = 0.0;
  double log_ratio = 0.0;
  bool clipped = false;
};
SampleLoss sample_loss_and_grad(const GnnParams& params, const RolloutSample& sample,
                                const TrainConfig& cfg, GnnParams* grad, double weight);

// Throws NumericError if a loss or gradient turns non-finite; params are left
// at their last finite state.
UpdateDiagnostics ppo_update(GnnParams& params, AdamOptimizer& opt, const RolloutBuffer& buffer,
                             const TrainConfig& cfg, std::uint64_t shuffle_seed);

struct EvalResult {
  EpisodeMetrics metrics;
  double total_reward = 0.0;
  // Sum of the daily costs used for rewards; equals metrics.cost().
  double reward_cost = 0.0;
};

// Full-horizon episode with the learned policy and no guard. Throws
// ContractError if reward-side and metrics-side cost accumulation disagree.
EvalResult evaluate_policy(const WorldConfig& world_cfg, const GnnParams& params,
                           const TrainConfig& cfg);

struct EvalSummary {
  double infections = 0.0;
  double cost = 0.0;
  double score = 0.0;
};
EvalSummary evaluate_on_seeds(const WorldConfig& world_cfg, const GnnParams& params,
                              const TrainConfig& cfg, const std::vector<std::uint64_t>& seeds);

struct CurveRow {
  int update_index = 0;
  long long env_days_consumed = 0;
  double mean_episode_reward = 0.0;
  double eval_I = 0.0;
  double eval_Q = 0.0;
  double eval_Score = 0.0;
};

struct TrainResult {
  GnnParams initial;
  GnnParams best;
  GnnParams last;
  double best_score = 0.0;
  std::vector<CurveRow> curve;
  std::vector<UpdateDiagnostics> diagnostics;
  long long env_days_consumed = 0;
  int updates = 0;
};

using TrainProgress = std::function<void(const CurveRow&, const UpdateDiagnostics&)>;

TrainResult train(const WorldConfig& world_cfg, const TrainConfig& cfg, std::uint64_t seed,
                  const TrainProgress& progress = {});

void write_curve_csv(std::ostream& out, const std::vector<CurveRow>& rows,
                     const std::vector<std::string>& header_comments = {});

}  // namespace epicontrol

#endif  // EPICONTROL_PPO_H_
