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

#include "epicontrol/ppo.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <fmt/format.h>

#include "epicontrol/errors.h"
#include "epicontrol/keyed_rng.h"
#include "epicontrol/observation.h"

namespace epicontrol {
namespace {

// Day-level log ratios sum over every individual and can be large.
constexpr double kMaxLogRatio = 20.0;

std::vector<Matrix*> tensors(GnnParams& p) {
  std::vector<Matrix*> out;
  p.for_each([&](const std::string&, Matrix& m) { out.push_back(&m); });
  return out;
}

double squared_norm(const GnnParams& g) {
  double s = 0.0;
  g.for_each([&](const std::string&, const Matrix& m) {
    for (double v : m.values()) s += v * v;
  });
  return s;
}

void scale(GnnParams& g, double factor) {
  g.for_each([&](const std::string&, Matrix& m) {
    for (double& v : m.values()) v *= factor;
  });
}

void accumulate(GnnParams& dst, const GnnParams& src, double weight) {
  auto d = tensors(dst);
  std::size_t k = 0;
  src.for_each([&](const std::string&, const Matrix& m) {
    auto out = d[k++]->values();
    const auto in = m.values();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += weight * in[i];
  });
}

std::vector<std::uint64_t> parse_seed_list(const std::string& key, const std::string& value) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) seeds.push_back(parse_u64_field(key, item));
  if (seeds.empty()) throw ConfigError(key, "expected a comma-separated list of seeds");
  return seeds;
}

std::uint64_t episode_seed(std::uint64_t seed, long long episode) {
  return mix_key(seed, Stream::kTraining, 1, static_cast<std::uint64_t>(episode));
}

DayCounts step(WorldState& world, const std::vector<Action>& actions, DayOutcome* outcome) {
  *outcome = step_day(world, actions);
  return counts_from(*outcome);
}

double log_prob_of(const ThresholdMatrix& thr, const std::vector<Action>& actions) {
  double lp = 0.0;
  for (int i = 0; i < thr.size(); ++i) lp += thr.log_mass(i, static_cast<int>(actions[i]));
  return lp;
}

}  // namespace

void TrainConfig::validate() const {
  if (!(theta_I > 0.0)) throw ConfigError("theta_I", "must be positive");
  if (!(theta_Q > 0.0)) throw ConfigError("theta_Q", "must be positive");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("gamma", "must lie in [0,1]");
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) throw ConfigError("gae_lambda", "must lie in [0,1]");
  if (!(clip_eps > 0.0 && clip_eps < 1.0)) throw ConfigError("clip_eps", "must lie in (0,1)");
  if (!(entropy_coef >= 0.0)) throw ConfigError("entropy_coef", "must be non-negative");
  if (!(value_coef >= 0.0)) throw ConfigError("value_coef", "must be non-negative");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate", "must be positive");
  if (!(max_grad_norm > 0.0)) throw ConfigError("max_grad_norm", "must be positive");
  if (total_steps < 0) throw ConfigError("total_steps", "must be non-negative");
  if (epochs_per_update < 1) throw ConfigError("epochs_per_update", "must be at least 1");
  if (minibatch_days < 1) throw ConfigError("minibatch_days", "must be at least 1");
  if (rollout_days < 1) throw ConfigError("rollout_days", "must be at least 1");
  if (guard_threshold < 0) throw ConfigError("guard_threshold", "must be non-negative");
  if (!std::isfinite(guard_penalty)) throw ConfigError("guard_penalty", "must be finite");
  if (eval_interval < 1) throw ConfigError("eval_interval", "must be at least 1");
  if (eval_seeds.empty()) throw ConfigError("eval_seeds", "must not be empty");
  if (network.layers < 1) throw ConfigError("layers", "must be at least 1");
  if (network.hidden < 1) throw ConfigError("hidden", "must be at least 1");
  if (risk_lookback_days < 1) throw ConfigError("risk_lookback_days", "must be at least 1");
}

bool apply_train_key(TrainConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "theta_I") cfg.theta_I = parse_double_field(key, value);
  else if (key == "theta_Q") cfg.theta_Q = parse_double_field(key, value);
  else if (key == "gamma") cfg.gamma = parse_double_field(key, value);
  else if (key == "gae_lambda") cfg.gae_lambda = parse_double_field(key, value);
  else if (key == "clip_eps") cfg.clip_eps = parse_double_field(key, value);
  else if (key == "entropy_coef") cfg.entropy_coef = parse_double_field(key, value);
  else if (key == "value_coef") cfg.value_coef = parse_double_field(key, value);
  else if (key == "learning_rate") cfg.learning_rate = parse_double_field(key, value);
  else if (key == "max_grad_norm") cfg.max_grad_norm = parse_double_field(key, value);
  else if (key == "total_steps") cfg.total_steps = parse_u64_field(key, value);
  else if (key == "epochs_per_update") cfg.epochs_per_update = parse_int_field(key, value);
  else if (key == "minibatch_days") cfg.minibatch_days = parse_int_field(key, value);
  else if (key == "rollout_days") cfg.rollout_days = parse_int_field(key, value);
  else if (key == "guard_threshold") cfg.guard_threshold = parse_int_field(key, value);
  else if (key == "guard_penalty") cfg.guard_penalty = parse_double_field(key, value);
  else if (key == "guard_enabled") cfg.guard_enabled = parse_bool_field(key, value);
  else if (key == "eval_interval") cfg.eval_interval = parse_int_field(key, value);
  else if (key == "eval_seeds") cfg.eval_seeds = parse_seed_list(key, value);
  else if (key == "layers") cfg.network.layers = parse_int_field(key, value);
  else if (key == "hidden") cfg.network.hidden = parse_int_field(key, value);
  else if (key == "shared_weights") cfg.network.shared_weights = parse_bool_field(key, value);
  else if (key == "risk_lookback_days") cfg.risk_lookback_days = parse_int_field(key, value);
  else return false;
  return true;
}

std::string to_key_values(const TrainConfig& cfg) {
  std::string seeds;
  for (std::size_t i = 0; i < cfg.eval_seeds.size(); ++i) {
    seeds += (i ? "," : "") + std::to_string(cfg.eval_seeds[i]);
  }
  std::string out;
  out += fmt::format("theta_I = {}\n", cfg.theta_I);
  out += fmt::format("theta_Q = {}\n", cfg.theta_Q);
  out += fmt::format("gamma = {}\n", cfg.gamma);
  out += fmt::format("gae_lambda = {}\n", cfg.gae_lambda);
  out += fmt::format("clip_eps = {}\n", cfg.clip_eps);
  out += fmt::format("entropy_coef = {}\n", cfg.entropy_coef);
  out += fmt::format("value_coef = {}\n", cfg.value_coef);
  out += fmt::format("learning_rate = {}\n", cfg.learning_rate);
  out += fmt::format("max_grad_norm = {}\n", cfg.max_grad_norm);
  out += fmt::format("total_steps = {}\n", cfg.total_steps);
  out += fmt::format("epochs_per_update = {}\n", cfg.epochs_per_update);
  out += fmt::format("minibatch_days = {}\n", cfg.minibatch_days);
  out += fmt::format("rollout_days = {}\n", cfg.rollout_days);
  out += fmt::format("guard_threshold = {}\n", cfg.guard_threshold);
  out += fmt::format("guard_penalty = {}\n", cfg.guard_penalty);
  out += fmt::format("guard_enabled = {}\n", cfg.guard_enabled);
  out += fmt::format("eval_interval = {}\n", cfg.eval_interval);
  out += fmt::format("eval_seeds = {}\n", seeds);
  out += fmt::format("layers = {}\n", cfg.network.layers);
  out += fmt::format("hidden = {}\n", cfg.network.hidden);
  out += fmt::format("shared_weights = {}\n", cfg.network.shared_weights);
  out += fmt::format("risk_lookback_days = {}\n", cfg.risk_lookback_days);
  return out;
}

RiskConfig risk_config_for(const WorldConfig& world, const TrainConfig& cfg) {
  RiskConfig r;
  r.lookback_days = cfg.risk_lookback_days;
  r.p_s = world.p_s;
  r.p_c = world.p_c;
  return r;
}

double compute_reward(double delta_I, double delta_Q, const TrainConfig& cfg) {
  return -std::exp(delta_I / cfg.theta_I) - std::exp(delta_Q / cfg.theta_Q);
}

PolicyStep policy_step(const WorldState& world, const GnnParams& params, const RiskConfig& risk) {
  const Observation obs = observe(world);
  PolicyStep s;
  s.risk = estimate_risk(obs, risk);
  s.features = make_features(obs, s.risk, params.shape.layers);
  const ForwardCache cache = gnn_forward(params, s.features);
  s.thresholds = thresholds_from_values(actor_head(params, cache));
  s.decision = select_actions(s.risk, s.thresholds);
  s.value = critic_head(params, cache);
  return s;
}

EpisodeResult collect_episode(WorldState& world, const GnnParams& params, const TrainConfig& cfg,
                              RolloutBuffer& buffer) {
  const RiskConfig risk = risk_config_for(world.config, cfg);
  EpisodeResult result{EpisodeMetrics({}, {cfg.theta_I, cfg.theta_Q})};
  buffer.params_version = params.version;
  const std::vector<Action> idle(world.population(), Action::kNoIntervention);
  while (!world.finished()) {
    const bool active = world.intervention_active();
    PolicyStep ps;
    if (active) ps = policy_step(world, params, risk);
    DayOutcome outcome;
    const DayCounts counts = step(world, active ? ps.decision.actions : idle, &outcome);
    const double dq = result.metrics.accumulate_day(counts);
    double reward = compute_reward(static_cast<double>(counts.new_infections), dq, cfg);
    ++result.days_simulated;
    // Days before the intervention starts carry no decision to penalize.
    const bool guard =
        cfg.guard_enabled && active && counts.new_infections > cfg.guard_threshold;
    if (guard) {
      reward += cfg.guard_penalty;
      result.guard_triggered = true;
    }
    result.total_reward += reward;
    if (active) {
      RolloutSample s;
      s.features = std::move(ps.features);
      s.actions = std::move(ps.decision.actions);
      s.p_infe = std::move(ps.risk.p_infe);
      s.log_prob = ps.decision.total_log_prob();
      s.reward = reward;
      s.value = ps.value;
      s.done = guard || world.finished();
      buffer.samples.push_back(std::move(s));
      ++result.policy_days;
    }
    if (guard) break;
  }
  return result;
}

std::vector<double> gae_advantages(const std::vector<double>& rewards,
                                   const std::vector<double>& values,
                                   const std::vector<bool>& done, double gamma, double lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n || done.size() != n) {
    throw ContractError("gae_advantages: sequences differ in length");
  }
  std::vector<double> adv(n, 0.0);
  double next_adv = 0.0;
  double next_value = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    if (done[k] || k + 1 == n) {
      next_adv = 0.0;
      next_value = 0.0;
    }
    const double delta = rewards[k] + gamma * next_value - values[k];
    adv[k] = delta + gamma * lambda * next_adv;
    next_adv = adv[k];
    next_value = values[k];
  }
  return adv;
}

void compute_gae(RolloutBuffer& buffer, double gamma, double lambda) {
  auto& s = buffer.samples;
  if (s.empty()) return;
  std::vector<double> rewards, values;
  std::vector<bool> done;
  for (const auto& x : s) {
    rewards.push_back(x.reward);
    values.push_back(x.value);
    done.push_back(x.done);
  }
  const std::vector<double> adv = gae_advantages(rewards, values, done, gamma, lambda);
  double mean = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    s[k].ret = adv[k] + s[k].value;
    mean += adv[k];
  }
  mean /= static_cast<double>(s.size());
  double var = 0.0;
  for (double a : adv) var += (a - mean) * (a - mean);
  var /= static_cast<double>(s.size());
  const double sd = std::sqrt(var);
  for (std::size_t k = 0; k < s.size(); ++k) {
    s[k].advantage = sd > 1e-12 ? (adv[k] - mean) / sd : adv[k] - mean;
    if (!std::isfinite(s[k].advantage) || !std::isfinite(s[k].ret)) {
      throw NumericError("compute_gae: non-finite advantage or return");
    }
  }
}

AdamOptimizer::AdamOptimizer(const GnnParams& like, double learning_rate)
    : lr_(learning_rate), m_(like.zeros_like()), v_(like.zeros_like()) {}

void AdamOptimizer::step(GnnParams& params, const GnnParams& grad) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  auto p = tensors(params);
  auto m = tensors(m_);
  auto v = tensors(v_);
  std::size_t k = 0;
  grad.for_each([&](const std::string&, const Matrix& g) {
    auto pv = p[k]->values();
    auto mv = m[k]->values();
    auto vv = v[k]->values();
    const auto gv = g.values();
    for (std::size_t i = 0; i < pv.size(); ++i) {
      mv[i] = beta1_ * mv[i] + (1.0 - beta1_) * gv[i];
      vv[i] = beta2_ * vv[i] + (1.0 - beta2_) * gv[i] * gv[i];
      pv[i] -= lr_ * (mv[i] / c1) / (std::sqrt(vv[i] / c2) + eps_);
    }
    ++k;
  });
  ++params.version;
}

SampleLoss sample_loss_and_grad(const GnnParams& params, const RolloutSample& sample,
                                const TrainConfig& cfg, GnnParams* grad, double weight) {
  const ForwardCache cache = gnn_forward(params, sample.features);
  const ThresholdMatrix thr = thresholds_from_values(actor_head(params, cache));
  const double value = critic_head(params, cache);
  const int m = thr.size();
  if (static_cast<int>(sample.actions.size()) != m) {
    throw ContractError("sample_loss_and_grad: action count differs from population");
  }

  SampleLoss loss;
  loss.log_ratio = log_prob_of(thr, sample.actions) - sample.log_prob;
  const double ratio = std::exp(std::clamp(loss.log_ratio, -kMaxLogRatio, kMaxLogRatio));
  const double a = sample.advantage;
  const double surr1 = ratio * a;
  const double surr2 = std::clamp(ratio, 1.0 - cfg.clip_eps, 1.0 + cfg.clip_eps) * a;
  loss.policy = -std::min(surr1, surr2);
  loss.clipped = surr2 < surr1;
  const double d_logp = loss.clipped ? 0.0 : -a * ratio;

  std::vector<double> h(m, 0.0);
  for (int i = 0; i < m; ++i) {
    for (int b = 0; b < kNumActions; ++b) h[i] -= thr.mass(i, b) * thr.log_mass(i, b);
    loss.entropy += h[i];
  }
  loss.entropy /= m;
  loss.value = (value - sample.ret) * (value - sample.ret);

  if (grad != nullptr) {
    Matrix d_raw(m, kNumActions);
    const double ent_scale = -cfg.entropy_coef / m;
    for (int i = 0; i < m; ++i) {
      const int chosen = static_cast<int>(sample.actions[i]);
      for (int b = 0; b < kNumActions; ++b) {
        const double c = thr.mass(i, b);
        d_raw(i, b) = d_logp * (c - (b == chosen ? 1.0 : 0.0)) +
                      ent_scale * c * (thr.log_mass(i, b) + h[i]);
      }
    }
    const double d_value = cfg.value_coef * 2.0 * (value - sample.ret);
    accumulate(*grad, backward(params, cache, d_raw, d_value), weight);
  }
  return loss;
}

UpdateDiagnostics ppo_update(GnnParams& params, AdamOptimizer& opt, const RolloutBuffer& buffer,
                             const TrainConfig& cfg, std::uint64_t shuffle_seed) {
  UpdateDiagnostics diag;
  const std::size_t n = buffer.size();
  if (n == 0) return diag;
  if (buffer.params_version != params.version) {
    throw ContractError("ppo_update: buffer was collected with a different parameter version");
  }

  for (const RolloutSample& s : buffer.samples) {
    const SampleLoss l = sample_loss_and_grad(params, s, cfg, nullptr, 0.0);
    diag.first_epoch_ratio_deviation =
        std::max(diag.first_epoch_ratio_deviation, std::abs(std::exp(l.log_ratio) - 1.0));
  }

  std::vector<std::size_t> order(n);
  long long terms = 0;
  for (int epoch = 0; epoch < cfg.epochs_per_update; ++epoch) {
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    KeyedRng rng(shuffle_seed, Stream::kTraining, 2, static_cast<std::uint64_t>(epoch));
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

    for (std::size_t start = 0; start < n; start += cfg.minibatch_days) {
      const std::size_t end = std::min(n, start + static_cast<std::size_t>(cfg.minibatch_days));
      const double w = 1.0 / static_cast<double>(end - start);
      GnnParams grad = params.zeros_like();
      double pl = 0.0, vl = 0.0, ent = 0.0, kl = 0.0, clipped = 0.0;
      for (std::size_t k = start; k < end; ++k) {
        const SampleLoss l = sample_loss_and_grad(params, buffer.samples[order[k]], cfg, &grad, w);
        pl += l.policy;
        vl += l.value;
        ent += l.entropy;
        kl += -l.log_ratio;
        clipped += l.clipped ? 1.0 : 0.0;
      }
      const double total = w * (pl + cfg.value_coef * vl - cfg.entropy_coef * ent);
      const double norm = std::sqrt(squared_norm(grad));
      if (!std::isfinite(total) || !std::isfinite(norm)) {
        diag.finite = false;
        throw NumericError(fmt::format(
            "ppo_update: non-finite loss at epoch {} step {} (policy {}, value {}, entropy {}, "
            "grad norm {})",
            epoch, diag.optimizer_steps, w * pl, w * vl, w * ent, norm));
      }
      if (norm > cfg.max_grad_norm) scale(grad, cfg.max_grad_norm / norm);
      opt.step(params, grad);
      diag.policy_loss += pl;
      diag.value_loss += vl;
      diag.entropy += ent;
      diag.approx_kl += kl;
      diag.clip_fraction += clipped;
      diag.grad_norm += norm;
      terms += static_cast<long long>(end - start);
      ++diag.optimizer_steps;
    }
  }
  diag.policy_loss /= terms;
  diag.value_loss /= terms;
  diag.entropy /= terms;
  diag.approx_kl /= terms;
  diag.clip_fraction /= terms;
  diag.grad_norm /= diag.optimizer_steps;
  return diag;
}

EvalResult evaluate_policy(const WorldConfig& world_cfg, const GnnParams& params,
                           const TrainConfig& cfg) {
  WorldState world = build_world(world_cfg);
  const RiskConfig risk = risk_config_for(world_cfg, cfg);
  EvalResult result{EpisodeMetrics({}, {cfg.theta_I, cfg.theta_Q})};
  const std::vector<Action> idle(world.population(), Action::kNoIntervention);
  while (!world.finished()) {
    const bool active = world.intervention_active();
    PolicyStep ps;
    if (active) ps = policy_step(world, params, risk);
    DayOutcome outcome;
    const DayCounts counts = step(world, active ? ps.decision.actions : idle, &outcome);
    const double dq = daily_cost(counts, result.metrics.weights());
    result.reward_cost += dq;
    result.total_reward += compute_reward(static_cast<double>(counts.new_infections), dq, cfg);
    result.metrics.accumulate_day(counts);
  }
  const double q = result.metrics.cost();
  if (std::abs(result.reward_cost - q) > 1e-9 * std::max(1.0, q)) {
    throw ContractError(fmt::format("evaluate_policy: reward cost {} differs from metrics cost {}",
                                    result.reward_cost, q));
  }
  return result;
}

EvalSummary evaluate_on_seeds(const WorldConfig& world_cfg, const GnnParams& params,
                              const TrainConfig& cfg, const std::vector<std::uint64_t>& seeds) {
  EvalSummary sum;
  if (seeds.empty()) return sum;
  for (std::uint64_t seed : seeds) {
    WorldConfig wc = world_cfg;
    wc.rng_seed = seed;
    const EvalResult r = evaluate_policy(wc, params, cfg);
    sum.infections += static_cast<double>(r.metrics.infections());
    sum.cost += r.metrics.cost();
    sum.score += r.metrics.score();
  }
  const double k = static_cast<double>(seeds.size());
  sum.infections /= k;
  sum.cost /= k;
  sum.score /= k;
  return sum;
}

TrainResult train(const WorldConfig& world_cfg, const TrainConfig& cfg, std::uint64_t seed,
                  const TrainProgress& progress) {
  world_cfg.validate();
  cfg.validate();
  TrainResult result;
  GnnParams params = init_params(seed, cfg.network);
  result.initial = params;
  AdamOptimizer opt(params, cfg.learning_rate);

  const double nan = std::numeric_limits<double>::quiet_NaN();
  const EvalSummary first = evaluate_on_seeds(world_cfg, params, cfg, cfg.eval_seeds);
  result.best = params;
  result.best_score = first.score;
  result.curve.push_back({0, 0, nan, first.infections, first.cost, first.score});

  long long episode = 0;
  while (result.env_days_consumed < cfg.total_steps) {
    RolloutBuffer buffer;
    double reward_sum = 0.0;
    int episodes = 0;
    while (static_cast<int>(buffer.size()) < cfg.rollout_days &&
           result.env_days_consumed < cfg.total_steps) {
      WorldConfig wc = world_cfg;
      wc.rng_seed = episode_seed(seed, episode++);
      WorldState world = build_world(wc);
      const EpisodeResult ep = collect_episode(world, params, cfg, buffer);
      result.env_days_consumed += ep.days_simulated;
      reward_sum += ep.total_reward;
      ++episodes;
    }
    compute_gae(buffer, cfg.gamma, cfg.gae_lambda);
    const std::uint64_t shuffle_seed = mix_key(seed, Stream::kTraining, 3, result.updates);
    const UpdateDiagnostics diag = ppo_update(params, opt, buffer, cfg, shuffle_seed);
    ++result.updates;

    CurveRow row{result.updates, result.env_days_consumed, reward_sum / std::max(1, episodes),
                 nan, nan, nan};
    const bool last = result.env_days_consumed >= cfg.total_steps;
    if (result.updates % cfg.eval_interval == 0 || last) {
      const EvalSummary ev = evaluate_on_seeds(world_cfg, params, cfg, cfg.eval_seeds);
      row.eval_I = ev.infections;
      row.eval_Q = ev.cost;
      row.eval_Score = ev.score;
      if (ev.score < result.best_score) {
        result.best_score = ev.score;
        result.best = params;
      }
    }
    result.curve.push_back(row);
    result.diagnostics.push_back(diag);
    if (progress) progress(row, diag);
  }
  result.last = params;
  return result;
}

void write_curve_csv(std::ostream& out, const std::vector<CurveRow>& rows,
                     const std::vector<std::string>& header_comments) {
  for (const auto& c : header_comments) out << "# " << c << "\n";
  out << "update_index,env_days_consumed,mean_episode_reward,eval_I,eval_Q,eval_Score\n";
  auto cell = [](double v) { return std::isnan(v) ? std::string() : fmt::format("{:.17g}", v); };
  for (const auto& r : rows) {
    out << r.update_index << ',' << r.env_days_consumed << ',' << cell(r.mean_episode_reward)
        << ',' << cell(r.eval_I) << ',' << cell(r.eval_Q) << ',' << cell(r.eval_Score) << "\n";
  }
}

}  // namespace epicontrol
