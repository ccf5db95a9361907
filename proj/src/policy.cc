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

#include "epicontrol/policy.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "epicontrol/errors.h"
#include "epicontrol/keyed_rng.h"

namespace epicontrol {

ThresholdMatrix thresholds_from_values(const Matrix& raw) {
  if (raw.cols() != kNumActions) {
    throw ContractError(fmt::format("thresholds_from_values: expected {} columns, got {}",
                                    kNumActions, raw.cols()));
  }
  const int m = raw.rows();
  ThresholdMatrix out{Matrix(m, kNumActions), Matrix(m, kNumActions), Matrix(m, 3)};
  for (int i = 0; i < m; ++i) {
    const auto r = raw.row(i);
    double top = -r[0];
    for (double v : r) {
      if (!std::isfinite(v)) throw NumericError("thresholds_from_values: non-finite actor output");
      top = std::max(top, -v);
    }
    double total = 0.0;
    for (int a = 0; a < kNumActions; ++a) total += std::exp(-r[a] - top);
    const double log_total = std::log(total) + top;
    for (int a = 0; a < kNumActions; ++a) {
      out.log_mass(i, a) = -r[a] - log_total;
      out.mass(i, a) = std::exp(-r[a] - top) / total;
    }
    double cumulative = 0.0;
    for (int k = 0; k < 3; ++k) {
      cumulative += out.mass(i, k);
      out.thresholds(i, k) = std::min(cumulative, 1.0);
    }
  }
  return out;
}

double ActionDecision::total_log_prob() const {
  return std::accumulate(log_prob.begin(), log_prob.end(), 0.0);
}

double ActionDecision::mean_entropy() const {
  if (entropy.empty()) return 0.0;
  return std::accumulate(entropy.begin(), entropy.end(), 0.0) / entropy.size();
}

Action action_for_probability(double p, double p1, double p2, double p3) {
  if (p <= p1) return Action::kNoIntervention;
  if (p <= p2) return Action::kConfine;
  if (p <= p3) return Action::kQuarantine;
  return Action::kIsolate;
}

ActionDecision select_actions(const RiskVector& risk, const ThresholdMatrix& thr) {
  const int m = risk.size();
  if (thr.size() != m) {
    throw ContractError(fmt::format("select_actions: {} risks vs {} threshold rows", m, thr.size()));
  }
  ActionDecision out;
  out.actions.resize(m);
  out.log_prob.resize(m);
  out.entropy.resize(m);
  for (int i = 0; i < m; ++i) {
    const double p = risk.p_infe[i];
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ContractError(fmt::format("select_actions: p_infe[{}] = {} outside [0, 1]", i, p));
    }
    const Action a = action_for_probability(p, thr.thresholds(i, 0), thr.thresholds(i, 1),
                                            thr.thresholds(i, 2));
    out.actions[i] = a;
    out.log_prob[i] = thr.log_mass(i, static_cast<int>(a));
    double h = 0.0;
    for (int k = 0; k < kNumActions; ++k) h -= thr.mass(i, k) * thr.log_mass(i, k);
    out.entropy[i] = std::max(h, 0.0);
  }
  return out;
}

Baseline Baseline::parse(std::string_view name) {
  if (name == "no_intervention") return {BaselineKind::kNoIntervention, 0.0};
  if (name == "lockdown") return {BaselineKind::kLockdown, 0.0};
  if (name == "degree_sample") return {BaselineKind::kDegreeSample, 0.0};
  if (name == "degree_order") return {BaselineKind::kDegreeOrder, 0.0};
  if (name.starts_with("expert(") && name.ends_with(")")) {
    const std::string arg(name.substr(7, name.size() - 8));
    char* end = nullptr;
    const double theta = std::strtod(arg.c_str(), &end);
    if (!arg.empty() && end == arg.c_str() + arg.size() && theta >= 0.0 && theta <= 1.0) {
      return {BaselineKind::kExpert, theta};
    }
  }
  std::string valid;
  for (const auto& n : baseline_names()) valid += (valid.empty() ? "" : ", ") + n;
  throw ConfigError("baseline", fmt::format("unknown baseline '{}' (valid: {})", name, valid));
}

std::string Baseline::name() const {
  switch (kind) {
    case BaselineKind::kNoIntervention: return "no_intervention";
    case BaselineKind::kLockdown: return "lockdown";
    case BaselineKind::kExpert: return fmt::format("expert({})", threshold);
    case BaselineKind::kDegreeSample: return "degree_sample";
    case BaselineKind::kDegreeOrder: return "degree_order";
  }
  return "unknown";
}

std::vector<std::string> baseline_names() {
  return {"no_intervention", "lockdown", "expert(0.01)", "expert(0.015)", "degree_sample",
          "degree_order"};
}

std::vector<long long> recent_contact_counts(const Observation& obs, int window) {
  const int m = obs.population();
  const int n = obs.n_areas;
  std::vector<long long> contacts(m, 0);
  std::vector<int> visitors(n);
  const int days = std::min(window, obs.history.size());
  for (int k = 0; k < days; ++k) {
    const DayVisits& visits = *obs.history.back(k);
    std::fill(visitors.begin(), visitors.end(), 0);
    for (int i = 0; i < m; ++i) {
      const auto row = visits.row(i);
      for (int a = 0; a < n; ++a) visitors[a] += row[a] > 0;
    }
    for (int i = 0; i < m; ++i) {
      const auto row = visits.row(i);
      for (int a = 0; a < n; ++a) {
        if (row[a] > 0) contacts[i] += visitors[a] - 1;
      }
    }
  }
  return contacts;
}

std::vector<Action> baseline_actions(const Baseline& baseline, const Observation& obs,
                                     const RiskVector& risk, std::uint64_t seed) {
  const int m = obs.population();
  std::vector<Action> actions(m, Action::kNoIntervention);
  switch (baseline.kind) {
    case BaselineKind::kNoIntervention:
      break;
    case BaselineKind::kLockdown:
      std::fill(actions.begin(), actions.end(), Action::kIsolate);
      break;
    case BaselineKind::kExpert:
      if (risk.size() != m) throw ContractError("baseline_actions: risk vector size mismatch");
      for (int i = 0; i < m; ++i) {
        if (risk.p_infe[i] > baseline.threshold) actions[i] = Action::kIsolate;
      }
      break;
    case BaselineKind::kDegreeSample:
      for (int i = 0; i < m; ++i) {
        const int n = obs.acquaintances ? obs.acquaintances->degree(i) : 0;
        if (n <= kDegreeSampleFloor) continue;
        const double p = static_cast<double>(n - kDegreeSampleFloor) / n;
        if (keyed_uniform(seed, Stream::kBaseline, static_cast<std::uint64_t>(obs.day),
                          static_cast<std::uint64_t>(i)) < p) {
          actions[i] = Action::kIsolate;
        }
      }
      break;
    case BaselineKind::kDegreeOrder: {
      const auto contacts = recent_contact_counts(obs, kDegreeOrderWindow);
      std::vector<int> order(m);
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&](int a, int b) { return contacts[a] > contacts[b]; });
      const int count = static_cast<int>(static_cast<long long>(m) * kDegreeOrderPercent / 100);
      for (int r = 0; r < count; ++r) actions[order[r]] = Action::kIsolate;
      break;
    }
  }
  return actions;
}

}  // namespace epicontrol
