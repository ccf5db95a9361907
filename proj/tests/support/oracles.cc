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

#include "support/oracles.h"

#include <algorithm>
#include <cmath>
#include <memory>
#include <set>
#include <tuple>

namespace epicontrol::testing {

Observation make_observation(const TinyWorld& w) {
  const int m = static_cast<int>(w.health.size());
  Observation obs;
  obs.day = w.day;
  obs.weekend = is_weekend(w.day);
  obs.n_areas = w.n_areas;
  obs.health = w.health;
  obs.onset_day = w.onset_day;
  obs.current_action.assign(m, Action::kNoIntervention);
  obs.history = VisitHistory(std::max(1, static_cast<int>(w.hours.size())));
  // Oldest first so that back(0) ends up as hours[0].
  for (int k = static_cast<int>(w.hours.size()) - 1; k >= 0; --k) {
    auto day = std::make_shared<DayVisits>(m, w.n_areas);
    for (int i = 0; i < m; ++i) {
      for (int a = 0; a < w.n_areas; ++a) {
        day->set_hours(i, a, static_cast<std::uint8_t>(w.hours[k][i][a]));
      }
    }
    obs.history.push(day);
  }
  obs.acquaintances = std::make_shared<AcquaintanceGraph>(m, w.edges);
  return obs;
}

TinyWorld random_tiny_world(std::mt19937_64& rng, int max_m, int max_n, int max_days) {
  std::uniform_int_distribution<int> m_dist(1, max_m), n_dist(1, max_n), d_dist(0, max_days);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  TinyWorld w;
  const int m = m_dist(rng);
  w.n_areas = n_dist(rng);
  const int days = d_dist(rng);
  w.day = days + std::uniform_int_distribution<int>(0, 2)(rng);
  w.hours.assign(days, std::vector<std::vector<int>>(m, std::vector<int>(w.n_areas, 0)));
  for (auto& day : w.hours) {
    for (auto& row : day) {
      for (int& h : row) h = u(rng) < 0.5 ? 0 : std::uniform_int_distribution<int>(1, 12)(rng);
    }
  }
  for (int i = 0; i < m; ++i) {
    const double r = u(rng);
    if (r < 0.55) {
      w.health.push_back(VisibleHealth::kNotDiscovered);
      w.onset_day.push_back(-1);
    } else {
      const int onset = std::uniform_int_distribution<int>(std::max(0, w.day - 4), w.day)(rng);
      w.health.push_back(r < 0.85 ? VisibleHealth::kDiscovered : VisibleHealth::kRecovered);
      w.onset_day.push_back(onset);
    }
  }
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      if (u(rng) < 0.4) w.edges.emplace_back(i, j);
    }
  }
  return w;
}

RiskVector brute_force_risk(const TinyWorld& w, const RiskConfig& cfg) {
  const int m = static_cast<int>(w.health.size());
  struct Record {
    int t, person, area;
  };
  std::vector<Record> records;
  const int window = std::min(cfg.lookback_days, static_cast<int>(w.hours.size()));
  for (int k = 0; k < window; ++k) {
    for (int i = 0; i < m; ++i) {
      for (int a = 0; a < w.n_areas; ++a) {
        if (w.hours[k][i][a] > 0) records.push_back({w.day - 1 - k, i, a});
      }
    }
  }
  std::set<std::pair<int, int>> acquainted;
  for (auto [a, b] : w.edges) {
    acquainted.insert({a, b});
    acquainted.insert({b, a});
  }
  auto infectious_at = [&](int j, int t) { return w.onset_day[j] >= 0 && t <= w.onset_day[j]; };

  RiskVector out;
  for (int i = 0; i < m; ++i) {
    double hel = 1.0;
    bool met_case = false;
    for (const Record& mine : records) {
      if (mine.person != i) continue;
      int total = 0, sick = 0;
      for (const Record& other : records) {
        if (other.t != mine.t || other.area != mine.area) continue;
        ++total;
        if (infectious_at(other.person, other.t)) ++sick;
        if (other.person != i && acquainted.count({i, other.person}) &&
            infectious_at(other.person, other.t)) {
          met_case = true;
        }
      }
      hel *= 1.0 - cfg.p_s * sick / total;
    }
    if (met_case) hel *= 1.0 - cfg.p_c;
    double infe = 1.0 - hel;
    if (w.health[i] == VisibleHealth::kDiscovered) infe = 1.0;
    if (w.health[i] == VisibleHealth::kRecovered) infe = 0.0;
    out.p_infe.push_back(infe);
    out.p_hel.push_back(1.0 - infe);
  }
  return out;
}

namespace {

double objective(const GnnParams& p, const StateFeatures& f, const Matrix& r_actor,
                 double r_value, std::vector<bool>* pattern) {
  const ForwardCache cache = gnn_forward(p, f);
  if (pattern) {
    pattern->clear();
    for (const auto& l : cache.layers) {
      for (double v : l.area_pre.values()) pattern->push_back(v > 0.0);
      for (double v : l.ind_pre.values()) pattern->push_back(v > 0.0);
    }
  }
  const Matrix actor = actor_head(p, cache);
  double s = r_value * critic_head(p, cache);
  for (int i = 0; i < actor.rows(); ++i) {
    for (int b = 0; b < actor.cols(); ++b) s += r_actor(i, b) * actor(i, b);
  }
  return s;
}

}  // namespace

GradCheck finite_difference_check(const GnnParams& params, const StateFeatures& features,
                                  const Matrix& r_actor, double r_value) {
  GradCheck out;
  const GnnParams analytic = backward(params, gnn_forward(params, features), r_actor, r_value);
  std::vector<bool> base;
  objective(params, features, r_actor, r_value, &base);

  std::vector<const Matrix*> grads;
  analytic.for_each([&](const std::string&, const Matrix& m) { grads.push_back(&m); });

  GnnParams probe = params;
  std::vector<Matrix*> slots;
  probe.for_each([&](const std::string&, Matrix& m) { slots.push_back(&m); });

  for (std::size_t t = 0; t < slots.size(); ++t) {
    auto values = slots[t]->values();
    const auto g = grads[t]->values();
    for (std::size_t e = 0; e < values.size(); ++e) {
      const double orig = values[e];
      double numeric = 0.0;
      // Step shrinks until neither probe crosses a rectifier kink.
      for (double h = 1e-4; h >= 1e-9; h *= 0.1) {
        std::vector<bool> plus_pattern, minus_pattern;
        values[e] = orig + h;
        const double plus = objective(probe, features, r_actor, r_value, &plus_pattern);
        values[e] = orig - h;
        const double minus = objective(probe, features, r_actor, r_value, &minus_pattern);
        values[e] = orig;
        numeric = (plus - minus) / (2.0 * h);
        if (plus_pattern == base && minus_pattern == base) break;
        ++out.kink_retries;
      }
      const double denom = std::max({std::abs(g[e]), std::abs(numeric), 1e-6});
      out.max_rel_error = std::max(out.max_rel_error, std::abs(g[e] - numeric) / denom);
      ++out.checked;
    }
  }
  return out;
}

GnnParams random_params(std::mt19937_64& rng, const NetworkShape& shape) {
  GnnParams p = init_params(rng(), shape);
  std::normal_distribution<double> nd(0.0, 0.7);
  p.for_each([&](const std::string&, Matrix& m) {
    for (double& v : m.values()) v = nd(rng);
  });
  return p;
}

StateFeatures random_features(std::mt19937_64& rng, int m, int n, int layers) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  StateFeatures f;
  f.node = Matrix(m, kFeatureDim);
  for (int i = 0; i < m; ++i) {
    f.node(i, std::uniform_int_distribution<int>(0, 2)(rng)) = 1.0;
    f.node(i, 3 + std::uniform_int_distribution<int>(0, 3)(rng)) = 1.0;
    f.node(i, 7) = u(rng);
  }
  for (int k = 0; k < layers; ++k) {
    Matrix s(m, n);
    for (double& v : s.values()) v = u(rng) < 0.3 ? 0.0 : std::floor(u(rng) * 24.0);
    f.visit_slices.push_back(std::move(s));
  }
  return f;
}

}  // namespace epicontrol::testing
