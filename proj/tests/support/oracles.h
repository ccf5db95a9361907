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

#ifndef EPICONTROL_TESTS_SUPPORT_ORACLES_H_
#define EPICONTROL_TESTS_SUPPORT_ORACLES_H_

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "epicontrol/contact_gnn.h"
#include "epicontrol/observation.h"
#include "epicontrol/risk_model.h"

namespace epicontrol::testing {

// hours[k][i][a]: k = 0 is the most recent completed day.
using HourTable = std::vector<std::vector<std::vector<int>>>;

struct TinyWorld {
  int day = 0;
  int n_areas = 1;
  HourTable hours;
  std::vector<VisibleHealth> health;
  std::vector<int> onset_day;
  std::vector<std::pair<int, int>> edges;
};

Observation make_observation(const TinyWorld& w);

TinyWorld random_tiny_world(std::mt19937_64& rng, int max_m, int max_n, int max_days);

// Walks a flat list of (day, individual, area) visit records and applies
// the per-area-day and acquaintance factors one record at a time.
RiskVector brute_force_risk(const TinyWorld& w, const RiskConfig& cfg);

struct GradCheck {
  double max_rel_error = 0.0;
  int checked = 0;
  int kink_retries = 0;
};

// Compares backward() with central differences of
// L = sum(R .* actor) + r_v * value for the given upstream weights.
GradCheck finite_difference_check(const GnnParams& params, const StateFeatures& features,
                                  const Matrix& r_actor, double r_value);

GnnParams random_params(std::mt19937_64& rng, const NetworkShape& shape);
StateFeatures random_features(std::mt19937_64& rng, int m, int n, int layers);

}  // namespace epicontrol::testing

#endif  // EPICONTROL_TESTS_SUPPORT_ORACLES_H_
