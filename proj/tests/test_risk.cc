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

#include <doctest.h>

#include <random>
#include <sstream>

#include "epicontrol/errors.h"
#include "epicontrol/risk_model.h"
#include "support/oracles.h"

using namespace epicontrol;
using epicontrol::testing::TinyWorld;
using epicontrol::testing::brute_force_risk;
using epicontrol::testing::make_observation;

namespace {

// Ten people in area 0 yesterday; person 9 fell ill that day.
TinyWorld crowd() {
  TinyWorld w;
  w.day = 5;
  w.n_areas = 2;
  w.hours = {std::vector<std::vector<int>>(10, {3, 0})};
  w.health.assign(10, VisibleHealth::kNotDiscovered);
  w.onset_day.assign(10, -1);
  w.health[9] = VisibleHealth::kDiscovered;
  w.onset_day[9] = 4;
  return w;
}

}  // namespace

TEST_CASE("no discovered cases means zero risk") {
  TinyWorld w = crowd();
  w.health[9] = VisibleHealth::kNotDiscovered;
  w.onset_day[9] = -1;
  const RiskVector r = estimate_risk(make_observation(w), RiskConfig{});
  for (double p : r.p_infe) CHECK(p == 0.0);
}

TEST_CASE("one discovered visitor among ten") {
  const RiskVector r = estimate_risk(make_observation(crowd()), RiskConfig{5, 0.01, 0.05});
  CHECK(r.p_infe[0] == doctest::Approx(0.001).epsilon(1e-12));
  CHECK(r.p_infe[9] == 1.0);
  for (int i = 0; i < 10; ++i) CHECK(r.p_infe[i] == doctest::Approx(1.0 - r.p_hel[i]));
}

TEST_CASE("a discovered acquaintance adds one p_c factor") {
  TinyWorld w = crowd();
  w.edges = {{0, 9}};
  const RiskVector r = estimate_risk(make_observation(w), RiskConfig{5, 0.01, 0.05});
  CHECK(r.p_infe[0] == doctest::Approx(0.05095).epsilon(1e-12));
  CHECK(r.p_infe[1] == doctest::Approx(0.001).epsilon(1e-12));

  // A second discovered acquaintance does not stack the factor.
  w.health[8] = VisibleHealth::kDiscovered;
  w.onset_day[8] = 4;
  w.edges.push_back({0, 8});
  const RiskVector two = estimate_risk(make_observation(w), RiskConfig{5, 0.01, 0.05});
  CHECK(two.p_infe[0] == doctest::Approx(1.0 - (1.0 - 0.01 * 2 / 10) * 0.95).epsilon(1e-12));
}

TEST_CASE("visits after symptom onset do not count") {
  TinyWorld w = crowd();
  w.onset_day[9] = 2;
  w.health[9] = VisibleHealth::kRecovered;
  w.edges = {{0, 9}};
  const RiskVector r = estimate_risk(make_observation(w), RiskConfig{});
  CHECK(r.p_infe[0] == 0.0);
  CHECK(r.p_infe[9] == 0.0);
}

TEST_CASE("empty history at the first day") {
  TinyWorld w = crowd();
  w.hours.clear();
  w.day = 0;
  const RiskVector r = estimate_risk(make_observation(w), RiskConfig{});
  for (int i = 0; i < 9; ++i) CHECK(r.p_infe[i] == 0.0);
  CHECK(r.p_infe[9] == 1.0);
}

TEST_CASE("lookback window bounds the exposure") {
  TinyWorld w = crowd();
  // Exposure now three days back; a lookback of 2 misses it.
  w.hours.insert(w.hours.begin(), 2, std::vector<std::vector<int>>(10, {0, 1}));
  w.day = 7;
  w.onset_day[9] = 6;
  CHECK(estimate_risk(make_observation(w), RiskConfig{2, 0.01, 0.05}).p_infe[0] ==
        doctest::Approx(1.0 - (1.0 - 0.001) * (1.0 - 0.001)));
  w.onset_day[9] = 4;
  CHECK(estimate_risk(make_observation(w), RiskConfig{2, 0.01, 0.05}).p_infe[0] == 0.0);
  CHECK(estimate_risk(make_observation(w), RiskConfig{3, 0.01, 0.05}).p_infe[0] ==
        doctest::Approx(0.001));
}

TEST_CASE("matches the brute-force oracle on random tiny worlds") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> look(1, 3);
  std::uniform_real_distribution<double> p(0.0, 0.5);
  for (int rep = 0; rep < 300; ++rep) {
    const TinyWorld w = epicontrol::testing::random_tiny_world(rng, 5, 2, 3);
    const RiskConfig cfg{look(rng), p(rng), p(rng)};
    const RiskVector got = estimate_risk(make_observation(w), cfg);
    const RiskVector want = brute_force_risk(w, cfg);
    REQUIRE(got.size() == want.size());
    for (int i = 0; i < got.size(); ++i) {
      CHECK(std::abs(got.p_infe[i] - want.p_infe[i]) <= 1e-12);
      CHECK(got.p_infe[i] >= 0.0);
      CHECK(got.p_infe[i] <= 1.0);
    }
  }
}

TEST_CASE("adding a discovered visitor never lowers anyone's risk") {
  std::mt19937_64 rng(77);
  for (int rep = 0; rep < 300; ++rep) {
    TinyWorld w = epicontrol::testing::random_tiny_world(rng, 6, 3, 4);
    if (w.hours.empty()) continue;
    const RiskConfig cfg{4, 0.3, 0.1};
    const RiskVector before = estimate_risk(make_observation(w), cfg);
    // Person 0 becomes a discovered case who visited area 0 on every day.
    w.health[0] = VisibleHealth::kDiscovered;
    w.onset_day[0] = w.day;
    for (auto& day : w.hours) day[0][0] = std::max(day[0][0], 1);
    const RiskVector after = estimate_risk(make_observation(w), cfg);
    for (int i = 1; i < after.size(); ++i) CHECK(after.p_infe[i] >= before.p_infe[i] - 1e-15);
  }
}

TEST_CASE("invalid config is rejected") {
  const Observation obs = make_observation(crowd());
  CHECK_THROWS_AS(estimate_risk(obs, RiskConfig{0, 0.01, 0.05}), ConfigError);
  CHECK_THROWS_AS(estimate_risk(obs, RiskConfig{5, 1.5, 0.05}), ConfigError);
}

TEST_CASE("risk rows are written per individual") {
  std::ostringstream out;
  write_risk_rows(out, 3, estimate_risk(make_observation(crowd()), RiskConfig{}));
  const std::string s = out.str();
  CHECK(s.rfind("3,0,0.001\n", 0) == 0);
  CHECK(s.find("3,9,1\n") != std::string::npos);
}
