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

#include "epicontrol/world.h"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "epicontrol/errors.h"
#include "epicontrol/keyed_rng.h"
#include "epicontrol/observation.h"

namespace epicontrol {
namespace {

constexpr int kWorkStartHour = 9;
constexpr int kWorkEndHour = 17;  // exclusive
constexpr int kWeekendVisitHours = 2;
constexpr int kWeekendEarliestVisit = 10;
constexpr int kWeekendLatestVisit = 18;

// Knuth's multiplication method; fine for the small means used here.
int sample_poisson(KeyedRng& rng, double mean) {
  if (mean <= 0.0) return 0;
  const double limit = std::exp(-mean);
  int k = 0;
  double prod = rng.uniform();
  while (prod > limit) {
    ++k;
    prod *= rng.uniform();
  }
  return k;
}

struct DayPlan {
  int commercial_area = -1;  // -1: no commercial visit today
  int visit_start = 0;
  int visit_hours = 0;
};

DayPlan plan_for(const WorldState& world, int i, int day) {
  const WorldConfig& cfg = world.config;
  const Individual& ind = world.individuals[i];
  const auto& commercial = world.commercial_areas;
  KeyedRng rng(cfg.rng_seed, Stream::kDayPlan, static_cast<std::uint64_t>(day),
               static_cast<std::uint64_t>(i));
  DayPlan plan;
  if (is_weekend(day)) {
    plan.commercial_area = commercial[rng.below(commercial.size())];
    plan.visit_start = kWeekendEarliestVisit +
                       static_cast<int>(rng.below(kWeekendLatestVisit - kWeekendEarliestVisit + 1));
    plan.visit_hours = kWeekendVisitHours;
    return plan;
  }
  const bool visits = rng.uniform() < cfg.commercial_visit_prob;
  const int resampled = commercial[rng.below(commercial.size())];
  if (visits) {
    plan.commercial_area = cfg.changeable_mobility ? resampled : ind.favourite_commercial_area;
    plan.visit_start = kWorkEndHour;
    plan.visit_hours = 1;
  }
  return plan;
}

int location_from_plan(const Individual& ind, const DayPlan& plan, int day, int hour) {
  if (plan.commercial_area >= 0 && hour >= plan.visit_start &&
      hour < plan.visit_start + plan.visit_hours) {
    return plan.commercial_area;
  }
  if (!is_weekend(day) && hour >= kWorkStartHour && hour < kWorkEndHour) {
    return ind.working_area;
  }
  return ind.residential_area;
}

ContactAllowance allowance_for(const Individual& ind, Action action, const DayPlan& plan,
                               int day, int hour) {
  ContactAllowance out;
  if (ind.health.kind == Health::kSymptomatic) return out;
  switch (action) {
    case Action::kNoIntervention:
      out = {location_from_plan(ind, plan, day, hour), true, true, true};
      break;
    case Action::kConfine:
      out = {ind.residential_area, true, true, true};
      break;
    case Action::kQuarantine:
      out = {ind.residential_area, true, false, true};
      break;
    case Action::kIsolate:
      // Physically at home but reachable by nobody and absent from history.
      out = {ind.residential_area, false, false, false};
      break;
  }
  return out;
}

}  // namespace

std::string_view action_name(Action action) {
  switch (action) {
    case Action::kNoIntervention: return "no_intervention";
    case Action::kConfine: return "confine";
    case Action::kQuarantine: return "quarantine";
    case Action::kIsolate: return "isolate";
  }
  return "unknown";
}

bool is_weekend(int day) { return day % 7 >= 5; }

AcquaintanceGraph::AcquaintanceGraph(int n, std::vector<std::pair<int, int>> edges) {
  std::vector<std::pair<int, int>> directed;
  directed.reserve(edges.size() * 2);
  for (auto [a, b] : edges) {
    if (a == b) continue;
    if (a < 0 || b < 0 || a >= n || b >= n) {
      throw ContractError(fmt::format("acquaintance edge ({}, {}) out of range", a, b));
    }
    directed.emplace_back(a, b);
    directed.emplace_back(b, a);
  }
  std::sort(directed.begin(), directed.end());
  directed.erase(std::unique(directed.begin(), directed.end()), directed.end());
  offsets_.assign(static_cast<std::size_t>(n) + 1, 0);
  neighbors_.reserve(directed.size());
  for (auto [a, b] : directed) {
    ++offsets_[a + 1];
    neighbors_.push_back(b);
  }
  for (int i = 0; i < n; ++i) offsets_[i + 1] += offsets_[i];
}

bool AcquaintanceGraph::connected(int i, int j) const {
  const auto nb = neighbors(i);
  return std::binary_search(nb.begin(), nb.end(), j);
}

int DayVisits::visitors(int area) const {
  int count = 0;
  for (int i = 0; i < population_; ++i) count += hours(i, area) > 0;
  return count;
}

void VisitHistory::push(std::shared_ptr<const DayVisits> day) {
  if (capacity_ <= 0) return;
  days_.insert(days_.begin(), std::move(day));
  if (static_cast<int>(days_.size()) > capacity_) days_.pop_back();
}

const DayVisits* VisitHistory::back(int k) const {
  if (k < 0 || k >= static_cast<int>(days_.size())) return nullptr;
  return days_[k].get();
}

bool operator==(const VisitHistory& a, const VisitHistory& b) {
  if (a.capacity_ != b.capacity_ || a.days_.size() != b.days_.size()) return false;
  for (std::size_t k = 0; k < a.days_.size(); ++k) {
    if (!(*a.days_[k] == *b.days_[k])) return false;
  }
  return true;
}

bool operator==(const WorldState& a, const WorldState& b) {
  const bool graphs_equal = (a.acquaintances && b.acquaintances)
                                ? *a.acquaintances == *b.acquaintances
                                : a.acquaintances == b.acquaintances;
  return to_key_values(a.config) == to_key_values(b.config) && a.areas == b.areas &&
         a.residential_areas == b.residential_areas && a.working_areas == b.working_areas &&
         a.commercial_areas == b.commercial_areas && a.individuals == b.individuals &&
         graphs_equal && a.history == b.history && a.day == b.day &&
         a.first_discovery_day == b.first_discovery_day;
}

WorldState build_world(const WorldConfig& config, int history_days) {
  config.validate();
  WorldState world;
  world.config = config;
  world.history = VisitHistory(history_days);

  const int n = config.n_areas;
  const int n_res = std::max(1, static_cast<int>(0.45 * n));
  const int n_work = std::max(1, static_cast<int>(0.3 * n));
  for (int a = 0; a < n; ++a) {
    AreaCategory cat = a < n_res            ? AreaCategory::kResidential
                       : a < n_res + n_work ? AreaCategory::kWorking
                                            : AreaCategory::kCommercial;
    world.areas.push_back({a, cat});
    (cat == AreaCategory::kResidential ? world.residential_areas
     : cat == AreaCategory::kWorking   ? world.working_areas
                                       : world.commercial_areas)
        .push_back(a);
  }

  KeyedRng rng(config.rng_seed, Stream::kWorldBuild);
  const int m = config.population;
  world.individuals.resize(m);
  std::vector<std::vector<int>> residents(n);
  for (int i = 0; i < m; ++i) {
    Individual& ind = world.individuals[i];
    ind.id = i;
    ind.residential_area = world.residential_areas[rng.below(world.residential_areas.size())];
    ind.working_area = world.working_areas[rng.below(world.working_areas.size())];
    ind.favourite_commercial_area =
        world.commercial_areas[rng.below(world.commercial_areas.size())];
    ind.location = ind.residential_area;
    residents[ind.residential_area].push_back(i);
  }

  // Each individual proposes Poisson(mean / 2) ties to co-residents; after
  // symmetrization the mean degree is approximately the configured mean.
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < m; ++i) {
    const auto& home = residents[world.individuals[i].residential_area];
    if (home.size() < 2) continue;
    const int k = sample_poisson(rng, config.mean_acquaintance_degree / 2.0);
    for (int e = 0; e < k; ++e) {
      int j = i;
      while (j == i) j = home[rng.below(home.size())];
      edges.emplace_back(i, j);
    }
  }
  world.acquaintances = std::make_shared<const AcquaintanceGraph>(m, std::move(edges));

  std::vector<int> order(m);
  for (int i = 0; i < m; ++i) order[i] = i;
  for (int s = 0; s < config.initial_seed_count; ++s) {
    const int pick = s + static_cast<int>(rng.below(static_cast<std::uint64_t>(m - s)));
    std::swap(order[s], order[pick]);
    HealthState& h = world.individuals[order[s]].health;
    h.kind = Health::kAsymptomatic;
    h.infected_hour = 0;
  }
  return world;
}

int planned_location(const WorldState& world, int i, int day, int hour) {
  return location_from_plan(world.individuals[i], plan_for(world, i, day), day, hour);
}

ContactAllowance intervention_contact_filter(const WorldState& world, int i, Action action,
                                             int hour) {
  return allowance_for(world.individuals[i], action, plan_for(world, i, world.day), world.day,
                       hour);
}

DayOutcome step_day(WorldState& world, std::span<const Action> actions) {
  const int m = world.population();
  if (static_cast<int>(actions.size()) != m) {
    throw ContractError(
        fmt::format("step_day: {} actions for {} individuals", actions.size(), m));
  }
  if (world.finished()) throw ContractError("step_day: world is past its horizon");

  const WorldConfig& cfg = world.config;
  const int day = world.day;
  DayOutcome out;
  out.day = day;
  out.intervention_active = world.intervention_active();

  std::vector<DayPlan> plans(m);
  for (int i = 0; i < m; ++i) {
    Individual& ind = world.individuals[i];
    plans[i] = plan_for(world, i, day);
    Action a = out.intervention_active ? actions[i] : Action::kNoIntervention;
    if (ind.health.kind == Health::kSymptomatic) a = Action::kNoIntervention;
    ind.current_action = a;
  }

  auto visits = std::make_shared<DayVisits>(m, world.n_areas());
  const AcquaintanceGraph& graph = *world.acquaintances;
  std::vector<char> hospitalized_today(m, 0);
  std::vector<ContactAllowance> allow(m);
  std::vector<std::vector<int>> frame(world.n_areas());
  std::vector<int> infectious;
  std::vector<int> pending_infector(m, -1);
  std::vector<int> newly_infected;
  std::vector<int> chosen;
  const int incubation_hours = cfg.incubation_days * kHoursPerDay;
  const int treatment_hours = cfg.treatment_days * kHoursPerDay;

  for (int hour = 0; hour < kHoursPerDay; ++hour) {
    const int abs_hour = day * kHoursPerDay + hour;

    // Disease progression at the top of the hour.
    for (int i = 0; i < m; ++i) {
      HealthState& h = world.individuals[i].health;
      if (h.kind == Health::kAsymptomatic && abs_hour - h.infected_hour >= incubation_hours) {
        h.kind = Health::kSymptomatic;
        h.onset_hour = abs_hour;
        ++out.new_discoveries;
        if (!world.first_discovery_day) world.first_discovery_day = day;
      } else if (h.kind == Health::kSymptomatic && abs_hour - h.onset_hour >= treatment_hours) {
        h.kind = Health::kRecovered;
      }
      if (h.kind == Health::kSymptomatic) hospitalized_today[i] = 1;
    }

    for (auto& f : frame) f.clear();
    infectious.clear();
    for (int i = 0; i < m; ++i) {
      Individual& ind = world.individuals[i];
      allow[i] = allowance_for(ind, ind.current_action, plans[i], day, hour);
      ind.location = allow[i].location;
      if (ind.location == kHospital) continue;
      frame[ind.location].push_back(i);
      if (allow[i].records_visit) visits->add_hour(i, ind.location);
      if (ind.health.kind == Health::kAsymptomatic && ind.health.infected_hour < abs_hour &&
          (allow[i].acquaintance_contacts || allow[i].stranger_contacts)) {
        infectious.push_back(i);
      }
    }

    auto infect = [&](int j, int by) {
      if (pending_infector[j] < 0) {
        newly_infected.push_back(j);
        pending_infector[j] = by;
      } else {
        pending_infector[j] = std::min(pending_infector[j], by);
      }
    };

    for (int i : infectious) {
      const int loc = world.individuals[i].location;
      int acquaintances_present = 0;
      for (int j : graph.neighbors(i)) {
        if (world.individuals[j].location != loc) continue;
        ++acquaintances_present;
        if (!allow[i].acquaintance_contacts || !allow[j].acquaintance_contacts) continue;
        if (world.individuals[j].health.kind != Health::kSusceptible) continue;
        if (keyed_uniform(cfg.rng_seed, Stream::kAcquaintanceContact,
                          static_cast<std::uint64_t>(abs_hour), static_cast<std::uint64_t>(i),
                          static_cast<std::uint64_t>(j)) < cfg.p_c) {
          infect(j, i);
        }
      }
      if (!allow[i].stranger_contacts) continue;
      const auto& here = frame[loc];
      const int candidates = static_cast<int>(here.size()) - 1 - acquaintances_present;
      const int k = std::min(cfg.strangers_per_hour, candidates);
      if (k <= 0) continue;
      KeyedRng sampler(cfg.rng_seed, Stream::kStrangerSample, static_cast<std::uint64_t>(abs_hour),
                       static_cast<std::uint64_t>(i));
      chosen.clear();
      while (static_cast<int>(chosen.size()) < k) {
        const int j = here[sampler.below(here.size())];
        if (j == i || graph.connected(i, j) ||
            std::find(chosen.begin(), chosen.end(), j) != chosen.end()) {
          continue;
        }
        chosen.push_back(j);
      }
      for (int j : chosen) {
        if (!allow[j].stranger_contacts) continue;
        if (world.individuals[j].health.kind != Health::kSusceptible) continue;
        if (keyed_uniform(cfg.rng_seed, Stream::kStrangerContact,
                          static_cast<std::uint64_t>(abs_hour), static_cast<std::uint64_t>(i),
                          static_cast<std::uint64_t>(j)) < cfg.p_s) {
          infect(j, i);
        }
      }
    }

    for (int j : newly_infected) {
      Individual& ind = world.individuals[j];
      ind.health.kind = Health::kAsymptomatic;
      ind.health.infected_hour = abs_hour;
      ind.infected_by = pending_infector[j];
      pending_infector[j] = -1;
    }
    out.new_infections += static_cast<int>(newly_infected.size());
    newly_infected.clear();
  }

  for (int i = 0; i < m; ++i) {
    if (hospitalized_today[i]) {
      ++out.n_hospitalized;
      continue;
    }
    switch (world.individuals[i].current_action) {
      case Action::kIsolate: ++out.n_isolated; break;
      case Action::kQuarantine: ++out.n_quarantined; break;
      case Action::kConfine: ++out.n_confined; break;
      case Action::kNoIntervention: break;
    }
  }
  world.history.push(std::move(visits));
  ++world.day;
  return out;
}

HealthCounts count_health(const WorldState& world) {
  HealthCounts c;
  for (const Individual& ind : world.individuals) {
    switch (ind.health.kind) {
      case Health::kSusceptible: ++c.susceptible; break;
      case Health::kAsymptomatic: ++c.asymptomatic; break;
      case Health::kSymptomatic: ++c.symptomatic; break;
      case Health::kRecovered: ++c.recovered; break;
    }
  }
  return c;
}

Observation observe(const WorldState& world) {
  Observation obs;
  const int m = world.population();
  obs.day = world.day;
  obs.weekend = is_weekend(world.day);
  obs.intervention_active = world.intervention_active();
  obs.n_areas = world.n_areas();
  obs.health.resize(m);
  obs.onset_day.assign(m, -1);
  obs.current_action.resize(m);
  for (int i = 0; i < m; ++i) {
    const Individual& ind = world.individuals[i];
    switch (ind.health.kind) {
      case Health::kSusceptible:
      case Health::kAsymptomatic:
        obs.health[i] = VisibleHealth::kNotDiscovered;
        break;
      case Health::kSymptomatic:
        obs.health[i] = VisibleHealth::kDiscovered;
        obs.onset_day[i] = ind.health.onset_day();
        break;
      case Health::kRecovered:
        obs.health[i] = VisibleHealth::kRecovered;
        obs.onset_day[i] = ind.health.onset_day();
        break;
    }
    obs.current_action[i] = ind.current_action;
  }
  obs.history = world.history;
  obs.acquaintances = world.acquaintances;
  return obs;
}

}  // namespace epicontrol
