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

#ifndef EPICONTROL_WORLD_H_
#define EPICONTROL_WORLD_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "epicontrol/world_config.h"

namespace epicontrol {

inline constexpr int kHoursPerDay = 24;
// Location marker for hospitalized individuals; they are in no area.
inline constexpr int kHospital = -1;
// Days of visit history retained by the world. Covers the risk-model
// lookback, the contact-count window of the degree baselines and the GNN depth.
inline constexpr int kDefaultHistoryDays = 7;

enum class Health : std::uint8_t {
  kSusceptible,
  kAsymptomatic,
  kSymptomatic,
  kRecovered,
};

// Susceptible -> Asymptomatic(infected_hour) -> Symptomatic(onset_hour) ->
// Recovered. Hours are absolute simulation hours (day * 24 + hour).
struct HealthState {
  Health kind = Health::kSusceptible;
  int infected_hour = -1;
  int onset_hour = -1;

  int infected_day() const { return infected_hour < 0 ? -1 : infected_hour / kHoursPerDay; }
  int onset_day() const { return onset_hour < 0 ? -1 : onset_hour / kHoursPerDay; }
  bool infected() const { return kind != Health::kSusceptible; }

  friend bool operator==(const HealthState&, const HealthState&) = default;
};

// Stringency-ordered daily intervention.
enum class Action : std::uint8_t {
  kNoIntervention = 0,
  kConfine = 1,
  kQuarantine = 2,
  kIsolate = 3,
};
inline constexpr int kNumActions = 4;

std::string_view action_name(Action action);

enum class AreaCategory : std::uint8_t { kResidential, kWorking, kCommercial };

struct Area {
  int id = 0;
  AreaCategory category = AreaCategory::kResidential;

  friend bool operator==(const Area&, const Area&) = default;
};

struct Individual {
  int id = 0;
  int residential_area = 0;
  int working_area = 0;
  // Weekday post-work destination unless mobility is changeable.
  int favourite_commercial_area = 0;
  HealthState health;
  Action current_action = Action::kNoIntervention;
  int location = 0;
  // Who transmitted the infection; -1 for seeds and the uninfected.
  int infected_by = -1;

  friend bool operator==(const Individual&, const Individual&) = default;
};

// Symmetric, irreflexive acquaintance relation in compressed adjacency form.
// Neighbour lists are sorted.
class AcquaintanceGraph {
 public:
  AcquaintanceGraph() = default;
  AcquaintanceGraph(int n, std::vector<std::pair<int, int>> edges);

  int size() const { return static_cast<int>(offsets_.empty() ? 0 : offsets_.size() - 1); }
  std::span<const int> neighbors(int i) const {
    return {neighbors_.data() + offsets_[i], neighbors_.data() + offsets_[i + 1]};
  }
  int degree(int i) const { return offsets_[i + 1] - offsets_[i]; }
  bool connected(int i, int j) const;
  std::size_t edge_count() const { return neighbors_.size() / 2; }

  friend bool operator==(const AcquaintanceGraph&, const AcquaintanceGraph&) = default;

 private:
  std::vector<int> offsets_;
  std::vector<int> neighbors_;
};

// Hours each individual spent in each area during one day (M x N).
class DayVisits {
 public:
  DayVisits(int population, int n_areas)
      : population_(population), n_areas_(n_areas),
        hours_(static_cast<std::size_t>(population) * n_areas, 0) {}

  int population() const { return population_; }
  int n_areas() const { return n_areas_; }
  std::uint8_t hours(int i, int area) const { return hours_[index(i, area)]; }
  std::span<const std::uint8_t> row(int i) const {
    return {hours_.data() + index(i, 0), static_cast<std::size_t>(n_areas_)};
  }
  void add_hour(int i, int area) { ++hours_[index(i, area)]; }
  void set_hours(int i, int area, std::uint8_t h) { hours_[index(i, area)] = h; }
  // Distinct individuals with at least one hour in `area`.
  int visitors(int area) const;

  friend bool operator==(const DayVisits&, const DayVisits&) = default;

 private:
  std::size_t index(int i, int area) const {
    return static_cast<std::size_t>(i) * n_areas_ + area;
  }

  int population_;
  int n_areas_;
  std::vector<std::uint8_t> hours_;
};

// Ring buffer of the most recent `capacity` days. Day matrices are immutable
// once pushed, so copies of the history share storage.
class VisitHistory {
 public:
  explicit VisitHistory(int capacity = kDefaultHistoryDays) : capacity_(capacity) {}

  void push(std::shared_ptr<const DayVisits> day);
  int size() const { return static_cast<int>(days_.size()); }
  int capacity() const { return capacity_; }
  // k = 0 is the most recent completed day; nullptr when not recorded.
  const DayVisits* back(int k) const;

  friend bool operator==(const VisitHistory& a, const VisitHistory& b);

 private:
  int capacity_;
  std::vector<std::shared_ptr<const DayVisits>> days_;  // most recent first
};

struct WorldState {
  WorldConfig config;
  std::vector<Area> areas;
  std::vector<int> residential_areas;
  std::vector<int> working_areas;
  std::vector<int> commercial_areas;
  std::vector<Individual> individuals;
  std::shared_ptr<const AcquaintanceGraph> acquaintances;
  VisitHistory history;
  int day = 0;
  std::optional<int> first_discovery_day;

  int population() const { return static_cast<int>(individuals.size()); }
  int n_areas() const { return static_cast<int>(areas.size()); }
  bool finished() const { return day >= config.horizon_days; }
  // Policy actions take effect from `t_start` days after the first discovery.
  bool intervention_active() const {
    return first_discovery_day && day >= *first_discovery_day + config.t_start;
  }

  friend bool operator==(const WorldState& a, const WorldState& b);
};

struct DayOutcome {
  int day = 0;
  int new_infections = 0;
  int new_discoveries = 0;
  int n_hospitalized = 0;
  int n_isolated = 0;
  int n_quarantined = 0;
  int n_confined = 0;
  bool intervention_active = false;

  friend bool operator==(const DayOutcome&, const DayOutcome&) = default;
};

// What an individual may do during one hour under an action.
struct ContactAllowance {
  // Area occupied this hour, or kHospital.
  int location = kHospital;
  bool acquaintance_contacts = false;
  bool stranger_contacts = false;
  // Whether the hour is written to the visit history.
  bool records_visit = false;
};

bool is_weekend(int day);

// Builds a city per `config`. Deterministic in config.rng_seed.
WorldState build_world(const WorldConfig& config, int history_days = kDefaultHistoryDays);

// Where individual `i` would be at `hour` of `day` without intervention.
int planned_location(const WorldState& world, int i, int day, int hour);

// Location and permitted contacts of `i` at `hour` of the current day when
// assigned `action`. Hospitalized individuals ignore the action.
ContactAllowance intervention_contact_filter(const WorldState& world, int i, Action action,
                                             int hour);

// Advances one day of 24 hourly ticks. Actions are ignored (treated as
// NoIntervention) until the intervention start day.
DayOutcome step_day(WorldState& world, std::span<const Action> actions);

struct HealthCounts {
  int susceptible = 0;
  int asymptomatic = 0;
  int symptomatic = 0;
  int recovered = 0;
  int total() const { return susceptible + asymptomatic + symptomatic + recovered; }
};
HealthCounts count_health(const WorldState& world);

}  // namespace epicontrol

#endif  // EPICONTROL_WORLD_H_
