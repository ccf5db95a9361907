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

#ifndef EPICONTROL_OBSERVATION_H_
#define EPICONTROL_OBSERVATION_H_

#include <memory>
#include <vector>

#include "epicontrol/world.h"

namespace epicontrol {

// Health as the policy sees it. Asymptomatic infections are invisible.
enum class VisibleHealth : std::uint8_t { kNotDiscovered, kDiscovered, kRecovered };

// Policy-visible snapshot taken at the start of a day. Immutable once built;
// the visit history shares storage with the world it came from.
struct Observation {
  int day = 0;
  bool weekend = false;
  bool intervention_active = false;
  int n_areas = 0;
  std::vector<VisibleHealth> health;
  // Day symptoms appeared, -1 for individuals never discovered.
  std::vector<int> onset_day;
  std::vector<Action> current_action;
  VisitHistory history;
  std::shared_ptr<const AcquaintanceGraph> acquaintances;

  int population() const { return static_cast<int>(health.size()); }
};

Observation observe(const WorldState& world);

}  // namespace epicontrol

#endif  // EPICONTROL_OBSERVATION_H_
