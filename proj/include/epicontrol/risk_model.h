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

#ifndef EPICONTROL_RISK_MODEL_H_
#define EPICONTROL_RISK_MODEL_H_

#include <ostream>
#include <vector>

#include "epicontrol/observation.h"

namespace epicontrol {

struct RiskConfig {
  int lookback_days = 5;
  double p_s = 0.01;
  double p_c = 0.05;

  void validate() const;
};

// Estimated infection probability per individual. p_infe[i] == 1 - p_hel[i].
struct RiskVector {
  std::vector<double> p_infe;
  std::vector<double> p_hel;

  int size() const { return static_cast<int>(p_infe.size()); }
};

// Contact-tracing style estimate from the discovered cases and the last
// `lookback_days` of visit history.
//
// For every area-day (a, t) an individual visited, the healthy probability is
// multiplied by (1 - p_s * infected_visitors(a, t) / visitors(a, t)), where
// infected visitors are discovered individuals who were there on or before
// their symptom onset day. A single further factor (1 - p_c) applies when any
// discovered acquaintance shared an area-day with the individual in the
// window. Currently discovered individuals get p_infe = 1; recovered ones
// get 0. Missing days at the start of an episode are treated as empty.
RiskVector estimate_risk(const Observation& obs, const VisitHistory& history,
                         const RiskConfig& cfg);

inline RiskVector estimate_risk(const Observation& obs, const RiskConfig& cfg) {
  return estimate_risk(obs, obs.history, cfg);
}

// Rows `day,individual_id,p_infe` for every individual.
void write_risk_rows(std::ostream& out, int day, const RiskVector& risk);

}  // namespace epicontrol

#endif  // EPICONTROL_RISK_MODEL_H_
