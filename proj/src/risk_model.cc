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

#include "epicontrol/risk_model.h"

#include <algorithm>

#include <fmt/format.h>

#include "epicontrol/errors.h"

namespace epicontrol {

void RiskConfig::validate() const {
  if (lookback_days < 1) throw ConfigError("lookback_days", "must be at least 1");
  if (!(p_s >= 0.0 && p_s <= 1.0)) throw ConfigError("p_s", "outside [0, 1]");
  if (!(p_c >= 0.0 && p_c <= 1.0)) throw ConfigError("p_c", "outside [0, 1]");
}

RiskVector estimate_risk(const Observation& obs, const VisitHistory& history,
                         const RiskConfig& cfg) {
  cfg.validate();
  const int m = obs.population();
  const int n = obs.n_areas;
  RiskVector risk;
  risk.p_hel.assign(m, 1.0);

  const int window = std::min(cfg.lookback_days, history.size());
  std::vector<int> visitors(n);
  std::vector<int> infected(n);
  for (int k = 0; k < window; ++k) {
    const DayVisits& visits = *history.back(k);
    if (visits.population() != m || visits.n_areas() != n) {
      throw ContractError("estimate_risk: visit history does not match observation");
    }
    const int t = obs.day - 1 - k;
    std::fill(visitors.begin(), visitors.end(), 0);
    std::fill(infected.begin(), infected.end(), 0);
    for (int j = 0; j < m; ++j) {
      const bool infectious_visit = obs.onset_day[j] >= 0 && t <= obs.onset_day[j];
      const auto row = visits.row(j);
      for (int a = 0; a < n; ++a) {
        if (row[a] == 0) continue;
        ++visitors[a];
        if (infectious_visit) ++infected[a];
      }
    }
    for (int i = 0; i < m; ++i) {
      if (obs.onset_day[i] >= 0) continue;
      const auto row = visits.row(i);
      double factor = 1.0;
      for (int a = 0; a < n; ++a) {
        if (row[a] == 0 || visitors[a] == 0) continue;
        factor *= 1.0 - cfg.p_s * static_cast<double>(infected[a]) / visitors[a];
      }
      risk.p_hel[i] *= factor;
    }
  }

  if (obs.acquaintances) {
    const AcquaintanceGraph& graph = *obs.acquaintances;
    for (int i = 0; i < m; ++i) {
      if (obs.onset_day[i] >= 0) continue;
      bool exposed = false;
      for (int j : graph.neighbors(i)) {
        if (obs.onset_day[j] < 0) continue;
        for (int k = 0; k < window && !exposed; ++k) {
          const int t = obs.day - 1 - k;
          if (t > obs.onset_day[j]) continue;
          const auto ri = history.back(k)->row(i);
          const auto rj = history.back(k)->row(j);
          for (int a = 0; a < n; ++a) {
            if (ri[a] > 0 && rj[a] > 0) {
              exposed = true;
              break;
            }
          }
        }
        if (exposed) break;
      }
      if (exposed) risk.p_hel[i] *= 1.0 - cfg.p_c;
    }
  }

  risk.p_infe.resize(m);
  for (int i = 0; i < m; ++i) {
    if (obs.health[i] == VisibleHealth::kDiscovered) {
      risk.p_hel[i] = 0.0;
    } else if (obs.health[i] == VisibleHealth::kRecovered) {
      risk.p_hel[i] = 1.0;
    }
    risk.p_infe[i] = 1.0 - risk.p_hel[i];
  }
  return risk;
}

void write_risk_rows(std::ostream& out, int day, const RiskVector& risk) {
  for (int i = 0; i < risk.size(); ++i) {
    out << fmt::format("{},{},{:.9g}\n", day, i, risk.p_infe[i]);
  }
}

}  // namespace epicontrol
