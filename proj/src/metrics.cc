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

#include "epicontrol/metrics.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "epicontrol/errors.h"

namespace epicontrol {

DayCounts counts_from(const DayOutcome& outcome) {
  return {outcome.new_infections, outcome.n_hospitalized, outcome.n_isolated,
          outcome.n_quarantined, outcome.n_confined};
}

double daily_cost(const DayCounts& c, const CostWeights& w) {
  return w.hospitalized * static_cast<double>(c.n_hospitalized) +
         w.isolated * static_cast<double>(c.n_isolated) +
         w.quarantined * static_cast<double>(c.n_quarantined) +
         w.confined * static_cast<double>(c.n_confined);
}

double score(double infections, double cost, const SoftThresholds& t) {
  return std::exp(infections / t.infections) + std::exp(cost / t.cost);
}

std::string format_score(double value) {
  if (value > kScoreDisplayCap) return ">10000";
  return fmt::format("{:.2f}", value);
}

double EpisodeMetrics::accumulate_day(const DayCounts& c) {
  if (c.new_infections < 0 || c.n_hospitalized < 0 || c.n_isolated < 0 || c.n_quarantined < 0 ||
      c.n_confined < 0) {
    throw ContractError("accumulate_day: negative count");
  }
  const double delta = daily_cost(c, weights_);
  days_.push_back(c);
  daily_costs_.push_back(delta);
  infections_ += c.new_infections;
  cost_ += delta;
  return delta;
}

void write_daily_csv(std::ostream& out, const EpisodeMetrics& metrics,
                     const std::vector<std::string>& header_comments) {
  for (const auto& line : header_comments) out << "# " << line << '\n';
  out << "day,new_infections,cum_I,n_h,n_i,n_q,n_c,daily_Q\n";
  long long cumulative = 0;
  for (std::size_t d = 0; d < metrics.days().size(); ++d) {
    const DayCounts& c = metrics.days()[d];
    cumulative += c.new_infections;
    out << fmt::format("{},{},{},{},{},{},{},{:.17g}\n", d, c.new_infections, cumulative,
                       c.n_hospitalized, c.n_isolated, c.n_quarantined, c.n_confined,
                       metrics.daily_costs()[d]);
  }
}

double score_from_daily_csv(std::istream& in, const CostWeights& weights,
                            const SoftThresholds& thresholds) {
  EpisodeMetrics metrics(weights, thresholds);
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    std::istringstream row(line);
    std::string field;
    std::vector<std::string> cells;
    while (std::getline(row, field, ',')) cells.push_back(field);
    if (cells.size() != 8) throw ContractError("score_from_daily_csv: malformed row '" + line + "'");
    DayCounts c{std::stoll(cells[1]), std::stoll(cells[3]), std::stoll(cells[4]),
                std::stoll(cells[5]), std::stoll(cells[6])};
    metrics.accumulate_day(c);
  }
  return metrics.score();
}

std::string summary_json(const EpisodeSummary& s) {
  nlohmann::ordered_json j;
  j["scenario"] = s.scenario;
  j["seed"] = s.seed;
  j["I"] = s.infections;
  j["Q"] = s.cost;
  j["score"] = s.score;
  j["days_simulated"] = s.days_simulated;
  j["guard_triggered"] = s.guard_triggered;
  return j.dump();
}

MetricsMean mean_over(std::vector<EpisodeSummary> episodes) {
  std::sort(episodes.begin(), episodes.end(), [](const auto& a, const auto& b) {
    return a.seed < b.seed;
  });
  MetricsMean mean;
  for (const auto& e : episodes) {
    mean.infections += static_cast<double>(e.infections);
    mean.cost += e.cost;
    mean.score += e.score;
  }
  mean.episodes = static_cast<int>(episodes.size());
  if (mean.episodes > 0) {
    mean.infections /= mean.episodes;
    mean.cost /= mean.episodes;
    mean.score /= mean.episodes;
  }
  return mean;
}

}  // namespace epicontrol
