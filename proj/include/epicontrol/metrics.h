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

#ifndef EPICONTROL_METRICS_H_
#define EPICONTROL_METRICS_H_

#include <ostream>
#include <string>
#include <vector>

#include "epicontrol/world.h"

namespace epicontrol {

// Scale factors of the intervention cost Q.
struct CostWeights {
  double hospitalized = 1.0;
  double isolated = 0.5;
  double quarantined = 0.3;
  double confined = 0.2;
};

// Soft capacity thresholds of the Score.
struct SoftThresholds {
  double infections = 500.0;
  double cost = 10000.0;
};

struct DayCounts {
  long long new_infections = 0;
  long long n_hospitalized = 0;
  long long n_isolated = 0;
  long long n_quarantined = 0;
  long long n_confined = 0;
};

DayCounts counts_from(const DayOutcome& outcome);

// Weighted intervention headcount of one day.
double daily_cost(const DayCounts& counts, const CostWeights& weights = {});

// exp(I / theta_I) + exp(Q / theta_Q).
double score(double infections, double cost, const SoftThresholds& thresholds = {});

// Scores above this are printed as ">10000".
inline constexpr double kScoreDisplayCap = 10000.0;
std::string format_score(double value);

// Per-day record and running totals of one episode.
class EpisodeMetrics {
 public:
  explicit EpisodeMetrics(CostWeights weights = {}, SoftThresholds thresholds = {})
      : weights_(weights), thresholds_(thresholds) {}

  // Throws ContractError on negative counts. Returns the day's cost.
  double accumulate_day(const DayCounts& counts);

  const std::vector<DayCounts>& days() const { return days_; }
  const std::vector<double>& daily_costs() const { return daily_costs_; }
  long long infections() const { return infections_; }
  double cost() const { return cost_; }
  double score() const { return epicontrol::score(static_cast<double>(infections_), cost_, thresholds_); }
  const CostWeights& weights() const { return weights_; }
  const SoftThresholds& thresholds() const { return thresholds_; }

 private:
  CostWeights weights_;
  SoftThresholds thresholds_;
  std::vector<DayCounts> days_;
  std::vector<double> daily_costs_;
  long long infections_ = 0;
  double cost_ = 0.0;
};

// `day,new_infections,cum_I,n_h,n_i,n_q,n_c,daily_Q`, preceded by the given
// comment lines (each emitted as "# <line>").
void write_daily_csv(std::ostream& out, const EpisodeMetrics& metrics,
                     const std::vector<std::string>& header_comments = {});

// Recomputes Score from a CSV produced by write_daily_csv.
double score_from_daily_csv(std::istream& in, const CostWeights& weights = {},
                            const SoftThresholds& thresholds = {});

struct EpisodeSummary {
  std::string scenario;
  unsigned long long seed = 0;
  long long infections = 0;
  double cost = 0.0;
  double score = 0.0;
  int days_simulated = 0;
  bool guard_triggered = false;
};

std::string summary_json(const EpisodeSummary& summary);

// Mean of I, Q and Score over episodes. Results are independent of the order
// in which episodes are added.
struct MetricsMean {
  double infections = 0.0;
  double cost = 0.0;
  double score = 0.0;
  int episodes = 0;
};
MetricsMean mean_over(std::vector<EpisodeSummary> episodes);

}  // namespace epicontrol

#endif  // EPICONTROL_METRICS_H_
