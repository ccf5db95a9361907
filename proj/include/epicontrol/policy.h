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

#ifndef EPICONTROL_POLICY_H_
#define EPICONTROL_POLICY_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "epicontrol/matrix.h"
#include "epicontrol/observation.h"
#include "epicontrol/risk_model.h"

namespace epicontrol {

// Per-individual action thresholds. Row i of `mass` holds the interval
// masses c_1..c_4 (a softmax of the negated actor outputs); row i of
// `thresholds` holds the cumulative sums (c_1, c_1 + c_2, c_1 + c_2 + c_3),
// so 0 <= P_1 <= P_2 <= P_3 <= 1.
struct ThresholdMatrix {
  Matrix mass;        // M x 4
  Matrix log_mass;    // M x 4, computed directly as a log-softmax
  Matrix thresholds;  // M x 3

  int size() const { return mass.rows(); }
};

ThresholdMatrix thresholds_from_values(const Matrix& raw);

struct ActionDecision {
  std::vector<Action> actions;
  // log of the interval mass of the chosen action.
  std::vector<double> log_prob;
  // Categorical entropy of the interval masses.
  std::vector<double> entropy;

  double total_log_prob() const;
  double mean_entropy() const;
};

// Interval rule: p <= P_1 -> NoIntervention, p <= P_2 -> Confine,
// p <= P_3 -> Quarantine, otherwise Isolate. Ties resolve to the less
// stringent action.
Action action_for_probability(double p, double p1, double p2, double p3);

ActionDecision select_actions(const RiskVector& risk, const ThresholdMatrix& thr);

enum class BaselineKind { kNoIntervention, kLockdown, kExpert, kDegreeSample, kDegreeOrder };

struct Baseline {
  BaselineKind kind = BaselineKind::kNoIntervention;
  double threshold = 0.0;  // expert only

  // Accepts no_intervention, lockdown, expert(<theta>), degree_sample,
  // degree_order. Throws ConfigError on anything else.
  static Baseline parse(std::string_view name);
  std::string name() const;
};

// Names accepted by Baseline::parse, with expert shown for both thresholds
// the comparison tables use.
std::vector<std::string> baseline_names();

// Fraction isolated by degree_order.
inline constexpr int kDegreeOrderPercent = 30;
// Contact-count window of degree_order, in days.
inline constexpr int kDegreeOrderWindow = 5;
// degree_sample isolates individuals with more acquaintances than this.
inline constexpr int kDegreeSampleFloor = 4;

// Co-visitor counts summed over the last `window` days: for each area-day an
// individual visited, the other visitors there that day.
std::vector<long long> recent_contact_counts(const Observation& obs, int window);

std::vector<Action> baseline_actions(const Baseline& baseline, const Observation& obs,
                                     const RiskVector& risk, std::uint64_t seed);

}  // namespace epicontrol

#endif  // EPICONTROL_POLICY_H_
