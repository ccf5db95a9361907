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

#include "epicontrol/world_config.h"

#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "epicontrol/errors.h"

namespace epicontrol {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

void check_probability(const char* field, double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ConfigError(field, fmt::format("probability {} outside [0, 1]", p));
  }
}

void check_at_least(const char* field, long long value, long long min) {
  if (value < min) {
    throw ConfigError(field, fmt::format("{} is below the minimum {}", value, min));
  }
}

}  // namespace

void WorldConfig::validate() const {
  check_at_least("n_areas", n_areas, 3);
  check_at_least("population", population, 1);
  check_probability("p_s", p_s);
  check_probability("p_c", p_c);
  check_at_least("incubation_days", incubation_days, 1);
  check_at_least("treatment_days", treatment_days, 1);
  check_at_least("t_start", t_start, 0);
  check_at_least("horizon_days", horizon_days, 1);
  check_at_least("initial_seed_count", initial_seed_count, 0);
  if (initial_seed_count > population) {
    throw ConfigError("initial_seed_count", "exceeds population");
  }
  if (!(mean_acquaintance_degree >= 0.0)) {
    throw ConfigError("mean_acquaintance_degree", "must be non-negative");
  }
  check_at_least("strangers_per_hour", strangers_per_hour, 0);
  check_probability("commercial_visit_prob", commercial_visit_prob);
}

KeyValues parse_key_values(std::istream& in) {
  KeyValues out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(fmt::format("line {}", line_no), "expected `key = value`");
    }
    std::string key = trim(std::string_view(body).substr(0, eq));
    std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty()) throw ConfigError(fmt::format("line {}", line_no), "empty key");
    out[std::move(key)] = std::move(value);
  }
  return out;
}

KeyValues read_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open " + path.string());
  return parse_key_values(in);
}

int parse_int_field(const std::string& key, const std::string& value) {
  int out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError(key, "not an integer: '" + value + "'");
  }
  return out;
}

std::uint64_t parse_u64_field(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError(key, "not an unsigned integer: '" + value + "'");
  }
  return out;
}

double parse_double_field(const std::string& key, const std::string& value) {
  std::istringstream in(value);
  in.imbue(std::locale::classic());
  double out = 0.0;
  in >> out;
  if (in.fail() || !in.eof()) throw ConfigError(key, "not a number: '" + value + "'");
  return out;
}

bool parse_bool_field(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError(key, "not a boolean: '" + value + "'");
}

bool apply_world_key(WorldConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "n_areas") cfg.n_areas = parse_int_field(key, value);
  else if (key == "population") cfg.population = parse_int_field(key, value);
  else if (key == "p_s") cfg.p_s = parse_double_field(key, value);
  else if (key == "p_c") cfg.p_c = parse_double_field(key, value);
  else if (key == "incubation_days") cfg.incubation_days = parse_int_field(key, value);
  else if (key == "treatment_days") cfg.treatment_days = parse_int_field(key, value);
  else if (key == "t_start") cfg.t_start = parse_int_field(key, value);
  else if (key == "horizon_days") cfg.horizon_days = parse_int_field(key, value);
  else if (key == "initial_seed_count") cfg.initial_seed_count = parse_int_field(key, value);
  else if (key == "mean_acquaintance_degree") cfg.mean_acquaintance_degree = parse_double_field(key, value);
  else if (key == "strangers_per_hour") cfg.strangers_per_hour = parse_int_field(key, value);
  else if (key == "commercial_visit_prob") cfg.commercial_visit_prob = parse_double_field(key, value);
  else if (key == "changeable_mobility") cfg.changeable_mobility = parse_bool_field(key, value);
  else if (key == "rng_seed") cfg.rng_seed = parse_u64_field(key, value);
  else return false;
  return true;
}

std::string to_key_values(const WorldConfig& cfg) {
  std::string out;
  out += fmt::format("n_areas = {}\n", cfg.n_areas);
  out += fmt::format("population = {}\n", cfg.population);
  out += fmt::format("p_s = {}\n", cfg.p_s);
  out += fmt::format("p_c = {}\n", cfg.p_c);
  out += fmt::format("incubation_days = {}\n", cfg.incubation_days);
  out += fmt::format("treatment_days = {}\n", cfg.treatment_days);
  out += fmt::format("t_start = {}\n", cfg.t_start);
  out += fmt::format("horizon_days = {}\n", cfg.horizon_days);
  out += fmt::format("initial_seed_count = {}\n", cfg.initial_seed_count);
  out += fmt::format("mean_acquaintance_degree = {}\n", cfg.mean_acquaintance_degree);
  out += fmt::format("strangers_per_hour = {}\n", cfg.strangers_per_hour);
  out += fmt::format("commercial_visit_prob = {}\n", cfg.commercial_visit_prob);
  out += fmt::format("changeable_mobility = {}\n", cfg.changeable_mobility);
  out += fmt::format("rng_seed = {}\n", cfg.rng_seed);
  return out;
}

}  // namespace epicontrol
