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

#ifndef EPICONTROL_WORLD_CONFIG_H_
#define EPICONTROL_WORLD_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <string>

namespace epicontrol {

// Simulator parameters. Defaults reproduce the calibrated default city.
struct WorldConfig {
  int n_areas = 11;
  int population = 10000;
  double p_s = 0.01;  // per stranger contact-hour
  double p_c = 0.05;  // per acquaintance contact-hour
  int incubation_days = 3;
  int treatment_days = 10;
  int t_start = 1;
  int horizon_days = 60;
  int initial_seed_count = 1;
  double mean_acquaintance_degree = 1.7;
  int strangers_per_hour = 1;
  double commercial_visit_prob = 0.5;
  // Weekday commercial area resampled every day instead of a fixed
  // per-individual favourite.
  bool changeable_mobility = false;
  std::uint64_t rng_seed = 1;

  // Throws ConfigError naming the first invalid field.
  void validate() const;
};

// Ordered key -> value pairs read from a `key = value` text file. Blank lines
// and lines starting with '#' are ignored.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_key_values(std::istream& in);
KeyValues read_key_values(const std::filesystem::path& path);

// Applies `key` to `cfg`. Returns false when the key is not a WorldConfig
// field; throws ConfigError when the value does not parse.
bool apply_world_key(WorldConfig& cfg, const std::string& key,
                     const std::string& value);

// Renders every field as `key = value` lines, round-trippable through
// parse_key_values.
std::string to_key_values(const WorldConfig& cfg);

// Value parsers shared by the config loaders.
int parse_int_field(const std::string& key, const std::string& value);
double parse_double_field(const std::string& key, const std::string& value);
bool parse_bool_field(const std::string& key, const std::string& value);
std::uint64_t parse_u64_field(const std::string& key, const std::string& value);

}  // namespace epicontrol

#endif  // EPICONTROL_WORLD_CONFIG_H_
