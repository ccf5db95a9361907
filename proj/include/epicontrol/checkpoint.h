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

#ifndef EPICONTROL_CHECKPOINT_H_
#define EPICONTROL_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>
#include <string>

#include "epicontrol/contact_gnn.h"

namespace epicontrol {

// Written next to the array file as "<path>.manifest" in key = value form.
struct CheckpointMeta {
  NetworkShape shape;
  std::uint64_t seed = 0;
  int population = 0;
  int n_areas = 0;
};

struct Checkpoint {
  CheckpointMeta meta;
  GnnParams params;
};

std::string trunk_name(TrunkKind trunk);

std::filesystem::path manifest_path(const std::filesystem::path& path);

// Values are stored as little-endian float32, so a round trip rounds each
// parameter to single precision.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);

// Throws ConfigError on unreadable files, a corrupt container, or arrays
// that disagree with the manifest's network shape.
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Throws ConfigError when the checkpoint was trained for a different
// population, area count or layer count.
void check_compatible(const CheckpointMeta& meta, int population, int n_areas, int layers);

}  // namespace epicontrol

#endif  // EPICONTROL_CHECKPOINT_H_
