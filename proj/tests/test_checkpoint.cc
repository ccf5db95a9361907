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

#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "epicontrol/checkpoint.h"
#include "epicontrol/errors.h"
#include "support/scratch_dir.h"

using namespace epicontrol;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const std::filesystem::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << s;
}

Checkpoint sample_checkpoint(bool shared, TrunkKind trunk = TrunkKind::kContactGnn) {
  Checkpoint c;
  c.meta.shape = {3, 5, shared, trunk};
  c.meta.seed = 77;
  c.meta.population = 500;
  c.meta.n_areas = 11;
  c.params = init_params(77, c.meta.shape);
  return c;
}

}  // namespace

TEST_CASE("checkpoint round trip rounds to single precision") {
  epicontrol::testing::ScratchDir dir("ckpt_roundtrip");
  for (bool shared : {false, true}) {
    for (TrunkKind trunk : {TrunkKind::kContactGnn, TrunkKind::kMlp}) {
      const Checkpoint c = sample_checkpoint(shared, trunk);
      const auto path = dir.path() / "model.ckpt";
      save_checkpoint(path, c);
      const Checkpoint back = load_checkpoint(path);
      CHECK(back.meta.shape == c.meta.shape);
      CHECK(back.meta.seed == 77);
      CHECK(back.meta.population == 500);
      CHECK(back.meta.n_areas == 11);
      std::vector<double> want, got;
      c.params.for_each([&](const std::string&, const Matrix& m) {
        for (double v : m.values()) want.push_back(static_cast<float>(v));
      });
      back.params.for_each([&](const std::string&, const Matrix& m) {
        for (double v : m.values()) got.push_back(v);
      });
      CHECK(want == got);
    }
  }
}

TEST_CASE("container layout is little-endian float32") {
  epicontrol::testing::ScratchDir dir("ckpt_layout");
  Checkpoint c = sample_checkpoint(false);
  c.params.layers[0].w_area(0, 0) = 1.5;
  const auto path = dir.path() / "model.ckpt";
  save_checkpoint(path, c);
  const std::string bytes = slurp(path);
  CHECK(bytes.substr(0, 8) == "EPCKPT01");
  const std::string first = "layer1.w_area";
  // magic, count, name length, name, rank, rows, cols, then values
  const std::size_t at = 8 + 4 + 4 + first.size() + 4 + 8;
  CHECK(bytes.substr(16, first.size()) == first);
  const unsigned char* v = reinterpret_cast<const unsigned char*>(bytes.data() + at);
  CHECK(v[0] == 0x00);
  CHECK(v[1] == 0x00);
  CHECK(v[2] == 0xC0);
  CHECK(v[3] == 0x3F);
  const std::string manifest = slurp(manifest_path(path));
  CHECK(manifest.find("layers = 3") != std::string::npos);
  CHECK(manifest.find("hidden = 5") != std::string::npos);
  CHECK(manifest.find("seed = 77") != std::string::npos);
}

TEST_CASE("corrupt or mismatched checkpoints are configuration errors") {
  epicontrol::testing::ScratchDir dir("ckpt_bad");
  const auto path = dir.path() / "model.ckpt";
  save_checkpoint(path, sample_checkpoint(false));
  const std::string good = slurp(path);
  const std::string manifest = slurp(manifest_path(path));

  spit(path, "NOTACKPT" + good.substr(8));
  CHECK_THROWS_AS(load_checkpoint(path), ConfigError);
  spit(path, good.substr(0, good.size() - 3));
  CHECK_THROWS_AS(load_checkpoint(path), ConfigError);
  spit(path, good + "x");
  CHECK_THROWS_AS(load_checkpoint(path), ConfigError);

  spit(path, good);
  std::string wider = manifest;
  wider.replace(wider.find("hidden = 5"), 10, "hidden = 6");
  spit(manifest_path(path), wider);
  CHECK_THROWS_AS(load_checkpoint(path), ConfigError);
  spit(manifest_path(path), "layers = 3\n");
  CHECK_THROWS_AS(load_checkpoint(path), ConfigError);
  CHECK_THROWS_AS(load_checkpoint(dir.path() / "missing.ckpt"), ConfigError);
}

TEST_CASE("compatibility with the scenario") {
  const CheckpointMeta m = sample_checkpoint(false).meta;
  CHECK_NOTHROW(check_compatible(m, 500, 11, 3));
  CHECK_THROWS_AS(check_compatible(m, 10000, 11, 3), ConfigError);
  CHECK_THROWS_AS(check_compatible(m, 500, 98, 3), ConfigError);
  CHECK_THROWS_AS(check_compatible(m, 500, 11, 2), ConfigError);
}
