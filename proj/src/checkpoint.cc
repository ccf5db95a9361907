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

#include "epicontrol/checkpoint.h"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "epicontrol/errors.h"
#include "epicontrol/world_config.h"

namespace epicontrol {
namespace {

constexpr std::array<char, 8> kMagic = {'E', 'P', 'C', 'K', 'P', 'T', '0', '1'};
constexpr std::uint32_t kMaxName = 256;

void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(b, 4);
}

std::uint32_t get_u32(std::istream& in, const std::string& path) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) {
    throw ConfigError("checkpoint", fmt::format("{}: truncated file", path));
  }
  return b[0] | (b[1] << 8) | (b[2] << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

TrunkKind parse_trunk(const std::string& s) {
  if (s == "contact_gnn") return TrunkKind::kContactGnn;
  if (s == "mlp") return TrunkKind::kMlp;
  throw ConfigError("trunk", fmt::format("unknown trunk '{}'", s));
}

}  // namespace

std::string trunk_name(TrunkKind trunk) {
  return trunk == TrunkKind::kMlp ? "mlp" : "contact_gnn";
}

std::filesystem::path manifest_path(const std::filesystem::path& path) {
  std::filesystem::path m = path;
  m += ".manifest";
  return m;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("checkpoint", fmt::format("cannot write {}", path.string()));
    out.write(kMagic.data(), kMagic.size());
    std::uint32_t count = 0;
    ckpt.params.for_each([&](const std::string&, const Matrix&) { ++count; });
    put_u32(out, count);
    ckpt.params.for_each([&](const std::string& name, const Matrix& m) {
      put_u32(out, static_cast<std::uint32_t>(name.size()));
      out.write(name.data(), static_cast<std::streamsize>(name.size()));
      put_u32(out, 2);
      put_u32(out, static_cast<std::uint32_t>(m.rows()));
      put_u32(out, static_cast<std::uint32_t>(m.cols()));
      for (double v : m.values()) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    });
    if (!out) throw ConfigError("checkpoint", fmt::format("write failed for {}", path.string()));
  }
  std::ofstream man(manifest_path(path), std::ios::trunc);
  if (!man) throw ConfigError("checkpoint", "cannot write manifest");
  const CheckpointMeta& m = ckpt.meta;
  man << "# epicontrol checkpoint manifest\n"
      << "layers = " << m.shape.layers << "\n"
      << "hidden = " << m.shape.hidden << "\n"
      << "seed = " << m.seed << "\n"
      << "trunk = " << trunk_name(m.shape.trunk) << "\n"
      << "shared_weights = " << (m.shape.shared_weights ? "true" : "false") << "\n"
      << "population = " << m.population << "\n"
      << "n_areas = " << m.n_areas << "\n";
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const std::string where = path.string();
  Checkpoint ckpt;
  const KeyValues kv = read_key_values(manifest_path(path));
  auto need = [&](const char* key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw ConfigError(key, fmt::format("missing from {}.manifest", where));
    return it->second;
  };
  ckpt.meta.shape.layers = parse_int_field("layers", need("layers"));
  ckpt.meta.shape.hidden = parse_int_field("hidden", need("hidden"));
  ckpt.meta.seed = parse_u64_field("seed", need("seed"));
  ckpt.meta.shape.trunk = parse_trunk(need("trunk"));
  ckpt.meta.shape.shared_weights = parse_bool_field("shared_weights", need("shared_weights"));
  ckpt.meta.population = parse_int_field("population", need("population"));
  ckpt.meta.n_areas = parse_int_field("n_areas", need("n_areas"));

  // Builds the expected layout, then fills it from the container.
  ckpt.params = init_params(0, ckpt.meta.shape);
  std::map<std::string, Matrix*> slots;
  ckpt.params.for_each([&](const std::string& name, Matrix& m) { slots[name] = &m; });

  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("checkpoint", fmt::format("cannot open {}", where));
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw ConfigError("checkpoint", fmt::format("{}: not a checkpoint file", where));
  }
  const std::uint32_t count = get_u32(in, where);
  if (count != slots.size()) {
    throw ConfigError("checkpoint", fmt::format("{}: {} arrays, manifest implies {}", where,
                                                count, slots.size()));
  }
  for (std::uint32_t a = 0; a < count; ++a) {
    const std::uint32_t len = get_u32(in, where);
    if (len == 0 || len > kMaxName) {
      throw ConfigError("checkpoint", fmt::format("{}: bad array name length", where));
    }
    std::string name(len, '\0');
    if (!in.read(name.data(), len)) throw ConfigError("checkpoint", where + ": truncated file");
    auto it = slots.find(name);
    if (it == slots.end() || it->second == nullptr) {
      throw ConfigError("checkpoint", fmt::format("{}: unexpected array '{}'", where, name));
    }
    Matrix& m = *it->second;
    it->second = nullptr;
    if (get_u32(in, where) != 2) {
      throw ConfigError("checkpoint", fmt::format("{}: array '{}' is not rank 2", where, name));
    }
    const std::uint32_t rows = get_u32(in, where);
    const std::uint32_t cols = get_u32(in, where);
    if (rows != static_cast<std::uint32_t>(m.rows()) ||
        cols != static_cast<std::uint32_t>(m.cols())) {
      throw ConfigError("checkpoint", fmt::format("{}: array '{}' is {}x{}, expected {}x{}", where,
                                                  name, rows, cols, m.rows(), m.cols()));
    }
    for (double& v : m.values()) v = std::bit_cast<float>(get_u32(in, where));
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw ConfigError("checkpoint", fmt::format("{}: trailing bytes", where));
  }
  return ckpt;
}

void check_compatible(const CheckpointMeta& meta, int population, int n_areas, int layers) {
  if (meta.population != population) {
    throw ConfigError("population", fmt::format("checkpoint trained for M={}, scenario has M={}",
                                                meta.population, population));
  }
  if (meta.n_areas != n_areas) {
    throw ConfigError("n_areas", fmt::format("checkpoint trained for N={}, scenario has N={}",
                                             meta.n_areas, n_areas));
  }
  if (meta.shape.trunk == TrunkKind::kContactGnn && meta.shape.layers != layers) {
    throw ConfigError("layers", fmt::format("checkpoint has K={}, expected K={}",
                                            meta.shape.layers, layers));
  }
}

}  // namespace epicontrol
