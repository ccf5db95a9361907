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

#ifndef EPICONTROL_KEYED_RNG_H_
#define EPICONTROL_KEYED_RNG_H_

#include <cstdint>

namespace epicontrol {

// Identifies which simulation decision a keyed draw belongs to. Draws for
// different purposes never share a stream.
enum class Stream : std::uint64_t {
  kWorldBuild = 1,
  kDayPlan = 2,
  kAcquaintanceContact = 3,
  kStrangerSample = 4,
  kStrangerContact = 5,
  kBaseline = 6,
  kTraining = 7,
};

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t mix_key(std::uint64_t seed, Stream stream,
                                std::uint64_t a = 0, std::uint64_t b = 0,
                                std::uint64_t c = 0) {
  std::uint64_t h = splitmix64(seed ^ 0x243f6a8885a308d3ULL);
  h = splitmix64(h ^ static_cast<std::uint64_t>(stream));
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ (b + 0x13198a2e03707344ULL));
  return splitmix64(h ^ (c + 0xa4093822299f31d0ULL));
}

// Counter-based random stream addressed by (seed, purpose, key...). Every
// random decision in the simulator is drawn from a stream keyed by what it
// decides, so changing one individual's behaviour never shifts the draws
// seen by anyone else (common random numbers).
class KeyedRng {
 public:
  KeyedRng(std::uint64_t seed, Stream stream, std::uint64_t a = 0,
           std::uint64_t b = 0, std::uint64_t c = 0)
      : state_(mix_key(seed, stream, a, b, c)) {}

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * n) >> 64);
  }

 private:
  std::uint64_t state_;
};

inline double keyed_uniform(std::uint64_t seed, Stream stream, std::uint64_t a,
                            std::uint64_t b = 0, std::uint64_t c = 0) {
  return KeyedRng(seed, stream, a, b, c).uniform();
}

}  // namespace epicontrol

#endif  // EPICONTROL_KEYED_RNG_H_
