// Copyright 2026 The bioret Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef BIORET_RANDOM_HPP_
#define BIORET_RANDOM_HPP_

#include <cmath>
#include <cstdint>
#include <string_view>

namespace bioret {

/// 64-bit FNV-1a over raw bytes. Used for content checksums and for keying
/// per-item random streams, so the value must never change across releases.
inline std::uint64_t fnv1a64(std::string_view bytes,
                             std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based SplitMix64 stream. Every draw is a pure function of
/// (key, counter), so streams can be split per item without coordination:
///
///   state_0 = splitmix64_mix(seed) ^ fnv1a64(item_key)
///   x_i     = splitmix64_mix(state_0 + (i + 1) * 0x9e3779b97f4a7c15)
///   uniform index in [0, n) = high 64 bits of x_i * n
///
/// The recipe is deliberately simple so tests can re-derive draws.
class Rng {
 public:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

  explicit Rng(std::uint64_t seed) : state_(splitmix64_mix(seed)) {}
  Rng(std::uint64_t seed, std::string_view item_key)
      : state_(splitmix64_mix(seed) ^ fnv1a64(item_key)) {}

  std::uint64_t next_u64() {
    state_ += kGamma;
    return splitmix64_mix(state_);
  }

  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t uniform_index(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller (one value per call, no caching so the
  /// stream position stays easy to reason about).
  double normal() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

 private:
  std::uint64_t state_;
};

}  // namespace bioret

#endif  // BIORET_RANDOM_HPP_
