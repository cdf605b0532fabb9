// Copyright 2026 The navsynth Authors.
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

#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace navsynth::rng {

// std::mt19937_64 output is fully specified by the standard; the helpers
// below avoid std::uniform_int_distribution and std::shuffle, whose results
// are implementation-defined, so seeded runs are identical across platforms.

using Engine = std::mt19937_64;

/// splitmix64 finalizer.
inline std::uint64_t mix(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Derives an independent per-item seed from a global seed and an index,
/// so item i's stream does not depend on generation order.
inline std::uint64_t derive_seed(std::uint64_t global_seed, std::uint64_t index) {
  return mix(global_seed ^ mix(index + 1));
}

/// Uniform draw in [0, n). n must be > 0. Multiply-shift reduction.
inline std::uint64_t bounded(Engine& eng, std::uint64_t n) {
  const auto x = eng();
  return static_cast<std::uint64_t>((static_cast<__uint128_t>(x) * n) >> 64);
}

/// Picks a uniformly random element index of a container.
template <typename Container>
std::size_t pick_index(Engine& eng, const Container& c) {
  return static_cast<std::size_t>(bounded(eng, c.size()));
}

/// Fisher-Yates shuffle with platform-stable draws.
template <typename T>
void shuffle(Engine& eng, std::vector<T>& v) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(bounded(eng, i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace navsynth::rng
