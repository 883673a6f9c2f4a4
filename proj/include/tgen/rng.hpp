// Copyright 2026 The tgen Authors
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

#ifndef TGEN__RNG_HPP_
#define TGEN__RNG_HPP_

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace tgen
{

// Deterministic splitmix64 stream. Sampling must be bit-reproducible across
// runs and platforms, so no <random> distributions are used anywhere.
class Rng
{
public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64()
  {
    state_ += 0x9E3779B97F4A7C15ULL;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).
  uint64_t uniform_index(uint64_t n) { return n == 0 ? 0 : next_u64() % n; }

  // Standard normal via Box-Muller. Uncached: exactly two uniforms per draw,
  // which keeps derived streams independent of call history.
  double normal()
  {
    double u1 = uniform();
    if (u1 <= 0.0) {
      u1 = 0x1.0p-53;
    }
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  // Categorical draw over unnormalized non-negative weights.
  int categorical(const std::vector<double> & weights)
  {
    double total = 0.0;
    for (double w : weights) {
      total += w;
    }
    if (total <= 0.0) {
      return 0;
    }
    double u = uniform() * total;
    for (size_t i = 0; i < weights.size(); ++i) {
      u -= weights[i];
      if (u < 0.0) {
        return static_cast<int>(i);
      }
    }
    return static_cast<int>(weights.size()) - 1;
  }

private:
  uint64_t state_;
};

inline uint64_t hash_combine(uint64_t seed, uint64_t value)
{
  // boost-style combine on a splitmix-mixed value
  uint64_t z = value + 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return seed ^ (z + 0x9E3779B97F4A7C15ULL + (seed << 6) + (seed >> 2));
}

inline uint64_t hash_string(const std::string & s)
{
  // FNV-1a
  uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

// Derives an independent stream from a root seed and a path of stream keys,
// e.g. (seed, vehicle-id-hash, segment). Used to keep parallelizable work
// deterministic regardless of execution order.
inline Rng derive_stream(uint64_t seed, std::initializer_list<uint64_t> path)
{
  uint64_t h = hash_combine(0x243F6A8885A308D3ULL, seed);
  for (uint64_t p : path) {
    h = hash_combine(h, p);
  }
  return Rng(h);
}

}  // namespace tgen

#endif  // TGEN__RNG_HPP_
