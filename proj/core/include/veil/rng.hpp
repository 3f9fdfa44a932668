// Copyright 2026 The Veil Authors
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

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>

namespace veil {

/// splitmix64 finalizer. Counter-based: the k-th output of a stream seeded
/// with s is mix64(s + (k+1) * 0x9E3779B97F4A7C15). Any stream position can
/// be computed independently, which keeps published hash families
/// reproducible bit-for-bit from (seed, index) alone.
inline uint64_t mix64(uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Derives an independent subseed from a parent seed and a textual tag.
/// Used to split one master seed into per-purpose streams.
inline uint64_t tagged_seed(uint64_t seed, const std::string& tag) {
  uint64_t h = seed ^ 0xA0761D6478BD642FULL;
  for (unsigned char c : tag) h = mix64(h + 0x9E3779B97F4A7C15ULL * (c + 1));
  return mix64(h);
}

/// Deterministic counter-mode generator (splitmix64 core, Box-Muller for
/// normals). Identifier: "splitmix64-boxmuller-v1".
///
/// Exact procedure, for reimplementation from the generator id:
///   raw(k)      = mix64(seed + (k+1)*0x9E3779B97F4A7C15), k = 0,1,2,...
///   uniform01   = (raw >> 11) * 2^-53                       in [0,1)
///   open01      = ((raw >> 11) + 1) * 2^-53                 in (0,1]
///   gaussians come in pairs from two consecutive raws u1=open01, u2=uniform01:
///     r = sqrt(-2 ln u1);  z0 = r cos(2*pi*u2);  z1 = r sin(2*pi*u2)
class CounterRng {
 public:
  explicit CounterRng(uint64_t seed) : seed_(seed) {}

  uint64_t next_u64() { return mix64(seed_ + (++counter_) * 0x9E3779B97F4A7C15ULL); }

  /// Uniform double in [0,1).
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform double in (0,1]; safe as a log argument.
  double open01() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = open01();
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  /// Uniform integer in [0, n). Unbiased via rejection on the top range.
  uint64_t below(uint64_t n) {
    if (n == 0) return 0;
    uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t v;
    do {
      v = next_u64();
    } while (v >= limit);
    return v % n;
  }

  /// Uniform in [lo, hi] inclusive.
  int64_t range(int64_t lo, int64_t hi) {
    return lo + static_cast<int64_t>(below(static_cast<uint64_t>(hi - lo + 1)));
  }

  bool chance(double p) { return uniform01() < p; }

  /// Poisson sample by inversion; fine for small means.
  int poisson(double mean) {
    double l = std::exp(-mean);
    double p = 1.0;
    int k = 0;
    do {
      ++k;
      p *= uniform01();
    } while (p > l);
    return k - 1;
  }

 private:
  uint64_t seed_;
  uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace veil
