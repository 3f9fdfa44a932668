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

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "veil/bytes.hpp"

namespace veil {

/// Bit string produced by hashing one feature vector. Bits are stored
/// packed, MSB-first within each byte, so a code serializes to exactly
/// ceil(bits/8) bytes.
class HashCode {
 public:
  HashCode() = default;
  explicit HashCode(size_t bit_count) : bits_(bit_count), data_((bit_count + 7) / 8, 0) {}

  /// Parses "10101"-style strings; handy in tests.
  static HashCode from_bit_string(const std::string& s);
  static HashCode from_bytes(std::span<const uint8_t> bytes, size_t bit_count);

  size_t size() const { return bits_; }
  bool bit(size_t i) const { return (data_[i / 8] >> (7 - i % 8)) & 1; }
  void set_bit(size_t i, bool v);

  const Bytes& bytes() const { return data_; }
  std::string to_bit_string() const;

  bool operator==(const HashCode&) const = default;

 private:
  size_t bits_ = 0;
  Bytes data_;
};

/// Number of differing bits. Throws on length mismatch.
size_t hamming(const HashCode& a, const HashCode& b);

/// A published family of m random-projection threshold functions over R^D:
/// bit i of the code is 1 iff dot(projection_i, x) / window >= 1.
///
/// Projections are drawn i.i.d. N(0,1) per coordinate from the counter
/// generator in rng.hpp, so any party holding (seed, m, window, dim) and the
/// generator id derives the identical family.
class LshFamily {
 public:
  LshFamily(size_t m, double window, size_t dim, uint64_t seed);

  /// Test constructor with explicit projection vectors.
  LshFamily(std::vector<std::vector<double>> projections, double window);

  HashCode hash(std::span<const double> x) const;

  size_t bits() const { return m_; }
  double window() const { return window_; }
  size_t dim() const { return dim_; }
  uint64_t seed() const { return seed_; }

  static constexpr const char* kGeneratorId = "splitmix64-boxmuller-v1";

  /// Wire form of the family announcement: {m, W, D, seed, generator id}.
  Bytes encode_announcement() const;
  struct Announcement {
    uint64_t m;
    double window;
    uint64_t dim;
    uint64_t seed;
    std::string generator_id;
  };
  static Announcement decode_announcement(std::span<const uint8_t> data);

  const std::vector<std::vector<double>>& projections() const { return proj_; }

 private:
  size_t m_;
  double window_;
  size_t dim_;
  uint64_t seed_ = 0;
  std::vector<std::vector<double>> proj_;
};

/// One family per feature kind, all derived from a master seed with
/// kind-tagged subseeds. Kinds are identified by their tag string so the
/// suite stays decoupled from any particular graph type.
class LshSuite {
 public:
  LshSuite(size_t m, double window, uint64_t master_seed,
           std::span<const std::pair<std::string, size_t>> kinds);

  const LshFamily& family_for_kind(const std::string& kind) const;
  size_t bits() const { return m_; }
  double window() const { return window_; }
  uint64_t master_seed() const { return master_seed_; }

 private:
  size_t m_;
  double window_;
  uint64_t master_seed_;
  std::map<std::string, LshFamily> by_kind_;
};

}  // namespace veil
