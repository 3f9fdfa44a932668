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

#include <span>
#include <string>
#include <vector>

#include "veil/bigint.hpp"

namespace veil {

/// Secret dimension permutation. `code` holds a permutation of {1..N};
/// applying it moves input dimension code[j] (1-based) to output slot j.
struct ScrambleCode {
  std::vector<unsigned> code;

  size_t dim() const { return code.size(); }
  bool operator==(const ScrambleCode&) const = default;
};

/// Decodes R mod N! into a permutation via the factorial number system:
/// walking k = N-1 down to 0, pick index R / k! from the sorted remainder
/// set, then keep R mod k!. R = 0 yields the identity; R uniform over
/// [0, N!) covers each permutation exactly once.
ScrambleCode scramble_code(const BigInt& r, size_t n);

std::vector<double> apply_scramble(std::span<const double> x, const ScrambleCode& c);
std::vector<double> invert_scramble(std::span<const double> y, const ScrambleCode& c);

BigInt factorial(size_t n);

/// Per-kind code: hashes R together with the kind tag into a wide value,
/// reduces it mod N!, and decodes. One agreed R thus serves every vector
/// kind with independent-looking permutations.
ScrambleCode derive_code_for_kind(const BigInt& r, const std::string& kind_tag, size_t n);

}  // namespace veil
