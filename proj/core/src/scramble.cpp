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

#include "veil/scramble.hpp"

#include <numeric>
#include <stdexcept>

#include "veil/rng.hpp"

namespace veil {

BigInt factorial(size_t n) {
  BigInt f = 1;
  for (size_t k = 2; k <= n; ++k) f *= k;
  return f;
}

ScrambleCode scramble_code(const BigInt& r, size_t n) {
  if (n == 0) throw std::invalid_argument("scramble dimension must be positive");
  if (r < 0) throw std::invalid_argument("negative random number");

  BigInt rem = r % factorial(n);
  std::vector<unsigned> s(n);
  std::iota(s.begin(), s.end(), 1u);

  ScrambleCode out;
  out.code.resize(n);
  // Precompute k! for k = 0..n-1.
  std::vector<BigInt> fact(n);
  fact[0] = 1;
  for (size_t k = 1; k < n; ++k) fact[k] = fact[k - 1] * k;

  for (size_t k = n; k-- > 0;) {
    BigInt idx = rem / fact[k];
    size_t i = idx.convert_to<size_t>();
    out.code[n - 1 - k] = s[i];
    s.erase(s.begin() + static_cast<ptrdiff_t>(i));
    rem %= fact[k];
  }
  return out;
}

std::vector<double> apply_scramble(std::span<const double> x, const ScrambleCode& c) {
  if (x.size() != c.dim()) throw std::invalid_argument("scramble dimension mismatch");
  std::vector<double> out(x.size());
  for (size_t j = 0; j < x.size(); ++j) out[j] = x[c.code[j] - 1];
  return out;
}

std::vector<double> invert_scramble(std::span<const double> y, const ScrambleCode& c) {
  if (y.size() != c.dim()) throw std::invalid_argument("scramble dimension mismatch");
  std::vector<double> out(y.size());
  for (size_t j = 0; j < y.size(); ++j) out[c.code[j] - 1] = y[j];
  return out;
}

namespace {

// Folds the magnitude bytes of R and the tag into one 64-bit seed, then
// expands with the counter generator to cover log2(N!) bits.
uint64_t fold_bigint_seed(const BigInt& r, const std::string& tag) {
  Bytes mag;
  export_bits(r, std::back_inserter(mag), 8);
  uint64_t s = 0x243F6A8885A308D3ULL;  // arbitrary nonzero start
  for (uint8_t b : mag) s = mix64(s ^ (b + 0x9E3779B97F4A7C15ULL));
  return tagged_seed(s, "scramble:" + tag);
}

}  // namespace

ScrambleCode derive_code_for_kind(const BigInt& r, const std::string& kind_tag, size_t n) {
  if (n == 0) throw std::invalid_argument("scramble dimension must be positive");
  BigInt nf = factorial(n);
  size_t words = (msb(nf) + 64) / 64 + 1;

  CounterRng rng(fold_bigint_seed(r, kind_tag));
  BigInt wide = 0;
  for (size_t i = 0; i < words; ++i) {
    wide <<= 64;
    wide += rng.next_u64();
  }
  return scramble_code(wide % nf, n);
}

}  // namespace veil
