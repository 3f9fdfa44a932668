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

#include "veil/lsh.hpp"

#include <bit>
#include <stdexcept>

#include "veil/rng.hpp"

namespace veil {

HashCode HashCode::from_bit_string(const std::string& s) {
  HashCode c(s.size());
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '0' && s[i] != '1') throw std::invalid_argument("bad bit char");
    c.set_bit(i, s[i] == '1');
  }
  return c;
}

HashCode HashCode::from_bytes(std::span<const uint8_t> bytes, size_t bit_count) {
  if (bytes.size() != (bit_count + 7) / 8) throw std::invalid_argument("hash code length mismatch");
  HashCode c(bit_count);
  c.data_.assign(bytes.begin(), bytes.end());
  // Mask tail bits past bit_count so equality stays well defined.
  if (bit_count % 8) c.data_.back() &= static_cast<uint8_t>(0xFF << (8 - bit_count % 8));
  return c;
}

void HashCode::set_bit(size_t i, bool v) {
  uint8_t mask = static_cast<uint8_t>(1u << (7 - i % 8));
  if (v)
    data_[i / 8] |= mask;
  else
    data_[i / 8] &= static_cast<uint8_t>(~mask);
}

std::string HashCode::to_bit_string() const {
  std::string s;
  s.reserve(bits_);
  for (size_t i = 0; i < bits_; ++i) s.push_back(bit(i) ? '1' : '0');
  return s;
}

size_t hamming(const HashCode& a, const HashCode& b) {
  if (a.size() != b.size()) throw std::invalid_argument("hamming: length mismatch");
  size_t dist = 0;
  const Bytes& ab = a.bytes();
  const Bytes& bb = b.bytes();
  for (size_t i = 0; i < ab.size(); ++i) dist += std::popcount(static_cast<uint8_t>(ab[i] ^ bb[i]));
  return dist;
}

LshFamily::LshFamily(size_t m, double window, size_t dim, uint64_t seed)
    : m_(m), window_(window), dim_(dim), seed_(seed) {
  if (m == 0 || dim == 0) throw std::invalid_argument("empty hash family");
  if (window <= 0) throw std::invalid_argument("window must be positive");
  CounterRng rng(seed);
  proj_.resize(m);
  for (auto& a : proj_) {
    a.resize(dim);
    for (auto& v : a) v = rng.gaussian();
  }
}

LshFamily::LshFamily(std::vector<std::vector<double>> projections, double window)
    : m_(projections.size()), window_(window), proj_(std::move(projections)) {
  if (proj_.empty()) throw std::invalid_argument("empty hash family");
  dim_ = proj_.front().size();
  for (const auto& a : proj_)
    if (a.size() != dim_) throw std::invalid_argument("ragged projection matrix");
}

HashCode LshFamily::hash(std::span<const double> x) const {
  if (x.size() != dim_) throw std::invalid_argument("hash: dimension mismatch");
  HashCode code(m_);
  for (size_t i = 0; i < m_; ++i) {
    double dot = 0;
    for (size_t j = 0; j < dim_; ++j) dot += proj_[i][j] * x[j];
    code.set_bit(i, dot / window_ >= 1.0);
  }
  return code;
}

Bytes LshFamily::encode_announcement() const {
  ByteWriter w;
  w.u64(m_);
  w.f64(window_);
  w.u64(dim_);
  w.u64(seed_);
  w.str16(kGeneratorId);
  return std::move(w).take();
}

LshFamily::Announcement LshFamily::decode_announcement(std::span<const uint8_t> data) {
  ByteReader r(data);
  Announcement a;
  a.m = r.u64();
  a.window = r.f64();
  a.dim = r.u64();
  a.seed = r.u64();
  a.generator_id = r.str16();
  r.expect_end();
  return a;
}

LshSuite::LshSuite(size_t m, double window, uint64_t master_seed,
                   std::span<const std::pair<std::string, size_t>> kinds)
    : m_(m), window_(window), master_seed_(master_seed) {
  for (const auto& [tag, dim] : kinds) {
    uint64_t sub = tagged_seed(master_seed, "lsh:" + tag);
    by_kind_.emplace(tag, LshFamily(m, window, dim, sub));
  }
}

const LshFamily& LshSuite::family_for_kind(const std::string& kind) const {
  auto it = by_kind_.find(kind);
  if (it == by_kind_.end()) throw std::out_of_range("no hash family for kind: " + kind);
  return it->second;
}

}  // namespace veil
