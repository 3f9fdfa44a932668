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

#include "veil/agreement.hpp"

#include <algorithm>
#include <boost/multiprecision/miller_rabin.hpp>
#include <stdexcept>

namespace veil {

using boost::multiprecision::miller_rabin_test;
using boost::multiprecision::powm;

namespace {

constexpr unsigned kMillerRabinRounds = 25;

// Deterministic candidate walk: odd N-bit numbers with the top bit set,
// stepping by 2 from a seeded start.
BigInt find_prime(unsigned bits, CounterRng& rng) {
  if (bits < 3) throw std::invalid_argument("prime size too small");
  BigInt candidate = 0;
  for (unsigned produced = 0; produced < bits; produced += 64) {
    candidate <<= 64;
    candidate += rng.next_u64();
  }
  candidate >>= (((bits + 63) / 64) * 64 - bits);  // keep exactly `bits` bits
  bit_set(candidate, bits - 1);
  if (candidate % 2 == 0) ++candidate;
  while (!miller_rabin_test(candidate, kMillerRabinRounds)) {
    candidate += 2;
    if (msb(candidate) != bits - 1) throw std::runtime_error("prime walk left the bit range");
  }
  return candidate;
}

}  // namespace

GroupParams init_params(unsigned bits, uint64_t seed) {
  CounterRng rng(tagged_seed(seed, "group-params"));
  GroupParams params;
  params.bits = bits;
  params.q = find_prime(bits, rng);

  // Smallest even k with p = kq + 1 prime (odd q forces even k).
  for (BigInt k = 2;; k += 2) {
    BigInt p = k * params.q + 1;
    if (miller_rabin_test(p, kMillerRabinRounds)) {
      params.p = p;
      break;
    }
  }

  BigInt exponent = (params.p - 1) / params.q;
  for (;;) {
    BigInt h = 2 + BigInt(rng.next_u64()) % (params.p - 3);
    BigInt g = powm(h, exponent, params.p);
    if (g != 1) {
      params.g = g;
      break;
    }
  }
  return params;
}

std::vector<std::string> validate_params(const GroupParams& params) {
  std::vector<std::string> report;
  if (!miller_rabin_test(params.p, kMillerRabinRounds)) report.push_back("p is not prime");
  if (!miller_rabin_test(params.q, kMillerRabinRounds)) report.push_back("q is not prime");
  if ((params.p - 1) % params.q != 0) report.push_back("q does not divide p-1");
  if (params.g <= 1 || params.g >= params.p) report.push_back("g out of range");
  else if (powm(params.g, params.q, params.p) != 1) report.push_back("g does not have order q");
  return report;
}

KeyPair keygen(const GroupParams& params, CounterRng& rng) {
  // Uniform a in [1, q-1] by rejection over fixed-width draws.
  size_t words = (msb(params.q) + 64) / 64 + 1;
  BigInt bound = BigInt(1) << (words * 64);
  BigInt span = params.q - 1;
  BigInt limit = bound - bound % span;  // rejection region for unbiased draws
  BigInt draw;
  do {
    draw = 0;
    for (size_t i = 0; i < words; ++i) {
      draw <<= 64;
      draw += rng.next_u64();
    }
  } while (draw >= limit);
  KeyPair kp;
  kp.a = 1 + draw % span;
  kp.b = powm(params.g, kp.a, params.p);
  return kp;
}

bool validate_public(const GroupParams& params, const BigInt& b) {
  if (b <= 0 || b >= params.p) return false;
  return powm(b, params.q, params.p) == 1;
}

BigInt mod_inverse(const BigInt& a, const BigInt& m) {
  BigInt old_r = a % m, r = m;
  if (old_r < 0) old_r += m;
  BigInt old_s = 1, s = 0;
  while (r != 0) {
    BigInt quotient = old_r / r;
    BigInt tmp = old_r - quotient * r;
    old_r = r;
    r = tmp;
    tmp = old_s - quotient * s;
    old_s = s;
    s = tmp;
  }
  if (old_r != 1) throw std::domain_error("not invertible");
  if (old_s < 0) old_s += m;
  return old_s;
}

BigInt compute_c(const GroupParams& params, const BigInt& a_i, const BigInt& b_prev,
                 const BigInt& b_next) {
  if (b_prev % params.p == 0) throw std::domain_error("predecessor public is zero mod p");
  BigInt ratio = b_next % params.p * mod_inverse(b_prev, params.p) % params.p;
  return powm(ratio, a_i, params.p);
}

BigInt compute_r(const GroupParams& params, size_t i, const BigInt& a_i, const BigInt& b_prev,
                 std::span<const BigInt> c) {
  size_t n = c.size();
  if (n < 2) throw std::invalid_argument("ring needs at least two members");
  if (i >= n) throw std::out_of_range("member index outside ring");
  BigInt r = powm(b_prev, BigInt(n) * a_i, params.p);
  for (size_t s = 0; s + 1 < n; ++s) {
    BigInt term = powm(c[(i + s) % n], BigInt(n - 1 - s), params.p);
    r = r * term % params.p;
  }
  return r;
}

BigInt closed_form_r(const GroupParams& params, std::span<const BigInt> a) {
  size_t n = a.size();
  if (n < 2) throw std::invalid_argument("ring needs at least two members");
  BigInt sum = 0;
  for (size_t i = 0; i < n; ++i) sum += a[i] * a[(i + 1) % n];
  return powm(params.g, sum % params.q, params.p);
}

size_t RingSession::index_of(const std::string& id) const {
  for (size_t i = 0; i < ids_.size(); ++i)
    if (ids_[i] == id) return i;
  throw std::out_of_range("not a ring member: " + id);
}

const std::string& RingSession::prev_of(const std::string& id) const {
  size_t i = index_of(id);
  return ids_[(i + ids_.size() - 1) % ids_.size()];
}

const std::string& RingSession::next_of(const std::string& id) const {
  size_t i = index_of(id);
  return ids_[(i + 1) % ids_.size()];
}

RingSession::Slot& RingSession::slot(const std::string& id) {
  for (auto& s : slots_)
    if (s.id == id) return s;
  throw std::out_of_range("not a ring member: " + id);
}

const RingSession::Slot& RingSession::slot(const std::string& id) const {
  for (const auto& s : slots_)
    if (s.id == id) return s;
  throw std::out_of_range("not a ring member: " + id);
}

std::vector<std::string> RingSession::insert_member(const std::string& id, const BigInt& b,
                                                    size_t position) {
  if (position > ids_.size()) throw std::out_of_range("insert position outside ring");
  for (const auto& existing : ids_)
    if (existing == id) throw std::invalid_argument("duplicate ring member: " + id);
  if (!validate_public(params_, b)) throw std::invalid_argument("invalid public share for " + id);

  ids_.insert(ids_.begin() + static_cast<ptrdiff_t>(position), id);
  slots_.push_back(Slot{id, b, 0, false});

  std::vector<std::string> touched;
  if (ids_.size() >= 2) {
    touched.push_back(prev_of(id));
    touched.push_back(next_of(id));
  }
  touched.push_back(id);
  std::sort(touched.begin(), touched.end());
  touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
  return touched;
}

std::vector<std::string> RingSession::remove_member(const std::string& id) {
  if (ids_.size() <= 2) throw std::invalid_argument("ring cannot shrink below two members");
  std::vector<std::string> touched{prev_of(id), next_of(id)};
  size_t i = index_of(id);
  ids_.erase(ids_.begin() + static_cast<ptrdiff_t>(i));
  std::erase_if(slots_, [&](const Slot& s) { return s.id == id; });
  std::sort(touched.begin(), touched.end());
  touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
  return touched;
}

void RingSession::set_b(const std::string& id, const BigInt& b) {
  if (!validate_public(params_, b)) throw std::invalid_argument("invalid public share for " + id);
  slot(id).b = b;
}

void RingSession::set_c(const std::string& id, const BigInt& c) {
  Slot& s = slot(id);
  s.c = c;
  s.has_c = true;
}

void RingSession::clear_c() {
  for (auto& s : slots_) {
    s.c = 0;
    s.has_c = false;
  }
}

const BigInt& RingSession::b_of(const std::string& id) const { return slot(id).b; }

bool RingSession::complete() const {
  if (ids_.size() < 2) return false;
  for (const auto& id : ids_)
    if (!slot(id).has_c) return false;
  return true;
}

std::vector<BigInt> RingSession::c_in_ring_order() const {
  if (!complete()) throw std::logic_error("round broadcasts incomplete");
  std::vector<BigInt> out;
  out.reserve(ids_.size());
  for (const auto& id : ids_) out.push_back(slot(id).c);
  return out;
}

BigInt RingSession::product_of_c() const {
  BigInt prod = 1;
  for (const BigInt& c : c_in_ring_order()) prod = prod * c % params_.p;
  return prod;
}

std::vector<std::string> apply_changes(RingSession& session, std::span<const RingChange> changes) {
  std::vector<std::string> touched;
  for (const auto& ch : changes) {
    std::vector<std::string> t = ch.op == RingChange::Op::insert
                                     ? session.insert_member(ch.id, ch.b, ch.position)
                                     : session.remove_member(ch.id);
    touched.insert(touched.end(), t.begin(), t.end());
  }
  std::sort(touched.begin(), touched.end());
  touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
  // A member inserted then removed by the same batch no longer exists.
  std::erase_if(touched, [&](const std::string& id) {
    const auto& ids = session.ids();
    return std::find(ids.begin(), ids.end(), id) == ids.end();
  });
  return touched;
}

Bytes encode_params(const GroupParams& params) {
  ByteWriter w;
  write_bigint(w, params.p);
  write_bigint(w, params.q);
  write_bigint(w, params.g);
  w.u16(static_cast<uint16_t>(params.bits));
  return std::move(w).take();
}

GroupParams decode_params(std::span<const uint8_t> data) {
  ByteReader r(data);
  GroupParams params;
  params.p = read_bigint(r);
  params.q = read_bigint(r);
  params.g = read_bigint(r);
  params.bits = r.u16();
  r.expect_end();
  return params;
}

namespace {

Bytes encode_indexed_share(uint16_t index, const BigInt& v) {
  ByteWriter w;
  w.u16(index);
  write_bigint(w, v);
  return std::move(w).take();
}

std::pair<uint16_t, BigInt> decode_indexed_share(std::span<const uint8_t> data) {
  ByteReader r(data);
  uint16_t index = r.u16();
  BigInt v = read_bigint(r);
  r.expect_end();
  return {index, v};
}

}  // namespace

Bytes encode_public_share(uint16_t index, const BigInt& b) { return encode_indexed_share(index, b); }
std::pair<uint16_t, BigInt> decode_public_share(std::span<const uint8_t> data) {
  return decode_indexed_share(data);
}
Bytes encode_round_share(uint16_t index, const BigInt& c) { return encode_indexed_share(index, c); }
std::pair<uint16_t, BigInt> decode_round_share(std::span<const uint8_t> data) {
  return decode_indexed_share(data);
}

}  // namespace veil
