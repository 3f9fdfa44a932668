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
#include <span>
#include <string>
#include <vector>

#include "veil/bigint.hpp"
#include "veil/rng.hpp"

namespace veil {

/// Schnorr-group parameters: q an N-bit prime, p = kq + 1 prime, g of
/// multiplicative order q in Z_p. Public; one set per deployment.
struct GroupParams {
  BigInt p;
  BigInt q;
  BigInt g;
  unsigned bits = 512;

  bool operator==(const GroupParams&) const = default;
};

/// Deterministic from seed: first N-bit prime q along the candidate walk,
/// smallest even k with p = kq + 1 prime, then g = h^((p-1)/q) for the
/// first h giving g != 1.
GroupParams init_params(unsigned bits, uint64_t seed);

/// Empty iff p and q are (probable) primes, q | p-1, g^q = 1 mod p, g != 1.
std::vector<std::string> validate_params(const GroupParams& params);

struct KeyPair {
  BigInt a;  // private exponent in [1, q-1], never serialized
  BigInt b;  // public g^a mod p
};

KeyPair keygen(const GroupParams& params, CounterRng& rng);

/// True iff b is a valid public share: nonzero and b^q = 1 mod p.
bool validate_public(const GroupParams& params, const BigInt& b);

/// Extended-Euclid modular inverse; throws if gcd(a, m) != 1.
BigInt mod_inverse(const BigInt& a, const BigInt& m);

/// c_i = (b_next / b_prev)^{a_i} mod p, division via modular inverse.
BigInt compute_c(const GroupParams& params, const BigInt& a_i, const BigInt& b_prev,
                 const BigInt& b_next);

/// Member i's view of the agreed number, from its own secret, its ring
/// predecessor's public, and the full broadcast list in ring order:
///   R_i = b_prev^{n a_i} * c_i^{n-1} * c_{i+1}^{n-2} * ... * c_{i-2}
/// Every member's R_i equals g^{sum of a_j a_{j+1} around the cycle}.
BigInt compute_r(const GroupParams& params, size_t i, const BigInt& a_i, const BigInt& b_prev,
                 std::span<const BigInt> c);

/// Reference closed form g^{a_1 a_2 + a_2 a_3 + ... + a_n a_1} mod p.
BigInt closed_form_r(const GroupParams& params, std::span<const BigInt> a);

/// One participant's accumulated state across an agreement round.
struct MemberState {
  size_t index = 0;
  KeyPair key;
  BigInt b_prev;
  BigInt b_next;
  BigInt c;
  BigInt r;
};

/// Cloud-side bookkeeping for a ring: the ordered cycle of member ids
/// plus collected publics and round broadcasts. Holds no secrets.
class RingSession {
 public:
  explicit RingSession(GroupParams params) : params_(std::move(params)) {}

  size_t size() const { return ids_.size(); }
  const GroupParams& params() const { return params_; }
  const std::vector<std::string>& ids() const { return ids_; }

  size_t index_of(const std::string& id) const;
  const std::string& prev_of(const std::string& id) const;
  const std::string& next_of(const std::string& id) const;

  /// Inserting at `position` places the member before the current occupant
  /// of that slot. Returns the ids whose neighbor set changed and so must
  /// rebroadcast c (at most three including the newcomer).
  std::vector<std::string> insert_member(const std::string& id, const BigInt& b, size_t position);

  /// Returns the former neighbors of the removed member. Refuses to
  /// shrink the ring below two members.
  std::vector<std::string> remove_member(const std::string& id);

  void set_b(const std::string& id, const BigInt& b);
  void set_c(const std::string& id, const BigInt& c);
  void clear_c();

  const BigInt& b_of(const std::string& id) const;

  bool complete() const;
  std::vector<BigInt> c_in_ring_order() const;
  /// Telescoping identity: the product of all c_i around the ring is 1.
  BigInt product_of_c() const;

  int round = 0;

 private:
  struct Slot {
    std::string id;
    BigInt b;
    BigInt c;
    bool has_c = false;
  };
  GroupParams params_;
  std::vector<std::string> ids_;
  std::vector<Slot> slots_;

  Slot& slot(const std::string& id);
  const Slot& slot(const std::string& id) const;
};

struct RingChange {
  enum class Op { insert, remove };
  Op op = Op::insert;
  std::string id;
  BigInt b;            // insert only
  size_t position = 0;  // insert only
};

/// Applies changes in order, returning the union of recompute sets. An
/// empty change list touches nobody.
std::vector<std::string> apply_changes(RingSession& session, std::span<const RingChange> changes);

// Wire forms (bigints as length-prefixed unsigned big-endian).
Bytes encode_params(const GroupParams& params);
GroupParams decode_params(std::span<const uint8_t> data);
Bytes encode_public_share(uint16_t index, const BigInt& b);
std::pair<uint16_t, BigInt> decode_public_share(std::span<const uint8_t> data);
Bytes encode_round_share(uint16_t index, const BigInt& c);
std::pair<uint16_t, BigInt> decode_round_share(std::span<const uint8_t> data);

}  // namespace veil
