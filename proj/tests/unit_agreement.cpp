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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "veil/agreement.hpp"

using namespace veil;

namespace {

// Small enough to verify on paper: q = 11, p = 23 = 2q + 1, g = 2 with
// 2^11 = 2048 = 89 * 23 + 1.
GroupParams toy_params() {
  GroupParams p;
  p.p = 23;
  p.q = 11;
  p.g = 2;
  p.bits = 4;
  return p;
}

}  // namespace

TEST_CASE("toy parameters validate") {
  CHECK(validate_params(toy_params()).empty());
}

TEST_CASE("parameter validation catches broken inputs") {
  GroupParams bad = toy_params();
  bad.p = 24;
  CHECK_FALSE(validate_params(bad).empty());
  bad = toy_params();
  bad.q = 12;
  CHECK_FALSE(validate_params(bad).empty());
  bad = toy_params();
  bad.g = 1;
  CHECK_FALSE(validate_params(bad).empty());
  bad = toy_params();
  bad.g = 5;  // order of 5 mod 23 is 22, not 11
  CHECK_FALSE(validate_params(bad).empty());
}

TEST_CASE("generated parameters validate and are deterministic") {
  GroupParams a = init_params(64, 2026);
  GroupParams b = init_params(64, 2026);
  GroupParams c = init_params(64, 2027);
  CHECK(a == b);
  CHECK(a.p != c.p);
  CHECK(validate_params(a).empty());
  CHECK(validate_params(c).empty());
  CHECK(boost::multiprecision::msb(a.q) == 63);  // full bit width
  CHECK((a.p - 1) % a.q == 0);
}

TEST_CASE("modular inverse") {
  CHECK(mod_inverse(3, 7) == 5);
  CHECK(mod_inverse(13, 23) == 16);
  CHECK(mod_inverse(1, 97) == 1);
  CHECK_THROWS_AS(mod_inverse(6, 9), std::domain_error);
}

TEST_CASE("keygen stays in range and validates") {
  GroupParams params = toy_params();
  CounterRng rng(7);
  for (int i = 0; i < 50; ++i) {
    KeyPair kp = keygen(params, rng);
    CHECK(kp.a >= 1);
    CHECK(kp.a < params.q);
    CHECK(validate_public(params, kp.b));
  }
  CHECK_FALSE(validate_public(params, 0));
  CHECK_FALSE(validate_public(params, params.p));
  CHECK_FALSE(validate_public(params, 5));  // order 22, not 11
}

TEST_CASE("worked example: three members, secrets 3, 5, 7") {
  GroupParams params = toy_params();
  std::vector<BigInt> a{3, 5, 7};
  std::vector<BigInt> b{8, 9, 13};  // 2^3, 2^5, 2^7 mod 23
  for (size_t i = 0; i < 3; ++i)
    CHECK(boost::multiprecision::powm(params.g, a[i], params.p) == b[i]);

  std::vector<BigInt> c(3);
  for (size_t i = 0; i < 3; ++i)
    c[i] = compute_c(params, a[i], b[(i + 2) % 3], b[(i + 1) % 3]);
  CHECK(c == std::vector<BigInt>({9, 6, 3}));

  // Telescoping product collapses to 1.
  CHECK(c[0] * c[1] * c[2] % params.p == 1);

  for (size_t i = 0; i < 3; ++i)
    CHECK(compute_r(params, i, a[i], b[(i + 2) % 3], c) == 9);
  CHECK(closed_form_r(params, a) == 9);
}

TEST_CASE("every ring size from 2 to 8 agrees with the closed form") {
  GroupParams params = init_params(48, 11);
  CounterRng rng(300);
  for (size_t n = 2; n <= 8; ++n) {
    std::vector<BigInt> a(n), b(n), c(n);
    for (size_t i = 0; i < n; ++i) {
      KeyPair kp = keygen(params, rng);
      a[i] = kp.a;
      b[i] = kp.b;
    }
    for (size_t i = 0; i < n; ++i)
      c[i] = compute_c(params, a[i], b[(i + n - 1) % n], b[(i + 1) % n]);
    BigInt product = 1;
    for (const BigInt& ci : c) product = product * ci % params.p;
    CHECK(product == 1);

    BigInt expected = closed_form_r(params, a);
    for (size_t i = 0; i < n; ++i)
      CHECK(compute_r(params, i, a[i], b[(i + n - 1) % n], c) == expected);
  }
}

TEST_CASE("ring session bookkeeping") {
  GroupParams params = toy_params();
  RingSession ring(params);
  ring.insert_member("a", 8, 0);
  ring.insert_member("b", 9, 1);
  ring.insert_member("c", 13, 2);
  ring.insert_member("d", 8, 3);
  CHECK(ring.size() == 4);
  CHECK(ring.index_of("c") == 2);
  CHECK(ring.prev_of("a") == "d");
  CHECK(ring.next_of("d") == "a");

  SUBCASE("insert touches both neighbors and the newcomer") {
    auto touched = ring.insert_member("e", 9, 2);
    std::set<std::string> got(touched.begin(), touched.end());
    CHECK(got == std::set<std::string>({"b", "c", "e"}));
    CHECK(ring.index_of("e") == 2);
    CHECK(ring.next_of("b") == "e");
    CHECK(ring.prev_of("c") == "e");
  }

  SUBCASE("remove touches the former neighbors") {
    auto touched = ring.remove_member("b");
    std::set<std::string> got(touched.begin(), touched.end());
    CHECK(got == std::set<std::string>({"a", "c"}));
    CHECK(ring.next_of("a") == "c");
    CHECK(ring.size() == 3);
  }

  SUBCASE("rejects duplicates, unknowns, bad shares") {
    CHECK_THROWS(ring.insert_member("a", 9, 0));
    CHECK_THROWS(ring.insert_member("z", 5, 0));   // 5 fails the order check
    CHECK_THROWS(ring.insert_member("z", 9, 99));  // position past the end
    CHECK_THROWS(ring.remove_member("nope"));
  }

  SUBCASE("refuses to shrink below two members") {
    ring.remove_member("d");
    ring.remove_member("c");
    CHECK_THROWS(ring.remove_member("b"));
  }

  SUBCASE("completeness tracks round shares") {
    CHECK_FALSE(ring.complete());
    ring.set_c("a", 1);
    ring.set_c("b", 2);
    ring.set_c("c", 3);
    ring.set_c("d", 4);
    CHECK(ring.complete());
    CHECK(ring.c_in_ring_order() == std::vector<BigInt>({1, 2, 3, 4}));
    ring.clear_c();
    CHECK_FALSE(ring.complete());
  }
}

TEST_CASE("neighbor-set math: two-member ring") {
  // With two members each is the other's predecessor and successor.
  GroupParams params = toy_params();
  RingSession ring(params);
  ring.insert_member("a", 8, 0);
  ring.insert_member("b", 9, 1);
  CHECK(ring.prev_of("a") == "b");
  CHECK(ring.next_of("a") == "b");
}

TEST_CASE("batched changes return the union of touched members") {
  GroupParams params = toy_params();
  RingSession ring(params);
  ring.insert_member("a", 8, 0);
  ring.insert_member("b", 9, 1);
  ring.insert_member("c", 13, 2);
  ring.insert_member("d", 8, 3);

  std::vector<RingChange> changes;
  changes.push_back({RingChange::Op::insert, "e", 9, 1});
  changes.push_back({RingChange::Op::remove, "d", 0, 0});
  auto touched = apply_changes(ring, changes);
  std::set<std::string> got(touched.begin(), touched.end());
  // d's removal touches c and a; e's insert touches a, b and e itself.
  CHECK(got == std::set<std::string>({"a", "b", "c", "e"}));
  CHECK(ring.size() == 4);
}

TEST_CASE("wire forms round trip") {
  GroupParams params = init_params(64, 5);
  GroupParams back = decode_params(encode_params(params));
  CHECK(back == params);

  auto [idx, b] = decode_public_share(encode_public_share(7, params.g));
  CHECK(idx == 7);
  CHECK(b == params.g);

  auto [idx2, c] = decode_round_share(encode_round_share(0, BigInt("987654321987654321")));
  CHECK(idx2 == 0);
  CHECK(c == BigInt("987654321987654321"));
}
