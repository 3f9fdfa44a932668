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

#include <boost/multiprecision/cpp_int.hpp>
#include <span>
#include <stdexcept>

#include "veil/bytes.hpp"

namespace veil {

using BigInt = boost::multiprecision::cpp_int;

/// Length-prefixed (2 bytes) unsigned big-endian magnitude; zero encodes
/// with an empty payload. Canonical: no leading zero bytes.
inline void write_bigint(ByteWriter& w, const BigInt& v) {
  if (v < 0) throw std::invalid_argument("negative bigint on the wire");
  Bytes mag;
  export_bits(v, std::back_inserter(mag), 8);
  if (v == 0) mag.clear();  // export_bits emits a single zero byte
  if (mag.size() > 0xFFFF) throw std::length_error("bigint too large for frame");
  w.u16(static_cast<uint16_t>(mag.size()));
  w.raw(mag);
}

inline BigInt read_bigint(ByteReader& r) {
  size_t len = r.u16();
  Bytes mag = r.raw(len);
  BigInt v = 0;
  if (!mag.empty()) import_bits(v, mag.begin(), mag.end(), 8);
  return v;
}

inline Bytes bigint_bytes(const BigInt& v) {
  ByteWriter w;
  write_bigint(w, v);
  return std::move(w).take();
}

}  // namespace veil
