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

#include <string>

#include "veil/bigint.hpp"
#include "veil/lsh.hpp"
#include "veil/portrait.hpp"
#include "veil/scramble.hpp"

namespace veil {

/// Client-side profile transform: every feature vector is scrambled with
/// the per-kind code derived from the agreed random number r, then hashed
/// with the published family for its kind. Node ids, labels, region refs
/// and the edge set carry over unchanged, so any two participants holding
/// the same r and suite produce byte-identical transforms of a graph.
HashedPortraitGraph transform_profile(const PortraitGraph& g, const BigInt& r,
                                      const LshSuite& suite, const std::string& session_ref);

}  // namespace veil
