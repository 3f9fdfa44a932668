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

#include "veil/transform.hpp"

namespace veil {

HashedPortraitGraph transform_profile(const PortraitGraph& g, const BigInt& r,
                                      const LshSuite& suite, const std::string& session_ref) {
  HashedPortraitGraph out;
  out.edges = g.edges;
  out.owner_ref = g.owner_ref;
  out.session_ref = session_ref;
  out.nodes.reserve(g.nodes.size());
  for (const auto& n : g.nodes) {
    HashedPortraitNode h;
    h.id = n.id;
    h.label = n.label;
    h.region_ref = n.region_ref;
    for (const auto& f : n.features) {
      ScrambleCode code = derive_code_for_kind(r, kind_tag(f.kind), f.dim());
      std::vector<double> scrambled = apply_scramble(f.values, code);
      h.codes.emplace_back(f.kind, suite.family_for_kind(kind_tag(f.kind)).hash(scrambled));
    }
    out.nodes.push_back(std::move(h));
  }
  return out;
}

}  // namespace veil
