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
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "veil/bytes.hpp"
#include "veil/lsh.hpp"

namespace veil {

enum class FeatureKind : uint8_t { face = 0, color_histogram = 1, texture = 2 };
enum class NodeLabel : uint8_t { human_face = 0, human_body = 1 };

const char* kind_tag(FeatureKind k);
const char* label_tag(NodeLabel l);
FeatureKind kind_from_tag(const std::string& tag);
NodeLabel label_from_tag(const std::string& tag);

/// Dimension each feature kind is expected to carry. Defaults follow the
/// sizes the rest of the system is calibrated for; corpora may override.
struct FeatureDims {
  size_t face = 48;
  size_t color_histogram = 64;
  size_t texture = 20;

  size_t for_kind(FeatureKind k) const;
  /// (tag, dim) pairs in kind order, e.g. for building an LshSuite.
  std::vector<std::pair<std::string, size_t>> kinds() const;
};

struct FeatureVector {
  FeatureKind kind = FeatureKind::face;
  std::vector<double> values;  // each in [0,1]

  size_t dim() const { return values.size(); }
  bool operator==(const FeatureVector&) const = default;
};

struct PortraitNode {
  uint16_t id = 0;
  NodeLabel label = NodeLabel::human_face;
  std::vector<FeatureVector> features;
  /// Opaque token tying the node to a photo region on the photographer
  /// side; empty for self-profiles. Not part of the wire frame.
  std::string region_ref;

  bool operator==(const PortraitNode&) const = default;
};

/// Unordered node-id pair, stored normalized (first < second).
struct Edge {
  uint16_t a = 0;
  uint16_t b = 0;

  Edge() = default;
  Edge(uint16_t x, uint16_t y) : a(x < y ? x : y), b(x < y ? y : x) {}
  auto operator<=>(const Edge&) const = default;
};

struct PortraitGraph {
  std::vector<PortraitNode> nodes;
  std::vector<Edge> edges;
  std::string owner_ref;  // side-band, not serialized

  const PortraitNode* find_node(uint16_t id) const;
  /// Ids of nodes sharing an edge with `id`, in ascending order.
  std::vector<uint16_t> neighbors(uint16_t id) const;
  bool has_edge(uint16_t x, uint16_t y) const;
};

struct HashedPortraitNode {
  uint16_t id = 0;
  NodeLabel label = NodeLabel::human_face;
  /// One code per original feature vector, kind retained for pairing.
  std::vector<std::pair<FeatureKind, HashCode>> codes;
  std::string region_ref;

  bool operator==(const HashedPortraitNode&) const = default;
};

struct HashedPortraitGraph {
  std::vector<HashedPortraitNode> nodes;
  std::vector<Edge> edges;
  std::string owner_ref;
  std::string session_ref;  // capture session the transform was bound to

  const HashedPortraitNode* find_node(uint16_t id) const;
  std::vector<uint16_t> neighbors(uint16_t id) const;
  bool has_edge(uint16_t x, uint16_t y) const;
};

/// Empty report means the graph satisfies every structural invariant:
/// at least one node, unique ids, label-appropriate feature kinds and
/// dims, values finite in [0,1], edges undirected with live endpoints,
/// no self-loops or duplicates.
std::vector<std::string> validate_graph(const PortraitGraph& g, const FeatureDims& dims = {});

/// Canonical binary frame. Header: version(1) mode(1: 0=plain, 1=hashed)
/// node count(2, big-endian); per node: id(2) label(1) feature count(1),
/// per feature: kind(1) byte length(2) payload; then edge count(2) and
/// 2+2 byte id pairs. Plain values quantize to one byte each (8-bit fixed
/// point over [0,1]); hashed payloads are the packed code bytes.
Bytes serialize_profile(const PortraitGraph& g);
Bytes serialize_profile(const HashedPortraitGraph& g);

constexpr uint8_t kProfileFormatVersion = 1;
constexpr uint8_t kProfileModePlain = 0;
constexpr uint8_t kProfileModeHashed = 1;

using ProfileFrame = std::variant<PortraitGraph, HashedPortraitGraph>;
ProfileFrame deserialize_profile(std::span<const uint8_t> data);

uint8_t quantize_feature_value(double v);
double dequantize_feature_value(uint8_t q);

/// Human-readable one-graph-per-file form used for corpora on disk.
std::string encode_profile_text(const PortraitGraph& g);
PortraitGraph decode_profile_text(const std::string& text);

}  // namespace veil
