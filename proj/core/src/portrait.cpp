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

#include "veil/portrait.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <stdexcept>

namespace veil {

const char* kind_tag(FeatureKind k) {
  switch (k) {
    case FeatureKind::face: return "face";
    case FeatureKind::color_histogram: return "color_histogram";
    case FeatureKind::texture: return "texture";
  }
  throw std::invalid_argument("unknown feature kind");
}

const char* label_tag(NodeLabel l) {
  switch (l) {
    case NodeLabel::human_face: return "human_face";
    case NodeLabel::human_body: return "human_body";
  }
  throw std::invalid_argument("unknown node label");
}

FeatureKind kind_from_tag(const std::string& tag) {
  if (tag == "face") return FeatureKind::face;
  if (tag == "color_histogram") return FeatureKind::color_histogram;
  if (tag == "texture") return FeatureKind::texture;
  throw std::invalid_argument("unknown feature kind: " + tag);
}

NodeLabel label_from_tag(const std::string& tag) {
  if (tag == "human_face") return NodeLabel::human_face;
  if (tag == "human_body") return NodeLabel::human_body;
  throw std::invalid_argument("unknown node label: " + tag);
}

size_t FeatureDims::for_kind(FeatureKind k) const {
  switch (k) {
    case FeatureKind::face: return face;
    case FeatureKind::color_histogram: return color_histogram;
    case FeatureKind::texture: return texture;
  }
  throw std::invalid_argument("unknown feature kind");
}

std::vector<std::pair<std::string, size_t>> FeatureDims::kinds() const {
  return {{"face", face}, {"color_histogram", color_histogram}, {"texture", texture}};
}

namespace {

template <typename Graph>
const auto* find_node_impl(const Graph& g, uint16_t id) {
  for (const auto& n : g.nodes)
    if (n.id == id) return &n;
  return static_cast<decltype(&g.nodes[0])>(nullptr);
}

template <typename Graph>
std::vector<uint16_t> neighbors_impl(const Graph& g, uint16_t id) {
  std::vector<uint16_t> out;
  for (const auto& e : g.edges) {
    if (e.a == id) out.push_back(e.b);
    if (e.b == id) out.push_back(e.a);
  }
  std::sort(out.begin(), out.end());
  return out;
}

template <typename Graph>
bool has_edge_impl(const Graph& g, uint16_t x, uint16_t y) {
  Edge probe(x, y);
  for (const auto& e : g.edges)
    if (e == probe) return true;
  return false;
}

}  // namespace

const PortraitNode* PortraitGraph::find_node(uint16_t id) const { return find_node_impl(*this, id); }
std::vector<uint16_t> PortraitGraph::neighbors(uint16_t id) const { return neighbors_impl(*this, id); }
bool PortraitGraph::has_edge(uint16_t x, uint16_t y) const { return has_edge_impl(*this, x, y); }

const HashedPortraitNode* HashedPortraitGraph::find_node(uint16_t id) const {
  return find_node_impl(*this, id);
}
std::vector<uint16_t> HashedPortraitGraph::neighbors(uint16_t id) const {
  return neighbors_impl(*this, id);
}
bool HashedPortraitGraph::has_edge(uint16_t x, uint16_t y) const { return has_edge_impl(*this, x, y); }

std::vector<std::string> validate_graph(const PortraitGraph& g, const FeatureDims& dims) {
  std::vector<std::string> report;
  auto flag = [&](const std::string& msg) { report.push_back(msg); };

  if (g.nodes.empty()) flag("graph has no nodes");

  std::set<uint16_t> ids;
  for (const auto& n : g.nodes) {
    std::string where = "node " + std::to_string(n.id);
    if (!ids.insert(n.id).second) flag(where + ": duplicate id");

    size_t faces = 0, hists = 0, textures = 0;
    for (const auto& f : n.features) {
      switch (f.kind) {
        case FeatureKind::face: ++faces; break;
        case FeatureKind::color_histogram: ++hists; break;
        case FeatureKind::texture: ++textures; break;
      }
      if (f.dim() != dims.for_kind(f.kind))
        flag(where + ": " + kind_tag(f.kind) + " vector has dim " + std::to_string(f.dim()) +
             ", expected " + std::to_string(dims.for_kind(f.kind)));
      for (double v : f.values)
        if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
          flag(where + ": " + kind_tag(f.kind) + " value out of [0,1]");
          break;
        }
    }
    bool ok = n.label == NodeLabel::human_face
                  ? (faces == 1 && hists == 0 && textures == 0 && n.features.size() == 1)
                  : (faces == 0 && hists == 1 && textures == 1 && n.features.size() == 2);
    if (!ok) flag(where + ": label/feature mismatch");
  }

  std::set<Edge> seen;
  for (const auto& e : g.edges) {
    std::string where = "edge (" + std::to_string(e.a) + "," + std::to_string(e.b) + ")";
    if (e.a == e.b) flag(where + ": self-loop");
    if (!seen.insert(e).second) flag(where + ": duplicate edge");
    if (!ids.contains(e.a) || !ids.contains(e.b)) flag(where + ": dangling edge endpoint");
  }
  return report;
}

uint8_t quantize_feature_value(double v) {
  if (!std::isfinite(v)) throw std::invalid_argument("non-finite feature value");
  double c = std::clamp(v, 0.0, 1.0);
  return static_cast<uint8_t>(std::lround(c * 255.0));
}

double dequantize_feature_value(uint8_t q) { return q / 255.0; }

namespace {

void write_edges(ByteWriter& w, const std::vector<Edge>& edges) {
  if (edges.size() > 0xFFFF) throw std::length_error("too many edges for frame");
  w.u16(static_cast<uint16_t>(edges.size()));
  for (const auto& e : edges) {
    w.u16(e.a);
    w.u16(e.b);
  }
}

std::vector<Edge> read_edges(ByteReader& r) {
  size_t count = r.u16();
  std::vector<Edge> edges;
  edges.reserve(count);
  for (size_t i = 0; i < count; ++i) {
    uint16_t a = r.u16();
    uint16_t b = r.u16();
    edges.emplace_back(a, b);
  }
  return edges;
}

}  // namespace

Bytes serialize_profile(const PortraitGraph& g) {
  ByteWriter w;
  w.u8(kProfileFormatVersion);
  w.u8(kProfileModePlain);
  if (g.nodes.size() > 0xFFFF) throw std::length_error("too many nodes for frame");
  w.u16(static_cast<uint16_t>(g.nodes.size()));
  for (const auto& n : g.nodes) {
    w.u16(n.id);
    w.u8(static_cast<uint8_t>(n.label));
    if (n.features.empty()) throw std::invalid_argument("node has no features");
    if (n.features.size() > 0xFF) throw std::length_error("too many features");
    w.u8(static_cast<uint8_t>(n.features.size()));
    for (const auto& f : n.features) {
      w.u8(static_cast<uint8_t>(f.kind));
      if (f.values.size() > 0xFFFF) throw std::length_error("feature too long");
      w.u16(static_cast<uint16_t>(f.values.size()));
      for (double v : f.values) w.u8(quantize_feature_value(v));
    }
  }
  write_edges(w, g.edges);
  return std::move(w).take();
}

Bytes serialize_profile(const HashedPortraitGraph& g) {
  ByteWriter w;
  w.u8(kProfileFormatVersion);
  w.u8(kProfileModeHashed);
  if (g.nodes.size() > 0xFFFF) throw std::length_error("too many nodes for frame");
  w.u16(static_cast<uint16_t>(g.nodes.size()));
  for (const auto& n : g.nodes) {
    w.u16(n.id);
    w.u8(static_cast<uint8_t>(n.label));
    if (n.codes.empty()) throw std::invalid_argument("node has no codes");
    if (n.codes.size() > 0xFF) throw std::length_error("too many codes");
    w.u8(static_cast<uint8_t>(n.codes.size()));
    for (const auto& [kind, code] : n.codes) {
      w.u8(static_cast<uint8_t>(kind));
      const Bytes& payload = code.bytes();
      if (payload.size() > 0xFFFF) throw std::length_error("code too long");
      w.u16(static_cast<uint16_t>(payload.size()));
      w.raw(payload);
      // Bit count must be recoverable from the byte length alone.
      if (code.size() % 8 != 0) throw std::invalid_argument("code bit count not byte-aligned");
    }
  }
  write_edges(w, g.edges);
  return std::move(w).take();
}

ProfileFrame deserialize_profile(std::span<const uint8_t> data) {
  ByteReader r(data);
  uint8_t version = r.u8();
  if (version != kProfileFormatVersion)
    throw std::runtime_error("unsupported profile format version");
  uint8_t mode = r.u8();
  size_t node_count = r.u16();

  if (mode == kProfileModePlain) {
    PortraitGraph g;
    g.nodes.reserve(node_count);
    for (size_t i = 0; i < node_count; ++i) {
      PortraitNode n;
      n.id = r.u16();
      n.label = static_cast<NodeLabel>(r.u8());
      size_t nfeat = r.u8();
      for (size_t k = 0; k < nfeat; ++k) {
        FeatureVector f;
        f.kind = static_cast<FeatureKind>(r.u8());
        size_t len = r.u16();
        f.values.reserve(len);
        for (size_t j = 0; j < len; ++j) f.values.push_back(dequantize_feature_value(r.u8()));
        n.features.push_back(std::move(f));
      }
      g.nodes.push_back(std::move(n));
    }
    g.edges = read_edges(r);
    r.expect_end();
    return g;
  }
  if (mode == kProfileModeHashed) {
    HashedPortraitGraph g;
    g.nodes.reserve(node_count);
    for (size_t i = 0; i < node_count; ++i) {
      HashedPortraitNode n;
      n.id = r.u16();
      n.label = static_cast<NodeLabel>(r.u8());
      size_t ncodes = r.u8();
      for (size_t k = 0; k < ncodes; ++k) {
        auto kind = static_cast<FeatureKind>(r.u8());
        size_t len = r.u16();
        Bytes payload = r.raw(len);
        n.codes.emplace_back(kind, HashCode::from_bytes(payload, len * 8));
      }
      g.nodes.push_back(std::move(n));
    }
    g.edges = read_edges(r);
    r.expect_end();
    return g;
  }
  throw std::runtime_error("unknown profile mode");
}

std::string encode_profile_text(const PortraitGraph& g) {
  std::ostringstream out;
  out << "portrait-graph v1\n";
  if (!g.owner_ref.empty()) out << "owner " << g.owner_ref << "\n";
  char buf[32];
  for (const auto& n : g.nodes) {
    out << "node " << n.id << " " << label_tag(n.label);
    if (!n.region_ref.empty()) out << " region=" << n.region_ref;
    out << "\n";
    for (const auto& f : n.features) {
      out << "  " << kind_tag(f.kind);
      for (double v : f.values) {
        std::snprintf(buf, sizeof(buf), " %.9g", v);
        out << buf;
      }
      out << "\n";
    }
  }
  for (const auto& e : g.edges) out << "edge " << e.a << " " << e.b << "\n";
  return out.str();
}

PortraitGraph decode_profile_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "portrait-graph v1")
    throw std::runtime_error("bad profile text header");

  PortraitGraph g;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "owner") {
      ls >> g.owner_ref;
    } else if (word == "node") {
      PortraitNode n;
      std::string label;
      int id;
      ls >> id >> label;
      n.id = static_cast<uint16_t>(id);
      n.label = label_from_tag(label);
      std::string extra;
      while (ls >> extra)
        if (extra.starts_with("region=")) n.region_ref = extra.substr(7);
      g.nodes.push_back(std::move(n));
    } else if (word == "edge") {
      int a, b;
      ls >> a >> b;
      g.edges.emplace_back(static_cast<uint16_t>(a), static_cast<uint16_t>(b));
    } else {
      // Indented feature line: kind then values, attached to the last node.
      if (g.nodes.empty()) throw std::runtime_error("feature line before any node");
      FeatureVector f;
      f.kind = kind_from_tag(word);
      double v;
      while (ls >> v) f.values.push_back(v);
      g.nodes.back().features.push_back(std::move(f));
    }
  }
  return g;
}

}  // namespace veil
