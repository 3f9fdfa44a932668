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

#include <cmath>
#include <limits>

#include "veil/portrait.hpp"
#include "veil/rng.hpp"

using namespace veil;

namespace {

FeatureVector filled(FeatureKind kind, size_t dim, double v) {
  FeatureVector f;
  f.kind = kind;
  f.values.assign(dim, v);
  return f;
}

// One face node and two body nodes, chained by edges.
PortraitGraph small_graph() {
  PortraitGraph g;
  PortraitNode face;
  face.id = 0;
  face.label = NodeLabel::human_face;
  face.features = {filled(FeatureKind::face, 48, 0.25)};
  PortraitNode body1;
  body1.id = 1;
  body1.label = NodeLabel::human_body;
  body1.features = {filled(FeatureKind::color_histogram, 64, 0.5),
                    filled(FeatureKind::texture, 20, 0.75)};
  PortraitNode body2 = body1;
  body2.id = 2;
  g.nodes = {face, body1, body2};
  g.edges = {Edge(0, 1), Edge(1, 2)};
  return g;
}

}  // namespace

TEST_CASE("tags round trip") {
  CHECK(kind_from_tag(kind_tag(FeatureKind::face)) == FeatureKind::face);
  CHECK(kind_from_tag(kind_tag(FeatureKind::texture)) == FeatureKind::texture);
  CHECK(label_from_tag(label_tag(NodeLabel::human_body)) == NodeLabel::human_body);
  CHECK_THROWS(kind_from_tag("bogus"));
  CHECK_THROWS(label_from_tag("bogus"));
}

TEST_CASE("default dims") {
  FeatureDims dims;
  CHECK(dims.for_kind(FeatureKind::face) == 48);
  CHECK(dims.for_kind(FeatureKind::color_histogram) == 64);
  CHECK(dims.for_kind(FeatureKind::texture) == 20);
  auto kinds = dims.kinds();
  REQUIRE(kinds.size() == 3);
  CHECK(kinds[0] == std::pair<std::string, size_t>("face", 48));
}

TEST_CASE("edges normalize to ordered pairs") {
  CHECK(Edge(5, 2).a == 2);
  CHECK(Edge(5, 2).b == 5);
  CHECK(Edge(2, 5) == Edge(5, 2));
}

TEST_CASE("graph helpers") {
  PortraitGraph g = small_graph();
  CHECK(g.find_node(1) != nullptr);
  CHECK(g.find_node(9) == nullptr);
  CHECK(g.neighbors(1) == std::vector<uint16_t>({0, 2}));
  CHECK(g.has_edge(1, 0));
  CHECK(g.has_edge(0, 1));
  CHECK_FALSE(g.has_edge(0, 2));
}

TEST_CASE("validation accepts the reference graph") {
  CHECK(validate_graph(small_graph()).empty());
}

TEST_CASE("validation flags structural breakage") {
  auto count = [](const PortraitGraph& g) { return validate_graph(g).size(); };

  PortraitGraph empty;
  CHECK(count(empty) > 0);

  PortraitGraph dup = small_graph();
  dup.nodes[2].id = 1;
  CHECK(count(dup) > 0);

  PortraitGraph wrong_binding = small_graph();
  wrong_binding.nodes[0].features = {filled(FeatureKind::texture, 20, 0.5)};
  CHECK(count(wrong_binding) > 0);

  PortraitGraph wrong_dim = small_graph();
  wrong_dim.nodes[0].features[0].values.resize(47);
  CHECK(count(wrong_dim) > 0);

  PortraitGraph out_of_range = small_graph();
  out_of_range.nodes[1].features[0].values[0] = 1.5;
  CHECK(count(out_of_range) > 0);

  PortraitGraph non_finite = small_graph();
  non_finite.nodes[1].features[0].values[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK(count(non_finite) > 0);

  PortraitGraph self_loop = small_graph();
  self_loop.edges.push_back(Edge(2, 2));
  CHECK(count(self_loop) > 0);

  PortraitGraph dup_edge = small_graph();
  dup_edge.edges.push_back(Edge(1, 0));
  CHECK(count(dup_edge) > 0);

  PortraitGraph dangling = small_graph();
  dangling.edges.push_back(Edge(1, 7));
  CHECK(count(dangling) > 0);
}

TEST_CASE("quantization endpoints and midpoint") {
  CHECK(quantize_feature_value(0.0) == 0);
  CHECK(quantize_feature_value(1.0) == 255);
  CHECK(quantize_feature_value(0.5) == 128);  // round half away from zero
  CHECK(quantize_feature_value(-2.0) == 0);   // clamped
  CHECK(quantize_feature_value(7.0) == 255);
  CHECK_THROWS(quantize_feature_value(std::numeric_limits<double>::infinity()));
  CHECK(dequantize_feature_value(255) == 1.0);
  CHECK(dequantize_feature_value(0) == 0.0);
  // Requantizing a dequantized value is the identity.
  for (int q = 0; q < 256; ++q)
    CHECK(quantize_feature_value(dequantize_feature_value(static_cast<uint8_t>(q))) == q);
}

TEST_CASE("plain frame layout and sizes") {
  PortraitGraph g = small_graph();
  Bytes frame = serialize_profile(g);
  CHECK(frame[0] == kProfileFormatVersion);
  CHECK(frame[1] == kProfileModePlain);
  // header 4 + face node (4 + 3 + 48) + two body nodes (4 + 3+64 + 3+20) * 2
  // + edge section 2 + 2 * 4
  size_t expect = 4 + (4 + 3 + 48) + 2 * (4 + 3 + 64 + 3 + 20) + 2 + 8;
  CHECK(frame.size() == expect);
}

TEST_CASE("plain frame round trip up to quantization") {
  PortraitGraph g = small_graph();
  CounterRng rng(3);
  for (auto& n : g.nodes)
    for (auto& f : n.features)
      for (auto& v : f.values) v = rng.uniform01();

  auto decoded = deserialize_profile(serialize_profile(g));
  REQUIRE(std::holds_alternative<PortraitGraph>(decoded));
  const PortraitGraph& back = std::get<PortraitGraph>(decoded);
  REQUIRE(back.nodes.size() == g.nodes.size());
  CHECK(back.edges == g.edges);
  for (size_t i = 0; i < g.nodes.size(); ++i) {
    CHECK(back.nodes[i].id == g.nodes[i].id);
    CHECK(back.nodes[i].label == g.nodes[i].label);
    REQUIRE(back.nodes[i].features.size() == g.nodes[i].features.size());
    for (size_t k = 0; k < g.nodes[i].features.size(); ++k) {
      const auto& orig = g.nodes[i].features[k];
      const auto& got = back.nodes[i].features[k];
      CHECK(got.kind == orig.kind);
      REQUIRE(got.values.size() == orig.values.size());
      for (size_t d = 0; d < orig.values.size(); ++d) {
        CHECK(got.values[d] ==
              dequantize_feature_value(quantize_feature_value(orig.values[d])));
        CHECK(std::abs(got.values[d] - orig.values[d]) <= 0.5 / 255.0 + 1e-12);
      }
    }
  }
  // Serializing the round-tripped graph reproduces the frame bit for bit.
  CHECK(serialize_profile(back) == serialize_profile(g));
}

TEST_CASE("hashed frame round trip is exact") {
  HashedPortraitGraph g;
  HashedPortraitNode face;
  face.id = 3;
  face.label = NodeLabel::human_face;
  face.codes = {{FeatureKind::face, HashCode::from_bit_string("1010101010101010")}};
  HashedPortraitNode body;
  body.id = 5;
  body.label = NodeLabel::human_body;
  body.codes = {{FeatureKind::color_histogram, HashCode::from_bit_string("11110000")},
                {FeatureKind::texture, HashCode::from_bit_string("00001111")}};
  g.nodes = {face, body};
  g.edges = {Edge(3, 5)};

  Bytes frame = serialize_profile(g);
  CHECK(frame[1] == kProfileModeHashed);
  auto decoded = deserialize_profile(frame);
  REQUIRE(std::holds_alternative<HashedPortraitGraph>(decoded));
  const HashedPortraitGraph& back = std::get<HashedPortraitGraph>(decoded);
  REQUIRE(back.nodes.size() == 2);
  CHECK(back.nodes[0].codes == face.codes);
  CHECK(back.nodes[1].codes == body.codes);
  CHECK(back.edges == g.edges);
}

TEST_CASE("frame parser rejects garbage") {
  CHECK_THROWS(deserialize_profile(Bytes{}));
  CHECK_THROWS(deserialize_profile(Bytes{9, 0, 0, 0}));  // unknown version
  CHECK_THROWS(deserialize_profile(Bytes{1, 7, 0, 0}));  // unknown mode
  PortraitGraph g = small_graph();
  Bytes frame = serialize_profile(g);
  frame.pop_back();
  CHECK_THROWS(deserialize_profile(frame));
  frame = serialize_profile(g);
  frame.push_back(0);
  CHECK_THROWS(deserialize_profile(frame));
}

TEST_CASE("text form round trip") {
  PortraitGraph g = small_graph();
  g.owner_ref = "person-007";
  g.nodes[0].region_ref = "g0:n0";
  CounterRng rng(8);
  for (auto& n : g.nodes)
    for (auto& f : n.features)
      for (auto& v : f.values) v = rng.uniform01();

  std::string text = encode_profile_text(g);
  PortraitGraph back = decode_profile_text(text);
  CHECK(back.owner_ref == g.owner_ref);
  CHECK(back.edges == g.edges);
  REQUIRE(back.nodes.size() == g.nodes.size());
  CHECK(back.nodes[0].region_ref == "g0:n0");
  for (size_t i = 0; i < g.nodes.size(); ++i) {
    CHECK(back.nodes[i].label == g.nodes[i].label);
    for (size_t k = 0; k < g.nodes[i].features.size(); ++k)
      for (size_t d = 0; d < g.nodes[i].features[k].values.size(); ++d)
        CHECK(back.nodes[i].features[k].values[d] ==
              doctest::Approx(g.nodes[i].features[k].values[d]).epsilon(1e-8));
  }
  // Stable after one decode/encode cycle.
  CHECK(encode_profile_text(back) == text);
}
