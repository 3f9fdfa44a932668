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

#include "veil/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "veil/rng.hpp"

namespace veil {

PersonShape dense_shape() {
  PersonShape s;
  s.body_min = 19;
  s.body_max = 34;
  s.p_face = 1.0;
  return s;
}

namespace {

FeatureVector latent_vector(FeatureKind kind, size_t dim, CounterRng& rng) {
  FeatureVector f;
  f.kind = kind;
  f.values.resize(dim);
  for (double& v : f.values) v = rng.chance(0.5) ? kLatentHi : kLatentLo;
  return f;
}

PortraitNode latent_body_node(uint16_t id, const FeatureDims& dims, CounterRng& rng) {
  PortraitNode n;
  n.id = id;
  n.label = NodeLabel::human_body;
  n.features.push_back(latent_vector(FeatureKind::color_histogram, dims.color_histogram, rng));
  n.features.push_back(latent_vector(FeatureKind::texture, dims.texture, rng));
  return n;
}

FeatureVector noisy_copy(const FeatureVector& latent, double sigma, CounterRng& rng) {
  FeatureVector f;
  f.kind = latent.kind;
  f.values.resize(latent.values.size());
  for (size_t d = 0; d < f.values.size(); ++d)
    f.values[d] = std::clamp(latent.values[d] + sigma * rng.gaussian(), 0.0, 1.0);
  return f;
}

}  // namespace

SyntheticPerson gen_person(uint64_t seed, const PersonShape& shape, const FeatureDims& dims) {
  if (shape.body_min < 1 || shape.body_max < shape.body_min)
    throw std::invalid_argument("bad body node range");
  CounterRng rng(seed);

  SyntheticPerson person;
  person.seed = seed;
  person.person_id = "p" + std::to_string(seed);

  uint16_t next_id = 0;
  bool has_face = rng.chance(shape.p_face);
  if (has_face) {
    PortraitNode face;
    face.id = next_id++;
    face.label = NodeLabel::human_face;
    face.features.push_back(latent_vector(FeatureKind::face, dims.face, rng));
    person.canonical.nodes.push_back(std::move(face));
  }
  size_t bodies = shape.body_min + rng.below(shape.body_max - shape.body_min + 1);
  for (size_t k = 0; k < bodies; ++k)
    person.canonical.nodes.push_back(latent_body_node(next_id++, dims, rng));

  // Body regions form the connected core (random spanning tree plus a few
  // shortcut edges); the face borders exactly one body region. A photo
  // that misses the face then loses a single leaf edge instead of the
  // graph's hub, which keeps the remaining structure matchable.
  auto& nodes = person.canonical.nodes;
  size_t first_body = has_face ? 1 : 0;
  for (size_t k = 1; k < bodies; ++k) {
    size_t parent = first_body + rng.below(k);
    person.canonical.edges.emplace_back(nodes[parent].id, nodes[first_body + k].id);
  }
  if (has_face)
    person.canonical.edges.emplace_back(nodes[0].id, nodes[first_body + rng.below(bodies)].id);
  size_t extra = static_cast<size_t>(std::floor(double(bodies) * shape.extra_edge_prob));
  for (size_t t = 0; t < extra && bodies >= 2; ++t) {
    uint16_t a = nodes[first_body + rng.below(bodies)].id;
    uint16_t b = nodes[first_body + rng.below(bodies)].id;
    if (a == b || person.canonical.has_edge(a, b)) continue;
    person.canonical.edges.emplace_back(a, b);
  }
  std::sort(person.canonical.edges.begin(), person.canonical.edges.end());
  return person;
}

NoiseModel enrollment_noise(const NoiseModel& field) {
  NoiseModel n = field;
  n.drop_prob = 0.0;
  n.split_prob = 0.0;
  n.bg_mean = 0.0;
  n.face_visibility = 1.0;
  return n;
}

PortraitGraph observe(const SyntheticPerson& person, const NoiseModel& noise, uint64_t seed) {
  CounterRng rng(seed);
  const PortraitGraph& canon = person.canonical;

  PortraitGraph out;
  out.owner_ref = person.person_id;

  uint16_t next_id = 0;
  for (const auto& n : canon.nodes) next_id = std::max<uint16_t>(next_id, n.id + 1);

  // Survival pass: faces live by visibility, bodies by the drop rate.
  std::vector<const PortraitNode*> kept;
  for (const auto& n : canon.nodes) {
    bool keep = n.label == NodeLabel::human_face ? rng.chance(noise.face_visibility)
                                                 : !rng.chance(noise.drop_prob);
    if (keep) kept.push_back(&n);
  }
  if (kept.empty()) throw std::runtime_error("empty observation");

  std::vector<std::pair<uint16_t, uint16_t>> twins;  // (source id, twin id)
  for (const PortraitNode* src : kept) {
    PortraitNode copy;
    copy.id = src->id;
    copy.label = src->label;
    for (const auto& f : src->features) copy.features.push_back(noisy_copy(f, noise.feature_sigma, rng));
    out.nodes.push_back(std::move(copy));

    if (src->label == NodeLabel::human_body && rng.chance(noise.split_prob)) {
      PortraitNode twin;
      twin.id = next_id++;
      twin.label = src->label;
      for (const auto& f : src->features)
        twin.features.push_back(noisy_copy(f, noise.feature_sigma, rng));
      twins.emplace_back(src->id, twin.id);
      out.nodes.push_back(std::move(twin));
    }
  }

  auto surviving = [&](uint16_t id) {
    for (const PortraitNode* src : kept)
      if (src->id == id) return true;
    return false;
  };
  for (const auto& e : canon.edges)
    if (surviving(e.a) && surviving(e.b)) out.edges.emplace_back(e.a, e.b);
  // Twins take over their source's surviving neighborhood.
  for (const auto& [src_id, twin_id] : twins)
    for (const auto& e : canon.edges) {
      if (e.a == src_id && surviving(e.b)) out.edges.emplace_back(twin_id, e.b);
      if (e.b == src_id && surviving(e.a)) out.edges.emplace_back(twin_id, e.a);
    }

  // Background clutter: stranger-statistics body nodes hooked onto one
  // existing node each.
  const FeatureDims dims = [&] {
    FeatureDims d;
    for (const auto& n : canon.nodes)
      for (const auto& f : n.features) {
        if (f.kind == FeatureKind::face) d.face = f.dim();
        if (f.kind == FeatureKind::color_histogram) d.color_histogram = f.dim();
        if (f.kind == FeatureKind::texture) d.texture = f.dim();
      }
    return d;
  }();
  uint64_t bg_count = rng.poisson(noise.bg_mean);
  for (uint64_t t = 0; t < bg_count; ++t) {
    PortraitNode latent = latent_body_node(next_id++, dims, rng);
    PortraitNode bg;
    bg.id = latent.id;
    bg.label = latent.label;
    for (const auto& f : latent.features) bg.features.push_back(noisy_copy(f, noise.feature_sigma, rng));
    uint16_t anchor = out.nodes[rng.below(out.nodes.size())].id;
    uint16_t bg_id = bg.id;
    out.nodes.push_back(std::move(bg));
    out.edges.emplace_back(anchor, bg_id);
  }

  std::sort(out.edges.begin(), out.edges.end());
  out.edges.erase(std::unique(out.edges.begin(), out.edges.end()), out.edges.end());
  return out;
}

Scene gen_scene(const std::vector<ScenePlacement>& subjects, const Pose& photographer,
                size_t bystander_count, const NoiseModel& noise, uint64_t seed,
                const PersonShape& bystander_shape, const FeatureDims& dims) {
  Scene scene;
  CounterRng rng(tagged_seed(seed, "scene"));

  auto add_graph = [&](PortraitGraph g, const std::string& person_id) {
    size_t idx = scene.photo_graphs.size();
    for (auto& n : g.nodes)
      n.region_ref = "g" + std::to_string(idx) + ":n" + std::to_string(n.id);
    if (!person_id.empty()) scene.truth[idx] = person_id;
    scene.photo_graphs.push_back(std::move(g));
  };
  // A sighting can drop every node; redraw rather than lose the subject.
  auto sight = [&](const SyntheticPerson& person) {
    for (int attempt = 0; attempt < 64; ++attempt) {
      uint64_t s = rng.next_u64();
      try {
        return observe(person, noise, s);
      } catch (const std::runtime_error&) {
      }
    }
    throw std::runtime_error("subject never survived observation");
  };

  for (const auto& placed : subjects) {
    if (placed.occluded || !in_fov(photographer, placed.x, placed.y)) continue;
    add_graph(sight(placed.person), placed.person.person_id);
  }
  for (size_t b = 0; b < bystander_count; ++b) {
    SyntheticPerson stranger = gen_person(rng.next_u64(), bystander_shape, dims);
    stranger.person_id = "";  // no protection claim
    add_graph(sight(stranger), "");
  }
  return scene;
}

std::vector<uint64_t> CorpusManifest::person_seeds() const {
  std::vector<uint64_t> seeds;
  seeds.reserve(person_count);
  for (size_t i = 0; i < person_count; ++i)
    seeds.push_back(tagged_seed(master_seed, "person:" + std::to_string(i)));
  return seeds;
}

std::string CorpusManifest::person_id(size_t index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "person-%03zu", index);
  return buf;
}

std::string encode_manifest(const CorpusManifest& m) {
  std::ostringstream out;
  out << "corpus-manifest v1\n";
  out << "master_seed " << m.master_seed << "\n";
  out << "persons " << m.person_count << "\n";
  out << "shape body_min=" << m.shape.body_min << " body_max=" << m.shape.body_max
      << " p_face=" << m.shape.p_face << " extra_edge_prob=" << m.shape.extra_edge_prob << "\n";
  out << "dims face=" << m.dims.face << " color_histogram=" << m.dims.color_histogram
      << " texture=" << m.dims.texture << "\n";
  out << "noise sigma=" << m.noise.feature_sigma << " drop=" << m.noise.drop_prob
      << " split=" << m.noise.split_prob << " bg_mean=" << m.noise.bg_mean
      << " face_visibility=" << m.noise.face_visibility << "\n";
  out << "latent lo=" << kLatentLo << " hi=" << kLatentHi << "\n";
  return out.str();
}

CorpusManifest decode_manifest(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "corpus-manifest v1")
    throw std::runtime_error("bad manifest header");

  CorpusManifest m;
  auto fields = [](std::istringstream& ls) {
    std::map<std::string, double> kv;
    std::string item;
    while (ls >> item) {
      auto eq = item.find('=');
      if (eq == std::string::npos) continue;
      kv[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
    }
    return kv;
  };

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "master_seed") {
      ls >> m.master_seed;
    } else if (word == "persons") {
      ls >> m.person_count;
    } else if (word == "shape") {
      auto kv = fields(ls);
      m.shape.body_min = static_cast<size_t>(kv.at("body_min"));
      m.shape.body_max = static_cast<size_t>(kv.at("body_max"));
      m.shape.p_face = kv.at("p_face");
      m.shape.extra_edge_prob = kv.at("extra_edge_prob");
    } else if (word == "dims") {
      auto kv = fields(ls);
      m.dims.face = static_cast<size_t>(kv.at("face"));
      m.dims.color_histogram = static_cast<size_t>(kv.at("color_histogram"));
      m.dims.texture = static_cast<size_t>(kv.at("texture"));
    } else if (word == "noise") {
      auto kv = fields(ls);
      m.noise.feature_sigma = kv.at("sigma");
      m.noise.drop_prob = kv.at("drop");
      m.noise.split_prob = kv.at("split");
      m.noise.bg_mean = kv.at("bg_mean");
      m.noise.face_visibility = kv.at("face_visibility");
    } else if (word == "latent") {
      // informational; constants live in code
    } else {
      throw std::runtime_error("unknown manifest line: " + word);
    }
  }
  return m;
}

}  // namespace veil
