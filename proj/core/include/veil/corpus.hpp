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
#include <map>
#include <string>
#include <vector>

#include "veil/portrait.hpp"
#include "veil/pose.hpp"

namespace veil {

/// Node-count envelope of a generated person. The default mirrors casual
/// snapshots; the dense preset matches crowded-photo regimes and is what
/// the runtime benchmarks use.
struct PersonShape {
  size_t body_min = 3;
  size_t body_max = 10;
  double p_face = 1.0;
  double extra_edge_prob = 0.5;
};

PersonShape dense_shape();  // 20..35 nodes including the face

/// Observation degradations. Defaults are the calibrated operating point:
/// feature noise well inside the self/cross similarity gap, and face
/// visibility at the field ratio of detected faces to detected people.
struct NoiseModel {
  double feature_sigma = 0.05;
  double drop_prob = 0.05;
  double split_prob = 0.02;
  double bg_mean = 0.2;  // Poisson mean of inserted background nodes
  double face_visibility = 412.0 / 1326.0;
};

/// Latent feature values sit on a two-level pattern per dimension; the
/// margin keeps observation noise away from the [0,1] clamp.
constexpr double kLatentLo = 0.08;
constexpr double kLatentHi = 0.92;

/// Controlled-capture variant of a field noise model: the subject poses
/// for the shot, so nothing is dropped, hidden, split, or photobombed;
/// sensor noise stays. Registration profile uploads use this.
NoiseModel enrollment_noise(const NoiseModel& field);

struct SyntheticPerson {
  std::string person_id;
  uint64_t seed = 0;
  PortraitGraph canonical;
};

/// Deterministic person from seed: binary-pattern latents per node and
/// kind; body regions form a random spanning tree plus a few extra
/// edges, the face hangs off one body region as a leaf.
SyntheticPerson gen_person(uint64_t seed, const PersonShape& shape = {},
                           const FeatureDims& dims = {});

/// One noisy sighting: per-dimension Gaussian noise (clamped to [0,1]),
/// body-node drops, face kept only per visibility, occasional node splits
/// (twin shares the neighborhood), Poisson background insertions drawn
/// from the stranger distribution. Throws if nothing survives.
PortraitGraph observe(const SyntheticPerson& person, const NoiseModel& noise, uint64_t seed);

struct ScenePlacement {
  SyntheticPerson person;
  double x = 0;
  double y = 0;
  bool occluded = false;  // inside the FOV but hidden from the photo
};

struct Scene {
  /// One graph per photographed person, region_ref tokens filled in.
  std::vector<PortraitGraph> photo_graphs;
  /// Photo graph index -> person id, for placed subjects only
  /// (bystanders have no ground-truth claim).
  std::map<size_t, std::string> truth;
};

/// Photographs every non-occluded subject inside the viewer's sector plus
/// `bystander_count` freshly generated strangers.
Scene gen_scene(const std::vector<ScenePlacement>& subjects, const Pose& photographer,
                size_t bystander_count, const NoiseModel& noise, uint64_t seed,
                const PersonShape& bystander_shape = {}, const FeatureDims& dims = {});

/// Seed book for a corpus: everything needed to regenerate it, plus the
/// calibration constants in force when it was written.
struct CorpusManifest {
  uint64_t master_seed = 0;
  size_t person_count = 0;
  PersonShape shape;
  NoiseModel noise;
  FeatureDims dims;

  std::vector<uint64_t> person_seeds() const;
  static std::string person_id(size_t index);
};

std::string encode_manifest(const CorpusManifest& m);
CorpusManifest decode_manifest(const std::string& text);

}  // namespace veil
