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

#include "veil/corpus.hpp"
#include "veil/match.hpp"

namespace veil {

/// Accuracy trial setup: a fixed enrolled population, and per trial a
/// photo of a few enrolled subjects plus strangers. Mirroring the live
/// pipeline's proximity scoping, only the subjects placed in this
/// trial's shot contest its photo persons, in plain and hashed space;
/// their profiles are enrollment-quality captures, the photo side
/// carries field noise.
struct AccuracyConfig {
  uint64_t master_seed = 42;
  size_t person_count = 42;
  size_t trials = 100;
  size_t subjects_per_trial = 3;  // enrolled users in the photo
  size_t bystanders_per_trial = 1;
  /// False models the stranger-only regime: the subjects still stand
  /// near the shot and contest it, but every photographed person is a
  /// stranger, so any claim is a false positive.
  bool subjects_in_photo = true;
  double xi_s = 0.5;
  double theta_s = 0.5;
  size_t lsh_m = 128;
  double lsh_w = 3.0;
  PersonShape shape;
  NoiseModel noise;
  FeatureDims dims;
};

/// Raw material of one trial: the full score matrix in both spaces, so
/// different acceptance thresholds can be evaluated without re-matching.
struct TrialScores {
  std::vector<std::string> truth;            // per photo graph; "" for strangers
  std::vector<size_t> contestants;           // enrolled indices, row order
  std::vector<std::vector<double>> plain;    // [contestant][photo graph]
  std::vector<std::vector<double>> hashed;   // same shape
};

struct TrialSet {
  std::vector<std::string> enrolled;  // user ids; trials index into this
  std::vector<TrialScores> trials;
};

TrialSet collect_trials(const AccuracyConfig& cfg);

struct ModeRates {
  size_t present = 0;       // photographed instances of enrolled users
  size_t missed = 0;        // present but not claimed by the right user
  size_t photographed = 0;  // every photographed person, strangers included
  size_t wrong = 0;         // claimed by a user who is not the one pictured
  double fn_rate = 0;       // missed / present
  double fp_rate = 0;       // wrong / photographed
};

struct AccuracyReport {
  size_t trials = 0;
  ModeRates plain;
  ModeRates hashed;
  /// Fraction of per-photo-person decisions (claimed user or nobody)
  /// identical between the two spaces.
  double agreement = 0;
  double self_mean = 0;   // matched-person plain score average
  double cross_mean = 0;  // mismatched-person plain score average
  double gap = 0;         // self_mean - cross_mean
};

/// Greedy one-to-one resolution over one score matrix, mirroring the
/// live pipeline's conflict handling: candidates at or above theta,
/// best score first, photo index then user index as tie-breaks.
/// Returns per-photo-graph claimed user index, or -1.
std::vector<int> resolve_claims(const std::vector<std::vector<double>>& scores, double theta_s);

AccuracyReport score_trials(const TrialSet& set, double theta_s);

AccuracyReport run_accuracy_trials(const AccuracyConfig& cfg);

}  // namespace veil
