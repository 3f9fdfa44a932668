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
#include <optional>
#include <string>
#include <vector>

#include "veil/portrait.hpp"

namespace veil {

/// Which distance the matcher runs on. The hashed mode carries the code
/// length m so similarity can be normalized without the family at hand.
struct SimilaritySpace {
  enum class Mode { plain_euclidean, hashed_hamming };
  Mode mode = Mode::plain_euclidean;
  size_t m = 0;
};

/// Similarity in [0,1]: zero across labels; plain mode 1/(1+d) with d the
/// Euclidean distance over the per-kind concatenation, each kind scaled
/// by 1/sqrt(dim); hashed mode the mean of (1 - Hamming/m) over per-kind
/// code pairs.
double node_similarity(const PortraitNode& a, const PortraitNode& b);
double node_similarity(const HashedPortraitNode& a, const HashedPortraitNode& b);

/// One matrix entry: candidate flag, the stage-2 neighbor assignment
/// (node id to node id, nullopt recording an unmatched neighbor), and the
/// stage-3 vote counter.
struct MatchEntry {
  bool f = false;
  std::map<uint16_t, std::optional<uint16_t>> n;
  unsigned c = 0;
};

class MatchMatrix {
 public:
  MatchMatrix() = default;
  MatchMatrix(std::vector<uint16_t> row_ids, std::vector<uint16_t> col_ids);

  size_t rows() const { return row_ids_.size(); }
  size_t cols() const { return col_ids_.size(); }
  const std::vector<uint16_t>& row_ids() const { return row_ids_; }
  const std::vector<uint16_t>& col_ids() const { return col_ids_; }

  MatchEntry& at(size_t i, size_t j) { return entries_[i * cols() + j]; }
  const MatchEntry& at(size_t i, size_t j) const { return entries_[i * cols() + j]; }

  /// Resolved flag pairs as (row node id, col node id), row-major order.
  std::vector<std::pair<uint16_t, uint16_t>> flagged_pairs() const;

 private:
  std::vector<uint16_t> row_ids_;
  std::vector<uint16_t> col_ids_;
  std::vector<MatchEntry> entries_;
};

/// Topology plus precomputed pair similarities for one (Gx, Gy) run; the
/// one place the plain/hashed distinction is resolved, so the stages
/// themselves stay type-agnostic.
struct MatchContext {
  SimilaritySpace space;
  std::vector<uint16_t> x_ids, y_ids;
  std::map<uint16_t, size_t> x_pos, y_pos;        // node id -> index
  std::vector<std::vector<size_t>> x_adj, y_adj;  // neighbor indices
  std::vector<Edge> x_edges, y_edges;             // node-id pairs as given
  std::vector<double> sims;                       // row-major |x| * |y|

  double sim(size_t i, size_t j) const { return sims[i * y_ids.size() + j]; }
  size_t x_index(uint16_t id) const;
  size_t y_index(uint16_t id) const;
};

MatchContext make_context(const PortraitGraph& gx, const PortraitGraph& gy);
MatchContext make_context(const HashedPortraitGraph& gx, const HashedPortraitGraph& gy);

/// Stage 1: flag every pair with similarity at or above the threshold.
MatchMatrix stage1_filter(const MatchContext& ctx, double xi_s);

/// Stage 2: for each flagged pair, a maximum-weight assignment between
/// the two one-hop neighborhoods; only pairs flagged in stage 1 count as
/// bipartite edges, weighted by similarity.
void stage2_neighbor_map(const MatchContext& ctx, MatchMatrix& m);

/// Stage 3: grow paired breadth-first trees from every flagged pair,
/// following the recorded neighbor assignments; each tree pair casts one
/// vote. Flags are then claimed one-to-one in order of (votes,
/// similarity, lower column, lower row), so each column keeps its
/// best-voted row where uncontested and falls back to its next free row
/// otherwise; at most one flag survives per row and per column.
void stage3_vote(const MatchContext& ctx, MatchMatrix& m);

/// All three stages in order.
MatchMatrix run_stages(const MatchContext& ctx, double xi_s);

/// Score of a resolved matrix: matched-node similarities over the total
/// node count, plus matched edge pairs over the total edge count (an
/// edge pair counts when its endpoints are flagged together, in either
/// orientation). Edgeless sides contribute zero rather than 0/0.
double graph_similarity(const MatchContext& ctx, const MatchMatrix& m);

/// Maximum-weight one-to-one assignment. Returns, per row, the assigned
/// column or -1. Weights must be finite and non-negative; zero weight
/// means "no edge" and is never part of the result.
std::vector<int> hungarian_max_weight(const std::vector<std::vector<double>>& weights);

struct ProfileMatch {
  size_t photo_index = 0;
  std::string user_id;
  double score = 0;
};

/// Full pipeline for every (invisible profile, photo person) pair;
/// accepts scores at or above theta_s and resolves cross-pair conflicts
/// greedily by descending score into a one-to-one result, returned in
/// photo-index order.
std::vector<ProfileMatch> match_profiles(
    const std::vector<std::pair<std::string, PortraitGraph>>& invisible,
    const std::vector<PortraitGraph>& photo, double xi_s, double theta_s);
std::vector<ProfileMatch> match_profiles(
    const std::vector<std::pair<std::string, HashedPortraitGraph>>& invisible,
    const std::vector<HashedPortraitGraph>& photo, double xi_s, double theta_s);

}  // namespace veil
