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

#include "veil/match.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <set>
#include <stdexcept>

namespace veil {

double node_similarity(const PortraitNode& a, const PortraitNode& b) {
  if (a.label != b.label) return 0.0;
  if (a.features.size() != b.features.size())
    throw std::invalid_argument("feature kind sets differ");
  double d2 = 0;
  for (const auto& fa : a.features) {
    const FeatureVector* fb = nullptr;
    for (const auto& f : b.features)
      if (f.kind == fa.kind) fb = &f;
    if (!fb) throw std::invalid_argument("feature kind missing on one side");
    if (fb->dim() != fa.dim()) throw std::invalid_argument("same-kind dimension mismatch");
    double scale = 1.0 / std::sqrt(static_cast<double>(fa.dim()));
    for (size_t t = 0; t < fa.dim(); ++t) {
      double diff = (fa.values[t] - fb->values[t]) * scale;
      d2 += diff * diff;
    }
  }
  return 1.0 / (1.0 + std::sqrt(d2));
}

double node_similarity(const HashedPortraitNode& a, const HashedPortraitNode& b) {
  if (a.label != b.label) return 0.0;
  if (a.codes.size() != b.codes.size()) throw std::invalid_argument("code kind sets differ");
  double total = 0;
  for (const auto& [kind, ca] : a.codes) {
    const HashCode* cb = nullptr;
    for (const auto& [k2, c2] : b.codes)
      if (k2 == kind) cb = &c2;
    if (!cb) throw std::invalid_argument("code kind missing on one side");
    total += 1.0 - static_cast<double>(hamming(ca, *cb)) / static_cast<double>(ca.size());
  }
  return total / static_cast<double>(a.codes.size());
}

MatchMatrix::MatchMatrix(std::vector<uint16_t> row_ids, std::vector<uint16_t> col_ids)
    : row_ids_(std::move(row_ids)),
      col_ids_(std::move(col_ids)),
      entries_(row_ids_.size() * col_ids_.size()) {}

std::vector<std::pair<uint16_t, uint16_t>> MatchMatrix::flagged_pairs() const {
  std::vector<std::pair<uint16_t, uint16_t>> out;
  for (size_t i = 0; i < rows(); ++i)
    for (size_t j = 0; j < cols(); ++j)
      if (at(i, j).f) out.emplace_back(row_ids_[i], col_ids_[j]);
  return out;
}

size_t MatchContext::x_index(uint16_t id) const {
  auto it = x_pos.find(id);
  if (it == x_pos.end()) throw std::out_of_range("unknown node id in Gx");
  return it->second;
}

size_t MatchContext::y_index(uint16_t id) const {
  auto it = y_pos.find(id);
  if (it == y_pos.end()) throw std::out_of_range("unknown node id in Gy");
  return it->second;
}

namespace {

template <typename Graph, typename SimFn>
MatchContext build_context(const Graph& gx, const Graph& gy, SimilaritySpace space, SimFn sim) {
  if (gx.nodes.empty() || gy.nodes.empty()) throw std::invalid_argument("empty graph in matcher");
  MatchContext ctx;
  ctx.space = space;
  for (const auto& n : gx.nodes) {
    ctx.x_pos.emplace(n.id, ctx.x_ids.size());
    ctx.x_ids.push_back(n.id);
  }
  for (const auto& n : gy.nodes) {
    ctx.y_pos.emplace(n.id, ctx.y_ids.size());
    ctx.y_ids.push_back(n.id);
  }
  ctx.x_adj.resize(ctx.x_ids.size());
  ctx.y_adj.resize(ctx.y_ids.size());
  for (const auto& e : gx.edges) {
    ctx.x_adj[ctx.x_index(e.a)].push_back(ctx.x_index(e.b));
    ctx.x_adj[ctx.x_index(e.b)].push_back(ctx.x_index(e.a));
  }
  for (const auto& e : gy.edges) {
    ctx.y_adj[ctx.y_index(e.a)].push_back(ctx.y_index(e.b));
    ctx.y_adj[ctx.y_index(e.b)].push_back(ctx.y_index(e.a));
  }
  for (auto& adj : ctx.x_adj) std::sort(adj.begin(), adj.end());
  for (auto& adj : ctx.y_adj) std::sort(adj.begin(), adj.end());
  ctx.x_edges = gx.edges;
  ctx.y_edges = gy.edges;
  ctx.sims.resize(ctx.x_ids.size() * ctx.y_ids.size());
  for (size_t i = 0; i < ctx.x_ids.size(); ++i)
    for (size_t j = 0; j < ctx.y_ids.size(); ++j)
      ctx.sims[i * ctx.y_ids.size() + j] = sim(gx.nodes[i], gy.nodes[j]);
  return ctx;
}

}  // namespace

MatchContext make_context(const PortraitGraph& gx, const PortraitGraph& gy) {
  SimilaritySpace space{SimilaritySpace::Mode::plain_euclidean, 0};
  return build_context(gx, gy, space, [](const PortraitNode& a, const PortraitNode& b) {
    return node_similarity(a, b);
  });
}

MatchContext make_context(const HashedPortraitGraph& gx, const HashedPortraitGraph& gy) {
  size_t m = gx.nodes.front().codes.front().second.size();
  SimilaritySpace space{SimilaritySpace::Mode::hashed_hamming, m};
  return build_context(gx, gy, space,
                       [](const HashedPortraitNode& a, const HashedPortraitNode& b) {
                         return node_similarity(a, b);
                       });
}

MatchMatrix stage1_filter(const MatchContext& ctx, double xi_s) {
  if (!(xi_s > 0.0 && xi_s < 1.0)) throw std::invalid_argument("candidate threshold outside (0,1)");
  MatchMatrix m(ctx.x_ids, ctx.y_ids);
  for (size_t i = 0; i < m.rows(); ++i)
    for (size_t j = 0; j < m.cols(); ++j) m.at(i, j).f = ctx.sim(i, j) >= xi_s;
  return m;
}

std::vector<int> hungarian_max_weight(const std::vector<std::vector<double>>& weights) {
  size_t p = weights.size();
  size_t q = p ? weights[0].size() : 0;
  for (const auto& row : weights) {
    if (row.size() != q) throw std::invalid_argument("ragged weight matrix");
    for (double w : row)
      if (!std::isfinite(w) || w < 0.0) throw std::invalid_argument("weights must be finite and non-negative");
  }
  std::vector<int> assign(p, -1);
  if (p == 0 || q == 0) return assign;

  // Potential-based shortest-augmenting-path assignment on the negated
  // matrix; rows of the solver are the smaller side.
  bool flip = p > q;
  size_t n = flip ? q : p, cols = flip ? p : q;
  auto wt = [&](size_t i, size_t j) { return flip ? weights[j][i] : weights[i][j]; };

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0), v(cols + 1, 0);
  std::vector<size_t> match(cols + 1, 0), way(cols + 1, 0);
  for (size_t i = 1; i <= n; ++i) {
    match[0] = i;
    size_t j0 = 0;
    std::vector<double> minv(cols + 1, kInf);
    std::vector<char> used(cols + 1, 0);
    do {
      used[j0] = 1;
      size_t i0 = match[j0], j1 = 0;
      double delta = kInf;
      for (size_t j = 1; j <= cols; ++j) {
        if (used[j]) continue;
        double cur = -wt(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (size_t j = 0; j <= cols; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  for (size_t j = 1; j <= cols; ++j) {
    if (match[j] == 0) continue;
    size_t row = flip ? j - 1 : match[j] - 1;
    size_t col = flip ? match[j] - 1 : j - 1;
    if (weights[row][col] > 0.0) assign[row] = static_cast<int>(col);
  }
  return assign;
}

void stage2_neighbor_map(const MatchContext& ctx, MatchMatrix& m) {
  for (size_t i = 0; i < m.rows(); ++i) {
    for (size_t j = 0; j < m.cols(); ++j) {
      MatchEntry& e = m.at(i, j);
      if (!e.f) continue;
      e.n.clear();
      const auto& nx = ctx.x_adj[i];
      const auto& ny = ctx.y_adj[j];
      if (nx.empty()) continue;
      std::vector<std::vector<double>> weights(nx.size(), std::vector<double>(ny.size(), 0.0));
      for (size_t a = 0; a < nx.size(); ++a)
        for (size_t b = 0; b < ny.size(); ++b)
          if (m.at(nx[a], ny[b]).f) weights[a][b] = ctx.sim(nx[a], ny[b]);
      std::vector<int> assign = hungarian_max_weight(weights);
      for (size_t a = 0; a < nx.size(); ++a) {
        if (assign[a] >= 0)
          e.n[ctx.x_ids[nx[a]]] = ctx.y_ids[ny[static_cast<size_t>(assign[a])]];
        else
          e.n[ctx.x_ids[nx[a]]] = std::nullopt;
      }
    }
  }
}


void stage3_vote(const MatchContext& ctx, MatchMatrix& m) {
  size_t p = m.rows(), q = m.cols();

  // Voting: one paired tree walk per flagged root.
  for (size_t ri = 0; ri < p; ++ri) {
    for (size_t rj = 0; rj < q; ++rj) {
      if (!m.at(ri, rj).f) continue;
      std::vector<char> in_x(p, 0), in_y(q, 0);
      std::deque<std::pair<size_t, size_t>> frontier{{ri, rj}};
      in_x[ri] = in_y[rj] = 1;
      while (!frontier.empty()) {
        auto [k, g] = frontier.front();
        frontier.pop_front();
        MatchEntry& e = m.at(k, g);
        e.c += 1;
        for (size_t a : ctx.x_adj[k]) {
          auto it = e.n.find(ctx.x_ids[a]);
          if (it == e.n.end() || !it->second) continue;
          size_t b = ctx.y_index(*it->second);
          if (in_x[a] || in_y[b]) continue;
          in_x[a] = in_y[b] = 1;
          frontier.emplace_back(a, b);
        }
      }
    }
  }

  // Resolution: survivors win by counter, then similarity, then lower
  // index, claimed one-to-one. Columns keep their largest counter where
  // uncontested; a column whose favorite row loses a contest falls back
  // to its best remaining row instead of going unmatched, so a strong
  // rival does not strand the rest of the line.
  struct Pick {
    size_t i, j;
    unsigned c;
    double s;
  };
  std::vector<Pick> picks;
  for (size_t i = 0; i < p; ++i)
    for (size_t j = 0; j < q; ++j)
      if (m.at(i, j).f) picks.push_back({i, j, m.at(i, j).c, ctx.sim(i, j)});
  std::sort(picks.begin(), picks.end(), [](const Pick& a, const Pick& b) {
    if (a.c != b.c) return a.c > b.c;
    if (a.s != b.s) return a.s > b.s;
    if (a.j != b.j) return a.j < b.j;
    return a.i < b.i;
  });
  std::vector<char> row_taken(p, 0), col_taken(q, 0);
  for (size_t i = 0; i < p; ++i)
    for (size_t j = 0; j < q; ++j) m.at(i, j).f = false;
  for (const Pick& pk : picks) {
    if (row_taken[pk.i] || col_taken[pk.j]) continue;
    row_taken[pk.i] = col_taken[pk.j] = 1;
    m.at(pk.i, pk.j).f = true;
  }
}

MatchMatrix run_stages(const MatchContext& ctx, double xi_s) {
  MatchMatrix m = stage1_filter(ctx, xi_s);
  stage2_neighbor_map(ctx, m);
  stage3_vote(ctx, m);
  return m;
}

double graph_similarity(const MatchContext& ctx, const MatchMatrix& m) {
  double node_term = 0;
  for (size_t i = 0; i < m.rows(); ++i)
    for (size_t j = 0; j < m.cols(); ++j)
      if (m.at(i, j).f) node_term += ctx.sim(i, j);
  node_term /= static_cast<double>(m.rows() + m.cols());

  double edge_hits = 0;
  size_t ex = ctx.x_edges.size(), ey = ctx.y_edges.size();
  if (ex + ey == 0) return node_term;
  for (const auto& e1 : ctx.x_edges) {
    size_t a = ctx.x_index(e1.a), b = ctx.x_index(e1.b);
    for (const auto& e2 : ctx.y_edges) {
      size_t c = ctx.y_index(e2.a), d = ctx.y_index(e2.b);
      bool hit = (m.at(a, c).f && m.at(b, d).f) || (m.at(a, d).f && m.at(b, c).f);
      if (hit) edge_hits += 1;
    }
  }
  return node_term + edge_hits / static_cast<double>(ex + ey);
}

namespace {

template <typename Graph>
std::vector<ProfileMatch> match_profiles_impl(
    const std::vector<std::pair<std::string, Graph>>& invisible, const std::vector<Graph>& photo,
    double xi_s, double theta_s) {
  if (!(theta_s > 0.0 && theta_s < 1.0))
    throw std::invalid_argument("acceptance threshold outside (0,1)");

  struct Cand {
    size_t photo;
    size_t user;
    double score;
  };
  std::vector<Cand> cands;
  for (size_t u = 0; u < invisible.size(); ++u) {
    for (size_t ph = 0; ph < photo.size(); ++ph) {
      MatchContext ctx = make_context(invisible[u].second, photo[ph]);
      MatchMatrix m = run_stages(ctx, xi_s);
      double score = graph_similarity(ctx, m);
      if (score >= theta_s) cands.push_back({ph, u, score});
    }
  }
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.photo != b.photo) return a.photo < b.photo;
    return a.user < b.user;
  });

  std::set<size_t> used_photo, used_user;
  std::vector<ProfileMatch> out;
  for (const Cand& c : cands) {
    if (used_photo.contains(c.photo) || used_user.contains(c.user)) continue;
    used_photo.insert(c.photo);
    used_user.insert(c.user);
    out.push_back({c.photo, invisible[c.user].first, c.score});
  }
  std::sort(out.begin(), out.end(),
            [](const ProfileMatch& a, const ProfileMatch& b) { return a.photo_index < b.photo_index; });
  return out;
}

}  // namespace

std::vector<ProfileMatch> match_profiles(
    const std::vector<std::pair<std::string, PortraitGraph>>& invisible,
    const std::vector<PortraitGraph>& photo, double xi_s, double theta_s) {
  return match_profiles_impl(invisible, photo, xi_s, theta_s);
}

std::vector<ProfileMatch> match_profiles(
    const std::vector<std::pair<std::string, HashedPortraitGraph>>& invisible,
    const std::vector<HashedPortraitGraph>& photo, double xi_s, double theta_s) {
  return match_profiles_impl(invisible, photo, xi_s, theta_s);
}

}  // namespace veil
