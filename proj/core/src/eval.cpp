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

#include "veil/eval.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "veil/bigint.hpp"
#include "veil/lsh.hpp"
#include "veil/rng.hpp"
#include "veil/transform.hpp"

namespace veil {

namespace {

PortraitGraph observe_retry(const SyntheticPerson& person, const NoiseModel& noise,
                            uint64_t seed) {
  for (int attempt = 0;; ++attempt) {
    try {
      return observe(person, noise, seed);
    } catch (const std::runtime_error&) {
      if (attempt >= 64) throw;
      seed = tagged_seed(seed, "redraw");
    }
  }
}

double pair_score(const MatchContext& ctx, double xi_s) {
  MatchMatrix m = run_stages(ctx, xi_s);
  return graph_similarity(ctx, m);
}

}  // namespace

TrialSet collect_trials(const AccuracyConfig& cfg) {
  CorpusManifest manifest;
  manifest.master_seed = cfg.master_seed;
  manifest.person_count = cfg.person_count;
  manifest.shape = cfg.shape;
  manifest.noise = cfg.noise;
  manifest.dims = cfg.dims;

  std::vector<SyntheticPerson> people;
  std::vector<uint64_t> seeds = manifest.person_seeds();
  for (size_t i = 0; i < cfg.person_count; ++i) {
    SyntheticPerson p = gen_person(seeds[i], cfg.shape, cfg.dims);
    p.person_id = CorpusManifest::person_id(i);
    people.push_back(std::move(p));
  }

  LshSuite lsh(cfg.lsh_m, cfg.lsh_w, tagged_seed(cfg.master_seed, "lsh-master"),
               cfg.dims.kinds());

  TrialSet set;
  for (const auto& p : people) set.enrolled.push_back(p.person_id);

  for (size_t t = 0; t < cfg.trials; ++t) {
    uint64_t trial_seed = tagged_seed(cfg.master_seed, "trial:" + std::to_string(t));
    CounterRng rng(trial_seed);

    // Subjects: a fresh draw of enrolled people for this photo.
    std::vector<size_t> order(people.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (size_t k = order.size(); k > 1; --k) std::swap(order[k - 1], order[rng.below(k)]);
    size_t subject_count = std::min(cfg.subjects_per_trial, people.size());

    TrialScores trial;
    std::vector<PortraitGraph> photo;
    for (size_t s = 0; s < subject_count; ++s) {
      const SyntheticPerson& p = people[order[s]];
      if (cfg.subjects_in_photo) {
        photo.push_back(observe_retry(p, cfg.noise, rng.next_u64()));
        trial.truth.push_back(p.person_id);
      }
      trial.contestants.push_back(order[s]);
    }
    for (size_t b = 0; b < cfg.bystanders_per_trial; ++b) {
      SyntheticPerson stranger = gen_person(rng.next_u64(), cfg.shape, cfg.dims);
      photo.push_back(observe_retry(stranger, cfg.noise, rng.next_u64()));
      trial.truth.push_back("");
    }

    // Only users near the shot are matched, as in the live pipeline; each
    // uploads an enrollment-quality capture as their profile.
    NoiseModel profile_noise = enrollment_noise(cfg.noise);
    std::vector<PortraitGraph> profiles;
    for (size_t contestant : trial.contestants) {
      const SyntheticPerson& p = people[contestant];
      profiles.push_back(observe_retry(p, profile_noise,
                                       tagged_seed(trial_seed, "profile:" + p.person_id)));
    }

    // Session secret for the hashed space: any big value works, the
    // transform only folds its bytes.
    BigInt r = 1;
    for (int w = 0; w < 4; ++w) r = (r << 64) | rng.next_u64();

    std::vector<HashedPortraitGraph> hashed_profiles, hashed_photo;
    for (const auto& g : profiles) hashed_profiles.push_back(transform_profile(g, r, lsh, ""));
    for (const auto& g : photo) hashed_photo.push_back(transform_profile(g, r, lsh, ""));

    trial.plain.assign(profiles.size(), std::vector<double>(photo.size(), 0.0));
    trial.hashed.assign(profiles.size(), std::vector<double>(photo.size(), 0.0));
    for (size_t u = 0; u < profiles.size(); ++u) {
      for (size_t g = 0; g < photo.size(); ++g) {
        trial.plain[u][g] = pair_score(make_context(profiles[u], photo[g]), cfg.xi_s);
        trial.hashed[u][g] =
            pair_score(make_context(hashed_profiles[u], hashed_photo[g]), cfg.xi_s);
      }
    }
    set.trials.push_back(std::move(trial));
  }
  return set;
}

std::vector<int> resolve_claims(const std::vector<std::vector<double>>& scores, double theta_s) {
  size_t graphs = scores.empty() ? 0 : scores[0].size();
  struct Cand {
    size_t photo;
    size_t user;
    double score;
  };
  std::vector<Cand> cands;
  for (size_t u = 0; u < scores.size(); ++u)
    for (size_t g = 0; g < graphs; ++g)
      if (scores[u][g] >= theta_s) cands.push_back({g, u, scores[u][g]});
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.photo != b.photo) return a.photo < b.photo;
    return a.user < b.user;
  });
  std::vector<int> claim(graphs, -1);
  std::set<size_t> used_user;
  for (const Cand& c : cands) {
    if (claim[c.photo] != -1 || used_user.contains(c.user)) continue;
    claim[c.photo] = static_cast<int>(c.user);
    used_user.insert(c.user);
  }
  return claim;
}

AccuracyReport score_trials(const TrialSet& set, double theta_s) {
  AccuracyReport report;
  report.trials = set.trials.size();

  size_t decisions = 0, agreements = 0;
  size_t self_n = 0, cross_n = 0;
  double self_sum = 0, cross_sum = 0;

  auto tally = [&](ModeRates& rates, const TrialScores& trial, const std::vector<int>& claim) {
    for (size_t g = 0; g < trial.truth.size(); ++g) {
      ++rates.photographed;
      const std::string& actual = trial.truth[g];
      std::string claimed =
          claim[g] == -1 ? "" : set.enrolled[trial.contestants[claim[g]]];
      if (!actual.empty()) {
        ++rates.present;
        if (claimed != actual) ++rates.missed;
      }
      if (!claimed.empty() && claimed != actual) ++rates.wrong;
    }
  };

  for (const TrialScores& trial : set.trials) {
    std::vector<int> plain_claim = resolve_claims(trial.plain, theta_s);
    std::vector<int> hashed_claim = resolve_claims(trial.hashed, theta_s);
    tally(report.plain, trial, plain_claim);
    tally(report.hashed, trial, hashed_claim);
    for (size_t g = 0; g < trial.truth.size(); ++g) {
      ++decisions;
      if (plain_claim[g] == hashed_claim[g]) ++agreements;
    }
    for (size_t u = 0; u < trial.plain.size(); ++u) {
      for (size_t g = 0; g < trial.truth.size(); ++g) {
        if (set.enrolled[trial.contestants[u]] == trial.truth[g]) {
          self_sum += trial.plain[u][g];
          ++self_n;
        } else {
          cross_sum += trial.plain[u][g];
          ++cross_n;
        }
      }
    }
  }

  auto finish = [](ModeRates& r) {
    r.fn_rate = r.present ? static_cast<double>(r.missed) / r.present : 0.0;
    r.fp_rate = r.photographed ? static_cast<double>(r.wrong) / r.photographed : 0.0;
  };
  finish(report.plain);
  finish(report.hashed);
  report.agreement = decisions ? static_cast<double>(agreements) / decisions : 1.0;
  report.self_mean = self_n ? self_sum / self_n : 0.0;
  report.cross_mean = cross_n ? cross_sum / cross_n : 0.0;
  report.gap = report.self_mean - report.cross_mean;
  return report;
}

AccuracyReport run_accuracy_trials(const AccuracyConfig& cfg) {
  return score_trials(collect_trials(cfg), cfg.theta_s);
}

}  // namespace veil
