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
//
// Command-line front end: corpus generation, scenario runs in either
// capture mode, threshold sweeps, micro-benchmarks, and verification
// drills. One JSON config drives every subcommand; flags override
// individual fields. Exit codes: 0 success, 1 usage or config error,
// 2 scenario invariant breach.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "veil/corpus.hpp"
#include "veil/eval.hpp"
#include "veil/lsh.hpp"
#include "veil/match.hpp"
#include "veil/portrait.hpp"
#include "veil/protocol.hpp"
#include "veil/rng.hpp"
#include "veil/transform.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace veil;

namespace {

// Config problems carry the offending field path so the usage error
// names it.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct RosterEntry {
  std::string id;
  std::string intent = "invisible";
  size_t person = 0;  // corpus person index
  double x = 0;
  double y = 0;
  double heading = 0;  // only meaningful for the photographer
  bool registered = true;
};

struct CliConfig {
  uint64_t seed = 42;
  std::string output_dir = "veil-out";

  size_t persons = 42;
  bool dense = false;

  NoiseModel noise;
  double xi = 0.5;
  double theta = 0.5;
  size_t lsh_m = 128;
  double lsh_w = 3.0;
  unsigned agreement_bits = 512;

  std::string mode = "baseline";
  size_t photos = 2;
  size_t scenario_bystanders = 1;
  std::vector<std::string> keep;
  std::vector<RosterEntry> roster;  // empty -> bundled demo roster

  std::vector<double> grid = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  size_t sweep_trials = 100;
  size_t sweep_subjects = 3;
  size_t sweep_bystanders = 1;
};

template <typename T>
void read_field(const json& j, const char* section, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string(section) + "." + key + ": wrong type");
  }
}

CliConfig load_config(const std::string& path) {
  CliConfig cfg;
  if (path.empty()) return cfg;

  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }

  read_field(j, "", "seed", cfg.seed);
  read_field(j, "", "output_dir", cfg.output_dir);
  read_field(j, "", "agreement_bits", cfg.agreement_bits);
  if (j.contains("corpus")) {
    const json& c = j.at("corpus");
    read_field(c, "corpus", "persons", cfg.persons);
    read_field(c, "corpus", "dense", cfg.dense);
  }
  if (j.contains("noise")) {
    const json& n = j.at("noise");
    read_field(n, "noise", "sigma", cfg.noise.feature_sigma);
    read_field(n, "noise", "drop", cfg.noise.drop_prob);
    read_field(n, "noise", "split", cfg.noise.split_prob);
    read_field(n, "noise", "background", cfg.noise.bg_mean);
    read_field(n, "noise", "face_visibility", cfg.noise.face_visibility);
  }
  if (j.contains("thresholds")) {
    const json& t = j.at("thresholds");
    read_field(t, "thresholds", "xi", cfg.xi);
    read_field(t, "thresholds", "theta", cfg.theta);
  }
  if (j.contains("lsh")) {
    const json& l = j.at("lsh");
    read_field(l, "lsh", "m", cfg.lsh_m);
    read_field(l, "lsh", "w", cfg.lsh_w);
  }
  if (j.contains("scenario")) {
    const json& s = j.at("scenario");
    read_field(s, "scenario", "mode", cfg.mode);
    read_field(s, "scenario", "photos", cfg.photos);
    read_field(s, "scenario", "bystanders", cfg.scenario_bystanders);
    read_field(s, "scenario", "keep", cfg.keep);
    if (s.contains("roster")) {
      if (!s.at("roster").is_array()) throw ConfigError("scenario.roster: must be an array");
      size_t idx = 0;
      for (const json& r : s.at("roster")) {
        RosterEntry e;
        std::string section = "scenario.roster[" + std::to_string(idx++) + "]";
        if (!r.contains("id")) throw ConfigError(section + ".id: missing");
        read_field(r, section.c_str(), "id", e.id);
        read_field(r, section.c_str(), "intent", e.intent);
        read_field(r, section.c_str(), "person", e.person);
        read_field(r, section.c_str(), "x", e.x);
        read_field(r, section.c_str(), "y", e.y);
        read_field(r, section.c_str(), "heading", e.heading);
        read_field(r, section.c_str(), "registered", e.registered);
        cfg.roster.push_back(std::move(e));
      }
    }
  }
  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    read_field(s, "sweep", "grid", cfg.grid);
    read_field(s, "sweep", "trials", cfg.sweep_trials);
    read_field(s, "sweep", "subjects", cfg.sweep_subjects);
    read_field(s, "sweep", "bystanders", cfg.sweep_bystanders);
  }
  return cfg;
}

Intent intent_from(const std::string& word, const std::string& field) {
  if (word == "invisible") return Intent::invisible;
  if (word == "tagged") return Intent::tagged;
  if (word == "none") return Intent::none;
  throw ConfigError(field + ": expected invisible, tagged, or none, got \"" + word + "\"");
}

CaptureMode mode_from(const std::string& word) {
  if (word == "baseline") return CaptureMode::baseline;
  if (word == "advanced") return CaptureMode::advanced;
  throw ConfigError("scenario.mode: expected baseline or advanced, got \"" + word + "\"");
}

void validate(const CliConfig& cfg) {
  if (!(cfg.xi > 0.0 && cfg.xi < 1.0)) throw ConfigError("thresholds.xi: must be in (0,1)");
  if (!(cfg.theta > 0.0 && cfg.theta < 1.0)) throw ConfigError("thresholds.theta: must be in (0,1)");
  if (cfg.lsh_m == 0 || cfg.lsh_m % 8 != 0) throw ConfigError("lsh.m: must be a positive multiple of 8");
  if (cfg.lsh_w <= 0.0) throw ConfigError("lsh.w: must be positive");
  if (cfg.persons == 0) throw ConfigError("corpus.persons: must be positive");
  if (cfg.agreement_bits < 16) throw ConfigError("agreement_bits: too small for a usable group");
  mode_from(cfg.mode);
  for (double g : cfg.grid)
    if (!(g >= 0.0 && g < 1.0)) throw ConfigError("sweep.grid: entries must be in [0,1)");
  std::set<std::string> ids;
  for (const RosterEntry& e : cfg.roster) {
    std::string field = "scenario.roster (id \"" + e.id + "\")";
    intent_from(e.intent, field + ".intent");
    if (!ids.insert(e.id).second) throw ConfigError(field + ": duplicate id");
  }
}

// The bundled demo: a photographer facing four registered neighbors,
// three asking for erasure and one for a tag.
std::vector<RosterEntry> demo_roster() {
  return {
      {"pat", "none", 0, 0, 0, 0, true},      {"ivy", "invisible", 1, 5.0, 0.0, 0, true},
      {"ian", "invisible", 2, 5.0, 1.0, 0, true}, {"iris", "invisible", 3, 5.0, -1.0, 0, true},
      {"tess", "tagged", 4, 4.0, 0.5, 0, true},
  };
}

// ---- corpus loading ------------------------------------------------------

fs::path corpus_dir(const CliConfig& cfg) { return fs::path(cfg.output_dir) / "corpus"; }

CorpusManifest load_manifest(const CliConfig& cfg) {
  fs::path path = corpus_dir(cfg) / "manifest.txt";
  std::ifstream in(path);
  if (!in) throw ConfigError("corpus missing at " + path.string() + "; run gen-corpus first");
  std::stringstream buf;
  buf << in.rdbuf();
  return decode_manifest(buf.str());
}

std::vector<SyntheticPerson> corpus_people(const CorpusManifest& m) {
  std::vector<SyntheticPerson> people;
  std::vector<uint64_t> seeds = m.person_seeds();
  for (size_t i = 0; i < m.person_count; ++i) {
    SyntheticPerson p = gen_person(seeds[i], m.shape, m.dims);
    p.person_id = CorpusManifest::person_id(i);
    people.push_back(std::move(p));
  }
  return people;
}

// ---- gen-corpus ----------------------------------------------------------

int cmd_gen_corpus(const CliConfig& cfg, bool force) {
  fs::path dir = corpus_dir(cfg);
  fs::path manifest_path = dir / "manifest.txt";
  if (fs::exists(manifest_path) && !force) {
    std::fprintf(stderr, "error: %s already exists; pass --force to overwrite\n",
                 manifest_path.string().c_str());
    return 1;
  }
  fs::create_directories(dir);

  CorpusManifest m;
  m.master_seed = cfg.seed;
  m.person_count = cfg.persons;
  m.shape = cfg.dense ? dense_shape() : PersonShape{};
  m.noise = cfg.noise;

  std::ofstream(manifest_path) << encode_manifest(m);
  for (size_t i = 0; i < m.person_count; ++i) {
    SyntheticPerson p = gen_person(m.person_seeds()[i], m.shape, m.dims);
    std::ofstream(dir / (CorpusManifest::person_id(i) + ".txt")) << encode_profile_text(p.canonical);
  }
  std::printf("corpus: %zu persons under %s (seed %llu%s)\n", m.person_count, dir.string().c_str(),
              static_cast<unsigned long long>(m.master_seed), cfg.dense ? ", dense shape" : "");
  return 0;
}

// ---- run-scenario --------------------------------------------------------

Simulator build_simulator(const CliConfig& cfg, const CorpusManifest& manifest,
                          const std::vector<RosterEntry>& roster, Pose* camera_out) {
  SimConfig sim_cfg;
  sim_cfg.master_seed = cfg.seed;
  sim_cfg.group_bits = cfg.agreement_bits;
  sim_cfg.lsh_m = cfg.lsh_m;
  sim_cfg.lsh_w = cfg.lsh_w;
  sim_cfg.dims = manifest.dims;
  sim_cfg.noise = cfg.noise;
  sim_cfg.xi_s = cfg.xi;
  sim_cfg.theta_s = cfg.theta;

  std::vector<SyntheticPerson> people = corpus_people(manifest);
  Simulator sim(sim_cfg);
  for (const RosterEntry& e : roster) {
    if (e.person >= people.size())
      throw ConfigError("scenario.roster (id \"" + e.id + "\").person: index " +
                        std::to_string(e.person) + " outside corpus of " +
                        std::to_string(people.size()));
    UserSpec u;
    u.id = e.id;
    u.intent = intent_from(e.intent, "scenario.roster.intent");
    u.registered = e.registered;
    u.person = people[e.person];
    u.x = e.x;
    u.y = e.y;
    sim.add_user(u);
    if (camera_out && e.intent == "none") {
      camera_out->x = e.x;
      camera_out->y = e.y;
      camera_out->heading = e.heading;
    }
  }
  return sim;
}

const RosterEntry& find_photographer(const std::vector<RosterEntry>& roster) {
  for (const RosterEntry& e : roster)
    if (e.intent == "none") return e;
  throw ConfigError("scenario.roster: no entry with intent \"none\" to hold the camera");
}

void print_directives(const std::vector<ConcealmentDirective>& directives) {
  size_t erase = 0, tag = 0;
  for (const auto& d : directives) (d.action == ConcealmentDirective::Action::erase ? erase : tag)++;
  std::printf("  directives: %zu erase + %zu tag\n", erase, tag);
  for (const auto& d : directives)
    std::printf("    %-5s %-6s photo %zu score %.3f regions %zu\n",
                d.action == ConcealmentDirective::Action::erase ? "erase" : "tag",
                d.user_id.c_str(), d.photo_index, d.score, d.region_refs.size());
}

int cmd_run_scenario(const CliConfig& cfg) {
  CorpusManifest manifest = load_manifest(cfg);
  std::vector<RosterEntry> roster = cfg.roster.empty() ? demo_roster() : cfg.roster;
  CaptureMode mode = mode_from(cfg.mode);

  Pose camera;
  const RosterEntry& photographer = find_photographer(roster);
  Simulator sim = build_simulator(cfg, manifest, roster, &camera);

  std::printf("scenario: %s mode, %zu photo%s, photographer %s\n", cfg.mode.c_str(), cfg.photos,
              cfg.photos == 1 ? "" : "s", photographer.id.c_str());

  std::vector<std::string> handles;
  double matching_total = 0, agreement_total = 0;
  for (size_t i = 0; i < cfg.photos; ++i) {
    CaptureSpec spec;
    spec.photographer = photographer.id;
    spec.camera = camera;
    spec.mode = mode;
    spec.bystanders = cfg.scenario_bystanders;
    spec.seed = cfg.seed + i + 1;
    spec.keep_users = cfg.keep;
    CaptureOutcome out = sim.capture(spec);

    std::printf("photo %zu: session %s, %zu person%s in frame\n", i + 1, out.session_id.c_str(),
                out.scene.photo_graphs.size(), out.scene.photo_graphs.size() == 1 ? "" : "s");
    if (out.aborted) {
      std::printf("  aborted: %s\n", out.abort_reason.c_str());
      continue;
    }
    print_directives(out.directives);
    if (mode == CaptureMode::advanced)
      std::printf("  timing: matching %.2f ms, agreement %.2f ms (%s, %zu agreement messages)\n",
                  out.matching_seconds * 1e3, out.agreement_seconds * 1e3,
                  out.ring_reused ? "ring reused" : "ring refreshed", out.agreement_messages);
    else
      std::printf("  timing: matching %.2f ms\n", out.matching_seconds * 1e3);
    matching_total += out.matching_seconds;
    agreement_total += out.agreement_seconds;
    if (!out.photo_handle.empty()) handles.push_back(out.photo_handle);
  }
  std::printf("totals: matching %.2f ms, agreement %.2f ms\n", matching_total * 1e3,
              agreement_total * 1e3);

  // Dishonest runs finish with the matching verification pass.
  if (!cfg.keep.empty() && !handles.empty()) {
    std::printf("verification (photographer kept: ");
    for (size_t i = 0; i < cfg.keep.size(); ++i)
      std::printf("%s%s", i ? ", " : "", cfg.keep[i].c_str());
    std::printf(")\n");
    for (const std::string& handle : handles) {
      if (mode == CaptureMode::baseline) {
        VerifyOutcome v = sim.verify_baseline(handle);
        for (const auto& viol : v.violations)
          std::printf("  %s: violation by %s against %s (score %.3f)\n", handle.c_str(),
                      viol.photographer.c_str(), viol.user_id.c_str(), viol.score);
        if (v.violations.empty()) std::printf("  %s: clean\n", handle.c_str());
      } else {
        for (const RosterEntry& e : roster) {
          if (e.intent != "invisible") continue;
          try {
            VerifyOutcome v = sim.verify_advanced(handle, e.id);
            if (v.unverifiable)
              std::printf("  %s: %s unverifiable\n", handle.c_str(), e.id.c_str());
            else if (v.violations.empty())
              std::printf("  %s: %s clean\n", handle.c_str(), e.id.c_str());
            else
              std::printf("  %s: violation against %s (score %.3f)\n", handle.c_str(),
                          e.id.c_str(), v.violations.front().score);
          } catch (const std::invalid_argument&) {
            // Not a participant of that session; nothing to verify.
          }
        }
      }
    }
  }

  fs::create_directories(cfg.output_dir);
  fs::path transcript_path = fs::path(cfg.output_dir) / "transcript.txt";
  std::ofstream(transcript_path) << sim.transcript().render();
  std::printf("transcript: %s (%zu messages)\n", transcript_path.string().c_str(),
              sim.transcript().entries().size());

  if (mode == CaptureMode::advanced) {
    ConfidentialityReport report = sim.confidentiality_scan();
    if (!report.clean()) {
      std::fprintf(stderr, "scenario invariant breach: confidentiality scan failed\n");
      return 2;
    }
    std::printf("confidentiality scan: clean\n");
  }
  return 0;
}

// ---- sweep ---------------------------------------------------------------

int cmd_sweep(const CliConfig& cfg) {
  if (cfg.grid.empty()) throw ConfigError("sweep.grid: empty; give at least one threshold");
  CorpusManifest manifest = load_manifest(cfg);

  AccuracyConfig acc;
  acc.master_seed = manifest.master_seed;
  acc.person_count = manifest.person_count;
  acc.shape = manifest.shape;
  acc.noise = manifest.noise;
  acc.dims = manifest.dims;
  acc.trials = cfg.sweep_trials;
  acc.subjects_per_trial = cfg.sweep_subjects;
  acc.bystanders_per_trial = cfg.sweep_bystanders;
  acc.xi_s = cfg.xi;
  acc.lsh_m = cfg.lsh_m;
  acc.lsh_w = cfg.lsh_w;

  std::printf("sweep: %zu trials, %zu subjects + %zu bystanders per photo, corpus of %zu\n",
              acc.trials, acc.subjects_per_trial, acc.bystanders_per_trial, acc.person_count);
  TrialSet standard = collect_trials(acc);

  // Stranger-only regime: same contestants, nobody they know in frame,
  // so every claim is false. Reported per threshold as its own row.
  AccuracyConfig stranger_cfg = acc;
  stranger_cfg.subjects_in_photo = false;
  stranger_cfg.bystanders_per_trial = std::max<size_t>(1, cfg.sweep_bystanders);
  TrialSet stranger = collect_trials(stranger_cfg);

  std::vector<double> grid = cfg.grid;
  std::sort(grid.begin(), grid.end());

  std::ostringstream csv, dat;
  csv << "theta,regime,plain_fn,plain_fp,hashed_fn,hashed_fp,agreement\n";
  dat << "# theta plain_fn plain_fp hashed_fn hashed_fp stranger_plain_fp stranger_hashed_fp\n";
  std::printf("%7s %12s %9s %9s %9s %9s %10s\n", "theta", "regime", "plain_fn", "plain_fp",
              "hashed_fn", "hashed_fp", "agreement");
  for (double theta : grid) {
    AccuracyReport a = score_trials(standard, theta);
    AccuracyReport b = score_trials(stranger, theta);
    auto emit = [&](const char* regime, const AccuracyReport& r) {
      csv << theta << ',' << regime << ',' << r.plain.fn_rate << ',' << r.plain.fp_rate << ','
          << r.hashed.fn_rate << ',' << r.hashed.fp_rate << ',' << r.agreement << "\n";
      std::printf("%7.3f %12s %9.4f %9.4f %9.4f %9.4f %10.4f\n", theta, regime, r.plain.fn_rate,
                  r.plain.fp_rate, r.hashed.fn_rate, r.hashed.fp_rate, r.agreement);
    };
    emit("standard", a);
    emit("stranger-only", b);
    dat << theta << ' ' << a.plain.fn_rate << ' ' << a.plain.fp_rate << ' ' << a.hashed.fn_rate
        << ' ' << a.hashed.fp_rate << ' ' << b.plain.fp_rate << ' ' << b.hashed.fp_rate << "\n";
  }

  fs::create_directories(cfg.output_dir);
  fs::path csv_path = fs::path(cfg.output_dir) / "sweep.csv";
  fs::path dat_path = fs::path(cfg.output_dir) / "sweep.dat";
  std::ofstream(csv_path) << csv.str();
  std::ofstream(dat_path) << dat.str();
  std::printf("wrote %s and %s\n", csv_path.string().c_str(), dat_path.string().c_str());
  return 0;
}

// ---- bench ---------------------------------------------------------------

double median_seconds(const std::function<void()>& work, int reps = 5) {
  std::vector<double> times;
  for (int i = 0; i < reps; ++i) {
    auto t0 = std::chrono::steady_clock::now();
    work();
    times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  std::sort(times.begin(), times.end());
  return times[times.size() / 2];
}

size_t frame_feature_bytes(const Bytes& frame) {
  ByteReader r(frame);
  r.u8();  // version
  r.u8();  // mode
  size_t nodes = r.u16();
  size_t payload = 0;
  for (size_t i = 0; i < nodes; ++i) {
    r.u16();  // id
    r.u8();   // label
    size_t feats = r.u8();
    for (size_t f = 0; f < feats; ++f) {
      r.u8();  // kind
      size_t len = r.u16();
      r.raw(len);
      payload += len;
    }
  }
  size_t edges = r.u16();
  for (size_t e = 0; e < edges; ++e) {
    r.u16();
    r.u16();
  }
  r.expect_end();
  return payload;
}

int cmd_bench(const CliConfig& cfg) {
  // Payload laws on reference frames: ten body nodes with the default
  // feature setup, and ten hashed codes.
  CounterRng rng(cfg.seed);
  FeatureDims dims;
  PortraitGraph plain10;
  for (uint16_t i = 0; i < 10; ++i) {
    PortraitNode n;
    n.id = i;
    n.label = NodeLabel::human_body;
    FeatureVector h{FeatureKind::color_histogram, std::vector<double>(dims.color_histogram)};
    FeatureVector t{FeatureKind::texture, std::vector<double>(dims.texture)};
    for (double& v : h.values) v = rng.uniform01();
    for (double& v : t.values) v = rng.uniform01();
    n.features = {h, t};
    plain10.nodes.push_back(std::move(n));
    if (i) plain10.edges.push_back(Edge(i - 1, i));
  }
  LshSuite suite(cfg.lsh_m, cfg.lsh_w, tagged_seed(cfg.seed, "bench-lsh"), dims.kinds());
  BigInt r = 1;
  for (int w = 0; w < 4; ++w) r = (r << 64) | rng.next_u64();
  HashedPortraitGraph hashed10 = transform_profile(plain10, r, suite, "bench");

  std::printf("payloads\n");
  std::printf("  plain 10-body-node profile:  %zu feature bytes\n",
              frame_feature_bytes(serialize_profile(plain10)));
  std::printf("  hashed 10-node profile:      %zu code bytes (m=%zu)\n",
              frame_feature_bytes(serialize_profile(hashed10)), cfg.lsh_m);

  // Agreement overhead for a 4-member ring at the configured group size,
  // next to the ~0.19 KB/user reference point.
  {
    CorpusManifest tiny;
    tiny.master_seed = cfg.seed;
    tiny.person_count = 4;
    std::vector<SyntheticPerson> people = corpus_people(tiny);
    SimConfig sim_cfg;
    sim_cfg.master_seed = cfg.seed;
    sim_cfg.group_bits = cfg.agreement_bits;
    sim_cfg.lsh_m = cfg.lsh_m;
    sim_cfg.lsh_w = cfg.lsh_w;
    Simulator sim(sim_cfg);
    const char* ids[] = {"a", "b", "c", "d"};
    for (size_t i = 0; i < 4; ++i) {
      UserSpec u;
      u.id = ids[i];
      u.intent = i == 0 ? Intent::none : Intent::invisible;
      u.person = people[i];
      u.x = i == 0 ? 0.0 : 5.0;
      u.y = i == 0 ? 0.0 : double(i) - 2.0;
      sim.add_user(u);
    }
    CaptureSpec spec;
    spec.photographer = "a";
    spec.mode = CaptureMode::advanced;
    spec.seed = cfg.seed + 1;
    auto agree_t0 = std::chrono::steady_clock::now();
    CaptureOutcome out = sim.capture(spec);
    double agree_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - agree_t0).count();
    size_t worst = 0;
    for (const char* id : ids)
      worst = std::max(worst, sim.agreement_upload_bytes(out.session_id, id));
    std::printf("agreement (ring of %zu, %u-bit group)\n", out.ring_size, cfg.agreement_bits);
    std::printf("  messages: %zu, largest per-user upload: %zu bytes (reference ~194 bytes/user)\n",
                out.agreement_messages, worst);
    std::printf("  session wall time: %.2f ms (matching %.2f ms, agreement %.2f ms)\n",
                agree_s * 1e3, out.matching_seconds * 1e3, out.agreement_seconds * 1e3);
  }

  // Matching stages on a dense pair, plain against hashed.
  {
    SyntheticPerson person = gen_person(tagged_seed(cfg.seed, "bench-person"), dense_shape());
    NoiseModel noise = cfg.noise;
    PortraitGraph gx = observe(person, enrollment_noise(noise), tagged_seed(cfg.seed, "bench-x"));
    PortraitGraph gy = observe(person, noise, tagged_seed(cfg.seed, "bench-y"));
    HashedPortraitGraph hx = transform_profile(gx, r, suite, "bench");
    HashedPortraitGraph hy = transform_profile(gy, r, suite, "bench");

    MatchContext pctx = make_context(gx, gy);
    double s1 = median_seconds([&] { stage1_filter(pctx, cfg.xi); });
    MatchMatrix m1 = stage1_filter(pctx, cfg.xi);
    double s2 = median_seconds([&] {
      MatchMatrix m = m1;
      stage2_neighbor_map(pctx, m);
    });
    MatchMatrix m2 = m1;
    stage2_neighbor_map(pctx, m2);
    double s3 = median_seconds([&] {
      MatchMatrix m = m2;
      stage3_vote(pctx, m);
    });

    double plain_t = median_seconds([&] {
      MatchContext c = make_context(gx, gy);
      graph_similarity(c, run_stages(c, cfg.xi));
    });
    double hashed_t = median_seconds([&] {
      MatchContext c = make_context(hx, hy);
      graph_similarity(c, run_stages(c, cfg.xi));
    });

    std::printf("matching (dense pair, %zu x %zu nodes)\n", gx.nodes.size(), gy.nodes.size());
    std::printf("  stage 1 filter:       %8.3f ms\n", s1 * 1e3);
    std::printf("  stage 2 neighbor map: %8.3f ms\n", s2 * 1e3);
    std::printf("  stage 3 voting:       %8.3f ms\n", s3 * 1e3);
    std::printf("  plain pair total:     %8.3f ms\n", plain_t * 1e3);
    std::printf("  hashed pair total:    %8.3f ms\n", hashed_t * 1e3);
    std::printf("  hashed/plain ratio:   %8.3f\n", hashed_t / plain_t);
  }
  return 0;
}

// ---- verify --------------------------------------------------------------

// Self-checking drill: a photographer defies the configured erase
// directives; both verification paths must flag exactly those users and
// nobody else.
int cmd_verify(const CliConfig& cfg) {
  CorpusManifest manifest = load_manifest(cfg);
  std::vector<RosterEntry> roster = cfg.roster.empty() ? demo_roster() : cfg.roster;
  const RosterEntry& photographer = find_photographer(roster);

  std::vector<std::string> keep = cfg.keep;
  if (keep.empty()) {
    for (const RosterEntry& e : roster)
      if (e.intent == "invisible") {
        keep.push_back(e.id);
        break;
      }
  }
  std::set<std::string> planted(keep.begin(), keep.end());
  std::printf("verify drill: photographer %s keeps ", photographer.id.c_str());
  for (size_t i = 0; i < keep.size(); ++i) std::printf("%s%s", i ? ", " : "", keep[i].c_str());
  std::printf("\n");

  bool breach = false;
  for (CaptureMode mode : {CaptureMode::baseline, CaptureMode::advanced}) {
    const char* label = mode == CaptureMode::baseline ? "baseline" : "advanced";
    Pose camera;
    Simulator sim = build_simulator(cfg, manifest, roster, &camera);
    CaptureSpec spec;
    spec.photographer = photographer.id;
    spec.camera = camera;
    spec.mode = mode;
    spec.seed = cfg.seed + 1;
    spec.keep_users = keep;
    CaptureOutcome out = sim.capture(spec);
    if (out.aborted || out.photo_handle.empty()) {
      std::fprintf(stderr, "scenario invariant breach: %s capture did not publish\n", label);
      return 2;
    }

    std::set<std::string> flagged;
    if (mode == CaptureMode::baseline) {
      for (const auto& v : sim.verify_baseline(out.photo_handle).violations)
        flagged.insert(v.user_id);
    } else {
      for (const RosterEntry& e : roster) {
        if (e.intent != "invisible") continue;
        try {
          VerifyOutcome v = sim.verify_advanced(out.photo_handle, e.id);
          if (v.unverifiable) {
            std::fprintf(stderr, "scenario invariant breach: %s came back unverifiable\n",
                         e.id.c_str());
            breach = true;
          }
          if (!v.violations.empty()) flagged.insert(e.id);
        } catch (const std::invalid_argument&) {
        }
      }
      if (!sim.confidentiality_scan().clean()) {
        std::fprintf(stderr, "scenario invariant breach: confidentiality scan failed\n");
        breach = true;
      }
    }

    bool exact = flagged == planted;
    std::printf("  %s: flagged {", label);
    size_t i = 0;
    for (const auto& id : flagged) std::printf("%s%s", i++ ? ", " : "", id.c_str());
    std::printf("} %s\n", exact ? "== planted" : "!= planted");
    if (!exact) breach = true;
  }

  if (breach) {
    std::fprintf(stderr, "scenario invariant breach: verification differs from planted set\n");
    return 2;
  }
  std::printf("verify drill passed: planted violations detected, honest removals clean\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"portrait concealment protocol simulator"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "JSON config file; flags override its fields")
      ->check(CLI::ExistingFile);

  // Shared overrides, registered per subcommand so they appear in each
  // command's help.
  struct Overrides {
    CLI::Option* seed = nullptr;
    CLI::Option* out = nullptr;
    uint64_t seed_v = 0;
    std::string out_v;
    void attach(CLI::App* sub) {
      seed = sub->add_option("--seed", seed_v, "master seed");
      out = sub->add_option("--out", out_v, "output directory");
    }
    void apply(CliConfig& cfg) const {
      if (seed && seed->count()) cfg.seed = seed_v;
      if (out && out->count()) cfg.output_dir = out_v;
    }
  };

  CLI::App* gen = app.add_subcommand("gen-corpus", "generate a deterministic person corpus");
  Overrides gen_ov;
  gen_ov.attach(gen);
  bool force = false;
  size_t persons_v = 0;
  bool dense_v = false;
  gen->add_flag("--force", force, "overwrite an existing corpus");
  CLI::Option* persons_opt = gen->add_option("--persons", persons_v, "corpus size");
  CLI::Option* dense_opt = gen->add_flag("--dense", dense_v, "use the dense node-count preset");

  CLI::App* run = app.add_subcommand("run-scenario", "execute capture sessions and report");
  Overrides run_ov;
  run_ov.attach(run);
  std::string mode_v;
  size_t photos_v = 0;
  std::vector<std::string> keep_v;
  CLI::Option* mode_opt = run->add_option("--mode", mode_v, "baseline or advanced");
  CLI::Option* photos_opt = run->add_option("--photos", photos_v, "captures to run");
  CLI::Option* keep_opt =
      run->add_option("--keep", keep_v, "users whose erase directives the photographer defies");

  CLI::App* sweep = app.add_subcommand("sweep", "error rates across acceptance thresholds");
  Overrides sweep_ov;
  sweep_ov.attach(sweep);
  std::vector<double> grid_v;
  size_t trials_v = 0;
  CLI::Option* grid_opt = sweep->add_option("--grid", grid_v, "thresholds to evaluate");
  CLI::Option* trials_opt = sweep->add_option("--trials", trials_v, "photos per threshold table");

  CLI::App* bench = app.add_subcommand("bench", "payload sizes and matching stage timings");
  Overrides bench_ov;
  bench_ov.attach(bench);

  CLI::App* verify = app.add_subcommand("verify", "dishonest-photographer detection drill");
  Overrides verify_ov;
  verify_ov.attach(verify);
  std::vector<std::string> verify_keep_v;
  CLI::Option* verify_keep_opt =
      verify->add_option("--keep", verify_keep_v, "users the photographer dishonestly keeps");
  std::string verify_mode_v;  // accepted for symmetry; the drill always runs both modes
  verify->add_option("--mode", verify_mode_v)->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    CliConfig cfg = load_config(config_path);
    if (gen->parsed()) {
      gen_ov.apply(cfg);
      if (persons_opt->count()) cfg.persons = persons_v;
      if (dense_opt->count()) cfg.dense = dense_v;
      validate(cfg);
      return cmd_gen_corpus(cfg, force);
    }
    if (run->parsed()) {
      run_ov.apply(cfg);
      if (mode_opt->count()) cfg.mode = mode_v;
      if (photos_opt->count()) cfg.photos = photos_v;
      if (keep_opt->count()) cfg.keep = keep_v;
      validate(cfg);
      return cmd_run_scenario(cfg);
    }
    if (sweep->parsed()) {
      sweep_ov.apply(cfg);
      if (grid_opt->count()) cfg.grid = grid_v;
      if (trials_opt->count()) cfg.sweep_trials = trials_v;
      validate(cfg);
      return cmd_sweep(cfg);
    }
    if (bench->parsed()) {
      bench_ov.apply(cfg);
      validate(cfg);
      return cmd_bench(cfg);
    }
    if (verify->parsed()) {
      verify_ov.apply(cfg);
      if (verify_keep_opt->count()) cfg.keep = verify_keep_v;
      validate(cfg);
      return cmd_verify(cfg);
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
