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

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "veil/eval.hpp"
#include "veil/protocol.hpp"
#include "veil/transform.hpp"

using namespace veil;

namespace {

// Small group and calm noise keep the scenario tests fast and the
// matcher decisions unambiguous; mechanics do not depend on either.
SimConfig test_config() {
  SimConfig cfg;
  cfg.master_seed = 2026;
  cfg.group_bits = 64;
  cfg.noise.feature_sigma = 0.02;
  cfg.noise.drop_prob = 0.0;
  cfg.noise.split_prob = 0.0;
  cfg.noise.bg_mean = 0.0;
  cfg.noise.face_visibility = 1.0;
  return cfg;
}

UserSpec make_user(const std::string& id, uint64_t seed, Intent intent, double x, double y,
                   bool registered = true) {
  UserSpec u;
  u.id = id;
  u.intent = intent;
  u.registered = registered;
  u.person = gen_person(seed);
  u.x = x;
  u.y = y;
  return u;
}

// Photographer at the origin, alice/bob/carol inside the default sector,
// dave behind the camera.
Simulator standard_sim() {
  Simulator sim(test_config());
  sim.add_user(make_user("phil", 101, Intent::none, 0, 0));
  sim.add_user(make_user("alice", 102, Intent::invisible, 5, 0));
  sim.add_user(make_user("bob", 103, Intent::invisible, 5, 1));
  sim.add_user(make_user("carol", 104, Intent::invisible, 5, -1));
  sim.add_user(make_user("dave", 105, Intent::invisible, -8, 0));
  return sim;
}

size_t count_type(const Transcript& log, MsgType type) {
  size_t n = 0;
  for (const auto& e : log.entries()) n += e.type == type ? 1 : 0;
  return n;
}

}  // namespace

TEST_CASE("camera sector membership") {
  Pose cam;  // origin, heading 0, 60 degree sector, range 15
  CHECK(in_fov(cam, 5, 0));
  CHECK(in_fov(cam, 0, 0));           // zero distance
  CHECK(in_fov(cam, 14.9, 0));
  CHECK_FALSE(in_fov(cam, 15.1, 0));  // beyond range
  CHECK_FALSE(in_fov(cam, -5, 0));    // behind
  CHECK_FALSE(in_fov(cam, 1, 1));     // 45 degrees off axis
  // Exactly on the half-angle boundary counts as inside.
  double half = cam.fov_angle / 2;
  CHECK(in_fov(cam, 2 * std::cos(half), 2 * std::sin(half)));

  std::vector<UserSpec> users;
  users.push_back(make_user("a", 1, Intent::invisible, 5, 0));
  users.push_back(make_user("b", 2, Intent::invisible, -5, 0));
  users.push_back(make_user("c", 3, Intent::invisible, 6, 1));
  CHECK(proximity_check(cam, users) == std::vector<std::string>({"a", "c"}));
}

TEST_CASE("envelope layout is fixed-header plus length-prefixed body") {
  Message m;
  m.session_id = "s1";
  m.sender = "alice";
  m.recipient = "cloud";
  m.type = MsgType::round_share;
  m.body = {1, 2, 3};
  Bytes env = encode_envelope(m);

  ByteReader r(env);
  Bytes sid = r.raw(16);
  CHECK(std::string(sid.begin(), sid.end()) == "s1              ");
  CHECK(r.str16() == "alice");
  CHECK(r.u8() == static_cast<uint8_t>(MsgType::round_share));
  CHECK(r.u32() == 3);
  CHECK(r.raw(3) == Bytes({1, 2, 3}));
  r.expect_end();

  // Long ids truncate rather than overflow the fixed field.
  m.session_id = std::string(40, 'x');
  Bytes env2 = encode_envelope(m);  // ByteReader is a view, keep the buffer alive
  ByteReader r2(env2);
  CHECK(r2.raw(16) == Bytes(16, 'x'));
}

TEST_CASE("transcript visibility and rendering") {
  Transcript log;
  log.record({"s1", "alice", "cloud", MsgType::profile_upload, {1}});
  log.record({"s1", "cloud", "bob", MsgType::match_directives, {2}});
  log.record({"s1", "carol", "cloud", MsgType::round_share, {3}});

  CHECK(log.visible_to("cloud") == std::vector<size_t>({0, 1, 2}));
  CHECK(log.visible_to("alice") == std::vector<size_t>({0}));
  CHECK(log.visible_to("bob") == std::vector<size_t>({1}));
  CHECK(log.visible_to("nobody").empty());

  std::string text = log.render();
  CHECK(text == log.render());
  CHECK(text.find("0|s1|alice|cloud|7|") != std::string::npos);
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);
}

TEST_CASE("profile transform is deterministic in the shared number") {
  SyntheticPerson person = gen_person(9);
  LshSuite suite(64, 3.0, 77, FeatureDims{}.kinds());
  BigInt r1("123456789123456789"), r2("123456789123456790");
  HashedPortraitGraph a = transform_profile(person.canonical, r1, suite, "sess");
  HashedPortraitGraph b = transform_profile(person.canonical, r1, suite, "sess");
  HashedPortraitGraph c = transform_profile(person.canonical, r2, suite, "sess");

  CHECK(a.session_ref == "sess");
  CHECK(a.nodes.size() == person.canonical.nodes.size());
  CHECK(a.edges == person.canonical.edges);
  CHECK(serialize_profile(a) == serialize_profile(b));
  CHECK(serialize_profile(a) != serialize_profile(c));
  for (size_t i = 0; i < a.nodes.size(); ++i) {
    CHECK(a.nodes[i].id == person.canonical.nodes[i].id);
    CHECK(a.nodes[i].codes.size() == person.canonical.nodes[i].features.size());
    for (const auto& [kind, code] : a.nodes[i].codes) CHECK(code.size() == 64);
  }
}

TEST_CASE("registration hands out group and family parameters") {
  Simulator sim(test_config());
  sim.add_user(make_user("phil", 101, Intent::none, 0, 0));
  sim.add_user(make_user("alice", 102, Intent::invisible, 5, 0));
  sim.add_user(make_user("ursula", 103, Intent::invisible, 5, 2, false));  // unregistered

  CHECK(count_type(sim.transcript(), MsgType::group_params) == 2);
  CHECK(count_type(sim.transcript(), MsgType::family_announce) == 2);
  CHECK_THROWS_AS(sim.add_user(make_user("alice", 9, Intent::none, 0, 0)), std::invalid_argument);

  // The announced group is usable and the announced family parameters
  // match the suite in force.
  CHECK(validate_params(sim.params()).empty());
  CHECK(sim.suite().bits() == sim.config().lsh_m);
}

TEST_CASE("baseline capture: erase directive, filtered publish, clean verify") {
  Simulator sim = standard_sim();
  CaptureSpec spec;
  spec.photographer = "phil";
  spec.mode = CaptureMode::baseline;
  spec.seed = 7;
  CaptureOutcome out = sim.capture(spec);

  CHECK(out.session_id == "s000000000000001");
  CHECK_FALSE(out.aborted);
  CHECK(out.ring_size == 0);
  CHECK(out.agreement_messages == 0);
  // alice, bob, carol in the sector; dave behind the camera.
  CHECK(out.profile_uploads == 3);
  CHECK(out.photo_uploads == 1);
  CHECK(out.result_messages == 1);
  CHECK(out.scene.photo_graphs.size() == 3);

  REQUIRE(out.directives.size() == 3);
  std::set<std::string> directed;
  for (const auto& d : out.directives) {
    CHECK(d.action == ConcealmentDirective::Action::erase);
    directed.insert(d.user_id);
    CHECK(!d.region_refs.empty());
    std::string prefix = "g" + std::to_string(d.photo_index) + ":n";
    for (const auto& ref : d.region_refs) CHECK(ref.substr(0, prefix.size()) == prefix);
    CHECK(d.score >= sim.config().theta_s);
  }
  CHECK(directed == std::set<std::string>({"alice", "bob", "carol"}));

  REQUIRE(!out.photo_handle.empty());
  CHECK(sim.published_photo(out.photo_handle).empty());  // everyone erased
  VerifyOutcome v = sim.verify_baseline(out.photo_handle);
  CHECK_FALSE(v.unverifiable);
  CHECK(v.violations.empty());

  CHECK_THROWS_AS(sim.published_photo("no-such-handle"), std::out_of_range);
  CaptureSpec bad = spec;
  bad.photographer = "zelda";
  CHECK_THROWS_AS(sim.capture(bad), std::out_of_range);
}

TEST_CASE("baseline capture: defied directive shows up in the verify drill") {
  Simulator sim = standard_sim();
  CaptureSpec spec;
  spec.photographer = "phil";
  spec.mode = CaptureMode::baseline;
  spec.seed = 7;
  spec.keep_users = {"alice"};
  CaptureOutcome out = sim.capture(spec);

  const auto& published = sim.published_photo(out.photo_handle);
  REQUIRE(published.size() == 1);
  CHECK(published[0].owner_ref == "alice");

  VerifyOutcome v = sim.verify_baseline(out.photo_handle);
  REQUIRE(v.violations.size() == 1);
  CHECK(v.violations[0].photographer == "phil");
  CHECK(v.violations[0].user_id == "alice");
  CHECK(v.violations[0].photo_graph_index == 0);
  CHECK(v.violations[0].score >= sim.config().theta_s);
}

TEST_CASE("baseline capture: occlusion and bystanders change the photo, not protection") {
  Simulator sim = standard_sim();
  CaptureSpec spec;
  spec.photographer = "phil";
  spec.mode = CaptureMode::baseline;
  spec.seed = 7;
  spec.occluded = {"bob"};
  spec.bystanders = 2;
  CaptureOutcome out = sim.capture(spec);

  // Photo: alice + carol + 2 strangers; bob is hidden but still queried
  // for protection because the sector covers him.
  CHECK(out.scene.photo_graphs.size() == 4);
  CHECK(out.profile_uploads == 3);
  // Matcher should claim alice and carol only; strangers stay.
  std::set<std::string> directed;
  for (const auto& d : out.directives) directed.insert(d.user_id);
  CHECK(directed == std::set<std::string>({"alice", "carol"}));
  CHECK(sim.published_photo(out.photo_handle).size() == 2);
}

TEST_CASE("tagged intent yields tag directives and consented presence") {
  Simulator sim(test_config());
  sim.add_user(make_user("phil", 101, Intent::none, 0, 0));
  sim.add_user(make_user("tina", 106, Intent::tagged, 5, 0));
  CaptureSpec spec;
  spec.photographer = "phil";
  spec.mode = CaptureMode::baseline;
  spec.seed = 3;
  CaptureOutcome out = sim.capture(spec);

  REQUIRE(out.directives.size() == 1);
  CHECK(out.directives[0].action == ConcealmentDirective::Action::tag);
  CHECK(out.directives[0].user_id == "tina");
  // Tag keeps the person in the photo, and the verify drill does not
  // call consented presence a violation.
  CHECK(sim.published_photo(out.photo_handle).size() == 1);
  CHECK(sim.verify_baseline(out.photo_handle).violations.empty());
}

TEST_CASE("advanced capture: ring lifecycle across a capture sequence") {
  Simulator sim = standard_sim();
  CaptureSpec spec;
  spec.photographer = "phil";
  spec.mode = CaptureMode::advanced;
  spec.seed = 11;

  // First capture builds the ring: photographer + 3 protected users.
  CaptureOutcome c1 = sim.capture(spec);
  CHECK_FALSE(c1.aborted);
  CHECK(c1.ring_size == 4);
  CHECK_FALSE(c1.ring_reused);
  CHECK(c1.agreement_messages == 16);  // 4 messages per member
  CHECK(c1.recompute_set.size() == 4);
  CHECK(c1.profile_uploads == 3);
  REQUIRE(c1.directives.size() == 3);
  CHECK(sim.published_photo(c1.photo_handle).empty());

  // Unchanged neighborhood: the agreed number is reused outright.
  spec.seed = 12;
  CaptureOutcome c2 = sim.capture(spec);
  CHECK(c2.ring_reused);
  CHECK(c2.agreement_messages == 0);
  CHECK(c2.recompute_set.empty());
  CHECK(c2.directives.size() == 3);

  // Panning away from carol removes one member; only her old neighbors
  // refresh their round values.
  spec.seed = 13;
  spec.camera.heading = 0.45;
  CaptureOutcome c3 = sim.capture(spec);
  CHECK_FALSE(c3.ring_reused);
  CHECK(c3.ring_size == 3);
  CHECK(c3.recompute_set.size() <= 2);
  for (const auto& id : c3.recompute_set) CHECK(id != "carol");
  // remove: 2 refreshed neighbor states + 2 round shares + 3 list sends
  CHECK(c3.agreement_messages == 7);

  // Panning back re-inserts carol; at most insert + two neighbors touch.
  spec.seed = 14;
  spec.camera.heading = 0;
  CaptureOutcome c4 = sim.capture(spec);
  CHECK_FALSE(c4.ring_reused);
  CHECK(c4.ring_size == 4);
  CHECK(c4.recompute_set.size() <= 3);
  CHECK(std::find(c4.recompute_set.begin(), c4.recompute_set.end(), "carol") !=
        c4.recompute_set.end());
  // insert: 1 public share + 3 neighbor states + 3 round shares + 4 lists
  CHECK(c4.agreement_messages == 11);

  // Two simultaneous changes trigger a full rebuild.
  Simulator fresh = standard_sim();
  CaptureSpec two;
  two.photographer = "phil";
  two.mode = CaptureMode::advanced;
  two.seed = 15;
  two.camera.heading = 0.45;
  CaptureOutcome f1 = fresh.capture(two);  // members phil, alice, bob
  CHECK(f1.ring_size == 3);
  two.camera.heading = -0.45;  // alice, carol in view; bob out
  CaptureOutcome f2 = fresh.capture(two);
  CHECK(f2.ring_size == 3);
  CHECK_FALSE(f2.ring_reused);
  CHECK(f2.recompute_set.size() == 3);       // full rebuild touches everyone
  CHECK(f2.agreement_messages == 12);        // 4 per member again
}

TEST_CASE("advanced capture: no plain content crosses the wire") {
  Simulator sim = standard_sim();
  CaptureSpec spec;
  spec.photographer = "phil";
  spec.mode = CaptureMode::advanced;
  spec.seed = 21;
  CaptureOutcome out = sim.capture(spec);
  REQUIRE_FALSE(out.aborted);

  ConfidentialityReport report = sim.confidentiality_scan();
  CHECK(report.clean());
  CHECK_FALSE(report.plain_profile_frames);
  CHECK(report.exposed_users.empty());
  CHECK_FALSE(report.secret_exposure);
}

TEST_CASE("advanced capture: lost round broadcast aborts without a publish") {
  Simulator sim = standard_sim();
  CaptureSpec spec;
  spec.photographer = "phil";
  spec.mode = CaptureMode::advanced;
  spec.seed = 31;
  spec.drop_round_share_from = "alice";
  CaptureOutcome out = sim.capture(spec);

  CHECK(out.aborted);
  CHECK(out.abort_reason == "agreement incomplete: missing round broadcast");
  CHECK(out.photo_handle.empty());
  CHECK(out.directives.empty());
  CHECK(count_type(sim.transcript(), MsgType::abort_notice) == 1);
  CHECK(count_type(sim.transcript(), MsgType::photo_publish) == 0);

  // The torn-down ring is rebuilt from scratch on the next attempt.
  spec.drop_round_share_from.reset();
  spec.seed = 32;
  CaptureOutcome retry = sim.capture(spec);
  CHECK_FALSE(retry.aborted);
  CHECK_FALSE(retry.ring_reused);
  CHECK(retry.agreement_messages == 16);
  CHECK(!retry.photo_handle.empty());
}

TEST_CASE("advanced verify: defiance is caught, erased users come back clean") {
  Simulator sim = standard_sim();
  CaptureSpec spec;
  spec.photographer = "phil";
  spec.mode = CaptureMode::advanced;
  spec.seed = 41;
  spec.keep_users = {"alice"};
  CaptureOutcome out = sim.capture(spec);
  REQUIRE_FALSE(out.aborted);
  REQUIRE(sim.published_photo(out.photo_handle).size() == 1);

  VerifyOutcome va = sim.verify_advanced(out.photo_handle, "alice");
  CHECK_FALSE(va.unverifiable);
  REQUIRE(va.violations.size() == 1);
  CHECK(va.violations[0].photographer == "phil");
  CHECK(va.violations[0].user_id == "alice");
  CHECK(va.violations[0].photo_graph_index == 0);
  CHECK(va.violations[0].score >= sim.config().theta_s);

  // Same drill again: the shuffle differs, the verdict does not.
  VerifyOutcome va2 = sim.verify_advanced(out.photo_handle, "alice");
  REQUIRE(va2.violations.size() == 1);
  CHECK(va2.violations[0].score == va.violations[0].score);

  VerifyOutcome vb = sim.verify_advanced(out.photo_handle, "bob");
  CHECK(vb.violations.empty());
  CHECK_FALSE(vb.unverifiable);

  // dave never joined the session.
  CHECK_THROWS_AS(sim.verify_advanced(out.photo_handle, "dave"), std::invalid_argument);

  // Message types of the interactive drill are all present.
  CHECK(count_type(sim.transcript(), MsgType::verify_request) == 3);
  CHECK(count_type(sim.transcript(), MsgType::verify_vectors) == 3);
  CHECK(count_type(sim.transcript(), MsgType::verify_codes) == 3);
  CHECK(count_type(sim.transcript(), MsgType::verify_verdict) == 3);
}

TEST_CASE("advanced verify: expired secrets make the drill unverifiable") {
  Simulator sim = standard_sim();
  CaptureSpec spec;
  spec.photographer = "phil";
  spec.mode = CaptureMode::advanced;
  spec.seed = 51;
  spec.keep_users = {"alice"};
  CaptureOutcome out = sim.capture(spec);
  REQUIRE_FALSE(out.aborted);

  sim.expire_sessions("alice");
  VerifyOutcome v = sim.verify_advanced(out.photo_handle, "alice");
  CHECK(v.unverifiable);
  CHECK(v.violations.empty());

  // Other members keep their secrets.
  VerifyOutcome vb = sim.verify_advanced(out.photo_handle, "bob");
  CHECK_FALSE(vb.unverifiable);
}

TEST_CASE("agreement upload budget covers exactly the member's share traffic") {
  Simulator sim = standard_sim();
  CaptureSpec spec;
  spec.photographer = "phil";
  spec.mode = CaptureMode::advanced;
  spec.seed = 61;
  CaptureOutcome out = sim.capture(spec);
  REQUIRE_FALSE(out.aborted);

  size_t total = 0;
  for (const auto& e : sim.transcript().entries()) {
    if (e.session_id != out.session_id || e.sender != "alice") continue;
    if (e.type == MsgType::public_share || e.type == MsgType::round_share)
      total += e.envelope.size();
  }
  CHECK(total > 0);
  CHECK(sim.agreement_upload_bytes(out.session_id, "alice") == total);
  CHECK(sim.agreement_upload_bytes(out.session_id, "dave") == 0);

  // Reused ring: no fresh agreement traffic in the follow-up session.
  spec.seed = 62;
  CaptureOutcome next = sim.capture(spec);
  CHECK(next.ring_reused);
  CHECK(sim.agreement_upload_bytes(next.session_id, "alice") == 0);
}

TEST_CASE("two identically scripted simulators produce identical transcripts") {
  auto script = [](Simulator& sim) {
    CaptureSpec spec;
    spec.photographer = "phil";
    spec.seed = 71;
    spec.mode = CaptureMode::baseline;
    sim.capture(spec);
    spec.seed = 72;
    spec.mode = CaptureMode::advanced;
    spec.keep_users = {"bob"};
    CaptureOutcome out = sim.capture(spec);
    sim.verify_advanced(out.photo_handle, "bob");
    return out.photo_handle;
  };
  Simulator a = standard_sim();
  Simulator b = standard_sim();
  std::string ha = script(a);
  std::string hb = script(b);
  CHECK(ha == hb);
  CHECK(a.transcript().render() == b.transcript().render());
  REQUIRE(a.published_photo(ha).size() == b.published_photo(hb).size());
  for (size_t i = 0; i < a.published_photo(ha).size(); ++i)
    CHECK(serialize_profile(a.published_photo(ha)[i]) ==
          serialize_profile(b.published_photo(hb)[i]));
}

TEST_CASE("baseline traffic does not trip the advanced-session scan") {
  Simulator sim = standard_sim();
  CaptureSpec spec;
  spec.photographer = "phil";
  spec.mode = CaptureMode::baseline;
  spec.seed = 81;
  sim.capture(spec);
  // Plain frames exist, but only in a baseline session; audit scope is
  // the sessions that promised concealment.
  ConfidentialityReport report = sim.confidentiality_scan();
  CHECK(report.clean());
}

TEST_CASE("claim resolution: greedy one-to-one by score") {
  CHECK(resolve_claims({{0.9, 0.4}, {0.8, 0.85}}, 0.5) == std::vector<int>({0, 1}));
  // Conflict: both want graph 0; better score wins, loser takes nothing.
  CHECK(resolve_claims({{0.9, 0.1}, {0.8, 0.2}}, 0.5) == std::vector<int>({0, -1}));
  // Ties break toward the lower photo index, then the lower user index.
  CHECK(resolve_claims({{0.7, 0.7}, {0.7, 0.7}}, 0.5) == std::vector<int>({0, 1}));
  // Below-threshold scores never claim.
  CHECK(resolve_claims({{0.4}}, 0.5) == std::vector<int>({-1}));
  CHECK(resolve_claims({}, 0.5).empty());
}

TEST_CASE("accuracy harness smoke run on a small population") {
  AccuracyConfig cfg;
  cfg.master_seed = 7;
  cfg.person_count = 6;
  cfg.trials = 3;
  cfg.subjects_per_trial = 2;
  cfg.bystanders_per_trial = 1;
  cfg.lsh_m = 64;

  TrialSet set = collect_trials(cfg);
  REQUIRE(set.enrolled.size() == 6);
  REQUIRE(set.trials.size() == 3);
  for (const auto& t : set.trials) {
    CHECK(t.truth.size() == 3);  // 2 subjects + 1 stranger
    // Only the placed subjects contest the shot, mirroring the live
    // pipeline's proximity scoping; score rows follow that roster.
    REQUIRE(t.contestants.size() == 2);
    for (size_t idx : t.contestants) CHECK(idx < set.enrolled.size());
    CHECK(t.contestants[0] != t.contestants[1]);
    REQUIRE(t.plain.size() == 2);
    REQUIRE(t.hashed.size() == 2);
    for (const auto& row : t.plain) CHECK(row.size() == 3);
    size_t strangers = 0;
    for (const auto& id : t.truth) strangers += id.empty() ? 1 : 0;
    CHECK(strangers == 1);
  }

  AccuracyReport report = score_trials(set, cfg.theta_s);
  CHECK(report.trials == 3);
  CHECK(report.plain.present == 6);
  CHECK(report.plain.photographed == 9);
  CHECK(report.hashed.present == 6);
  CHECK(report.plain.fn_rate >= 0.0);
  CHECK(report.plain.fn_rate <= 1.0);
  CHECK(report.agreement >= 0.0);
  CHECK(report.agreement <= 1.0);
  CHECK(report.gap > 0.0);
  CHECK(report.self_mean > report.cross_mean);

  // Same inputs, stricter threshold: claims can only disappear.
  AccuracyReport strict = score_trials(set, 0.95);
  CHECK(strict.plain.missed >= report.plain.missed);
}
