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

#include "veil/protocol.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <iterator>
#include <sstream>
#include <stdexcept>

#include "veil/rng.hpp"
#include "veil/scramble.hpp"
#include "veil/transform.hpp"

namespace veil {

namespace {

std::string pad_session(const std::string& id) {
  std::string s = id.substr(0, 16);
  s.resize(16, ' ');
  return s;
}

double elapsed_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string region_token(size_t graph_index, uint16_t node_id) {
  return "g" + std::to_string(graph_index) + ":n" + std::to_string(node_id);
}

constexpr const char* kDeploySession = "deployment000000";

}  // namespace

Bytes encode_envelope(const Message& m) {
  ByteWriter w;
  std::string sid = pad_session(m.session_id);
  w.raw(Bytes(sid.begin(), sid.end()));
  w.str16(m.sender);
  w.u8(static_cast<uint8_t>(m.type));
  w.u32(static_cast<uint32_t>(m.body.size()));
  w.raw(m.body);
  return w.take();
}

void Transcript::record(const Message& m) {
  TranscriptEntry e;
  e.seq = entries_.size();
  e.session_id = m.session_id;
  e.sender = m.sender;
  e.recipient = m.recipient;
  e.type = m.type;
  e.envelope = encode_envelope(m);
  entries_.push_back(std::move(e));
}

std::vector<size_t> Transcript::visible_to(const std::string& party) const {
  std::vector<size_t> out;
  for (const auto& e : entries_)
    if (party == "cloud" || e.sender == party || e.recipient == party) out.push_back(e.seq);
  return out;
}

std::string Transcript::render() const {
  std::ostringstream out;
  for (const auto& e : entries_)
    out << e.seq << "|" << e.session_id << "|" << e.sender << "|" << e.recipient << "|"
        << static_cast<int>(e.type) << "|" << to_hex(e.envelope) << "\n";
  return out.str();
}

std::vector<std::string> proximity_check(const Pose& camera, const std::vector<UserSpec>& users) {
  std::vector<std::string> out;
  for (const auto& u : users)
    if (in_fov(camera, u.x, u.y)) out.push_back(u.id);
  return out;
}

struct Simulator::Impl {
  SimConfig cfg;
  GroupParams gparams;
  LshSuite lsh;
  Transcript log;
  CounterRng cloud_rng;

  std::vector<UserSpec> roster;
  std::map<std::string, CounterRng> client_rng;

  size_t session_counter = 0;

  // One ring per photographer, kept across captures so an unchanged
  // neighborhood reuses the agreed number.
  struct RingState {
    std::vector<std::string> members;  // ring order
    std::unique_ptr<RingSession> session;
    std::map<std::string, MemberState> states;  // client-side secrets
    BigInt r;
  };
  std::map<std::string, RingState> rings;

  struct SessionInfo {
    CaptureMode mode = CaptureMode::baseline;
    std::string photographer;
    std::vector<std::string> protected_users;
    std::map<std::string, HashedPortraitGraph> hashed_profiles;  // advanced uploads
    std::vector<HashedPortraitGraph> hashed_photo;               // advanced photo upload
    std::map<std::string, size_t> matched_graph;  // per-user match at capture time
  };
  std::map<std::string, SessionInfo> sessions;

  std::map<std::string, PortraitGraph> cached_plain_profiles;  // baseline cache
  std::map<std::string, std::vector<PortraitGraph>> photo_store;
  std::map<std::string, std::string> photo_session;

  // Client-side retention: the session secret per (user, session), and
  // the plain profile a client transformed locally in advanced mode. The
  // latter never crosses the wire; the scan uses it as a needle set.
  std::map<std::pair<std::string, std::string>, BigInt> retained_r;
  std::map<std::string, PortraitGraph> last_plain_profile;

  std::vector<BigInt> secret_values;  // every private exponent and every R

  explicit Impl(SimConfig c)
      : cfg(std::move(c)),
        gparams(init_params(cfg.group_bits, tagged_seed(cfg.master_seed, "deployment"))),
        lsh(cfg.lsh_m, cfg.lsh_w, tagged_seed(cfg.master_seed, "lsh-master"), cfg.dims.kinds()),
        cloud_rng(tagged_seed(cfg.master_seed, "cloud")) {}

  void send(Message m) { log.record(m); }

  UserSpec& user(const std::string& id) {
    for (auto& u : roster)
      if (u.id == id) return u;
    throw std::out_of_range("unknown user: " + id);
  }

  CounterRng& rng_of(const std::string& id) {
    auto it = client_rng.find(id);
    if (it == client_rng.end()) throw std::out_of_range("unknown user: " + id);
    return it->second;
  }

  std::string next_session_id() {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "s%015zu", ++session_counter);
    return std::string(buf, 16);
  }

  // Profiles are deliberate self-captures, so field degradations (drops,
  // occlusion, photobombs) do not apply; sensor noise still does.
  PortraitGraph observe_profile(const std::string& user_id, uint64_t capture_seed) {
    const SyntheticPerson& person = user(user_id).person;
    uint64_t seed = tagged_seed(capture_seed, "profile:" + user_id);
    for (int attempt = 0;; ++attempt) {
      try {
        PortraitGraph g = observe(person, enrollment_noise(cfg.noise), seed);
        g.owner_ref = user_id;
        return g;
      } catch (const std::runtime_error&) {
        if (attempt >= 64) throw;
        seed = tagged_seed(seed, "redraw");
      }
    }
  }

  // -- agreement phases ------------------------------------------------

  void send_neighbor_publics(const std::string& session_id, RingState& rs,
                             const std::string& member, size_t* count) {
    RingSession& ring = *rs.session;
    MemberState& st = rs.states[member];
    st.index = ring.index_of(member);
    st.b_prev = ring.b_of(ring.prev_of(member));
    st.b_next = ring.b_of(ring.next_of(member));
    ByteWriter w;
    w.u16(static_cast<uint16_t>(st.index));
    w.u16(static_cast<uint16_t>(ring.size()));
    write_bigint(w, st.b_prev);
    write_bigint(w, st.b_next);
    send({session_id, "cloud", member, MsgType::neighbor_publics, w.take()});
    ++*count;
  }

  // Member computes and uploads its round broadcast. Returns false when
  // the upload is the one the scenario drops.
  bool upload_round_share(const std::string& session_id, RingState& rs, const std::string& member,
                          const CaptureSpec& spec, size_t* count) {
    MemberState& st = rs.states[member];
    st.c = compute_c(gparams, st.key.a, st.b_prev, st.b_next);
    if (spec.drop_round_share_from && *spec.drop_round_share_from == member) return false;
    send({session_id, member, "cloud", MsgType::round_share,
          encode_round_share(static_cast<uint16_t>(st.index), st.c)});
    ++*count;
    rs.session->set_c(member, st.c);
    return true;
  }

  // Cloud distributes the full round list; every member derives R and
  // they must all agree. Returns false if any broadcast went missing.
  bool finish_round(const std::string& session_id, RingState& rs, size_t* count) {
    if (!rs.session->complete()) return false;
    std::vector<BigInt> cs = rs.session->c_in_ring_order();
    ByteWriter w;
    w.u16(static_cast<uint16_t>(rs.members.size()));
    for (size_t k = 0; k < rs.members.size(); ++k) {
      w.str16(rs.members[k]);
      write_bigint(w, cs[k]);
    }
    Bytes body = w.take();

    std::optional<BigInt> agreed;
    for (const auto& member : rs.members) {
      send({session_id, "cloud", member, MsgType::round_list, body});
      ++*count;
      MemberState& st = rs.states[member];
      st.index = static_cast<size_t>(
          std::find(rs.members.begin(), rs.members.end(), member) - rs.members.begin());
      st.r = compute_r(gparams, st.index, st.key.a, st.b_prev, cs);
      if (!agreed)
        agreed = st.r;
      else if (*agreed != st.r)
        throw std::logic_error("ring members derived different numbers");
    }
    rs.r = *agreed;
    secret_values.push_back(rs.r);
    ++rs.session->round;
    return true;
  }

  bool build_ring(const std::string& session_id, const std::vector<std::string>& members,
                  const CaptureSpec& spec, CaptureOutcome* outcome) {
    RingState rs;
    rs.members = members;
    rs.session = std::make_unique<RingSession>(gparams);
    for (size_t i = 0; i < members.size(); ++i) {
      const std::string& member = members[i];
      MemberState st;
      st.index = i;
      st.key = keygen(gparams, rng_of(member));
      secret_values.push_back(st.key.a);
      send({session_id, member, "cloud", MsgType::public_share,
            encode_public_share(static_cast<uint16_t>(i), st.key.b)});
      ++outcome->agreement_messages;
      rs.session->insert_member(member, st.key.b, i);
      rs.states[member] = std::move(st);
    }
    for (const auto& member : members)
      send_neighbor_publics(session_id, rs, member, &outcome->agreement_messages);
    bool all_in = true;
    for (const auto& member : members)
      all_in &= upload_round_share(session_id, rs, member, spec, &outcome->agreement_messages);
    if (!all_in || !finish_round(session_id, rs, &outcome->agreement_messages)) return false;
    outcome->recompute_set = members;
    rings[spec.photographer] = std::move(rs);
    return true;
  }

  bool update_ring(const std::string& session_id, RingState& rs, const std::string& joined,
                   const std::string& left, const CaptureSpec& spec, CaptureOutcome* outcome) {
    std::vector<std::string> touched;
    if (!joined.empty()) {
      MemberState st;
      st.key = keygen(gparams, rng_of(joined));
      st.index = rs.members.size();
      secret_values.push_back(st.key.a);
      send({session_id, joined, "cloud", MsgType::public_share,
            encode_public_share(static_cast<uint16_t>(st.index), st.key.b)});
      ++outcome->agreement_messages;
      touched = rs.session->insert_member(joined, st.key.b, rs.members.size());
      rs.members.push_back(joined);
      rs.states[joined] = std::move(st);
    } else {
      touched = rs.session->remove_member(left);
      rs.members.erase(std::find(rs.members.begin(), rs.members.end(), left));
      rs.states.erase(left);
    }
    std::sort(touched.begin(), touched.end(), [&](const std::string& a, const std::string& b) {
      return rs.session->index_of(a) < rs.session->index_of(b);
    });
    for (const auto& member : touched)
      send_neighbor_publics(session_id, rs, member, &outcome->agreement_messages);
    bool all_in = true;
    for (const auto& member : touched)
      all_in &= upload_round_share(session_id, rs, member, spec, &outcome->agreement_messages);
    if (!all_in || !finish_round(session_id, rs, &outcome->agreement_messages)) return false;
    outcome->recompute_set = touched;
    return true;
  }

  // Runs reuse / single-change update / full rebuild as the membership
  // delta dictates. Returns false when the round could not complete.
  bool establish_ring(const std::string& session_id, const std::vector<std::string>& members,
                      const CaptureSpec& spec, CaptureOutcome* outcome) {
    auto it = rings.find(spec.photographer);
    if (it != rings.end()) {
      const std::vector<std::string>& have = it->second.members;
      std::set<std::string> have_set(have.begin(), have.end());
      std::set<std::string> want_set(members.begin(), members.end());
      if (have_set == want_set) {
        outcome->ring_reused = true;
        return true;
      }
      std::vector<std::string> joined, left;
      std::set_difference(want_set.begin(), want_set.end(), have_set.begin(), have_set.end(),
                          std::back_inserter(joined));
      std::set_difference(have_set.begin(), have_set.end(), want_set.begin(), want_set.end(),
                          std::back_inserter(left));
      bool one_change = joined.size() + left.size() == 1;
      bool keeps_ring = left.empty() || have.size() > 2;
      if (one_change && keeps_ring)
        return update_ring(session_id, it->second, joined.empty() ? "" : joined.front(),
                           left.empty() ? "" : left.front(), spec, outcome);
    }
    return build_ring(session_id, members, spec, outcome);
  }

  // -- matching and directives ----------------------------------------

  template <typename Graph>
  std::vector<ConcealmentDirective> directives_from_matches(
      const std::vector<ProfileMatch>& matches, const std::vector<Graph>& photo_graphs) {
    std::vector<ConcealmentDirective> out;
    for (const auto& m : matches) {
      ConcealmentDirective d;
      d.user_id = m.user_id;
      d.photo_index = m.photo_index;
      d.score = m.score;
      d.action = user(m.user_id).intent == Intent::tagged ? ConcealmentDirective::Action::tag
                                                          : ConcealmentDirective::Action::erase;
      for (const auto& node : photo_graphs[m.photo_index].nodes)
        d.region_refs.push_back(region_token(m.photo_index, node.id));
      out.push_back(std::move(d));
    }
    return out;
  }

  Bytes directive_body(const std::vector<ConcealmentDirective>& directives) const {
    std::ostringstream out;
    for (const auto& d : directives) {
      const char* action = d.action == ConcealmentDirective::Action::erase ? "erase" : "tag";
      for (const auto& region : d.region_refs)
        out << action << " " << region << " " << d.user_id << "\n";
    }
    std::string text = out.str();
    return Bytes(text.begin(), text.end());
  }

  template <typename Graph>
  Bytes photo_body(const std::vector<Graph>& graphs) const {
    ByteWriter w;
    w.u16(static_cast<uint16_t>(graphs.size()));
    for (const auto& g : graphs) {
      Bytes frame = serialize_profile(g);
      w.u32(static_cast<uint32_t>(frame.size()));
      w.raw(frame);
    }
    return w.take();
  }

  void publish_photo(const std::string& session_id, const std::string& photographer,
                     const Scene& scene, const std::vector<ConcealmentDirective>& directives,
                     const CaptureSpec& spec, CaptureOutcome* outcome) {
    std::set<size_t> erased;
    for (const auto& d : directives) {
      if (d.action != ConcealmentDirective::Action::erase) continue;
      bool defied = std::find(spec.keep_users.begin(), spec.keep_users.end(), d.user_id) !=
                    spec.keep_users.end();
      if (!defied) erased.insert(d.photo_index);
    }
    std::vector<PortraitGraph> published;
    for (size_t i = 0; i < scene.photo_graphs.size(); ++i)
      if (!erased.contains(i)) published.push_back(scene.photo_graphs[i]);

    std::string handle = "photo-" + session_id;
    ByteWriter w;
    w.str16(handle);
    send({session_id, photographer, "cloud", MsgType::photo_publish, w.take()});
    photo_store[handle] = std::move(published);
    photo_session[handle] = session_id;
    outcome->photo_handle = handle;
  }
};

Simulator::Simulator(SimConfig cfg) : impl_(std::make_unique<Impl>(std::move(cfg))) {}
Simulator::~Simulator() = default;
Simulator::Simulator(Simulator&&) noexcept = default;
Simulator& Simulator::operator=(Simulator&&) noexcept = default;

const Transcript& Simulator::transcript() const { return impl_->log; }
const GroupParams& Simulator::params() const { return impl_->gparams; }
const LshSuite& Simulator::suite() const { return impl_->lsh; }
const SimConfig& Simulator::config() const { return impl_->cfg; }

const std::vector<PortraitGraph>& Simulator::published_photo(const std::string& handle) const {
  auto it = impl_->photo_store.find(handle);
  if (it == impl_->photo_store.end()) throw std::out_of_range("unknown photo handle: " + handle);
  return it->second;
}

void Simulator::add_user(const UserSpec& user) {
  for (const auto& u : impl_->roster)
    if (u.id == user.id) throw std::invalid_argument("duplicate user id: " + user.id);
  UserSpec copy = user;
  copy.person.person_id = user.id;  // scene ground truth speaks user ids
  impl_->roster.push_back(std::move(copy));
  impl_->client_rng.emplace(user.id,
                            CounterRng(tagged_seed(impl_->cfg.master_seed, "user:" + user.id)));
  if (user.registered) {
    impl_->send({kDeploySession, "cloud", user.id, MsgType::group_params,
                 encode_params(impl_->gparams)});
    // One announcement covers all kinds; clients derive each family from
    // the kind-tagged subseed themselves.
    ByteWriter w;
    w.u64(impl_->cfg.lsh_m);
    w.f64(impl_->cfg.lsh_w);
    w.u64(impl_->lsh.master_seed());
    auto kinds = impl_->cfg.dims.kinds();
    w.u16(static_cast<uint16_t>(kinds.size()));
    for (const auto& [tag, dim] : kinds) {
      w.str16(tag);
      w.u64(dim);
    }
    w.str16(LshFamily::kGeneratorId);
    impl_->send({kDeploySession, "cloud", user.id, MsgType::family_announce, w.take()});
  }
}

CaptureOutcome Simulator::capture(const CaptureSpec& spec) {
  Impl& s = *impl_;
  s.user(spec.photographer);  // throws on unknown id

  CaptureOutcome outcome;
  outcome.mode = spec.mode;
  outcome.session_id = s.next_session_id();
  const std::string& session_id = outcome.session_id;

  Impl::SessionInfo info;
  info.mode = spec.mode;
  info.photographer = spec.photographer;

  // Everyone but the photographer is a potential photo subject; the FOV
  // sector and occlusion flags decide who lands in the photo.
  std::vector<ScenePlacement> subjects;
  std::vector<UserSpec> others;
  for (const auto& u : s.roster) {
    if (u.id == spec.photographer) continue;
    others.push_back(u);
    ScenePlacement placed;
    placed.person = u.person;
    placed.x = u.x;
    placed.y = u.y;
    placed.occluded =
        std::find(spec.occluded.begin(), spec.occluded.end(), u.id) != spec.occluded.end();
    subjects.push_back(std::move(placed));
  }
  outcome.scene = gen_scene(subjects, spec.camera, spec.bystanders, s.cfg.noise, spec.seed,
                            PersonShape{}, s.cfg.dims);

  std::vector<std::string> fov = proximity_check(spec.camera, others);
  std::vector<std::string> protected_users;
  for (const auto& id : fov) {
    const UserSpec& u = s.user(id);
    if (u.registered && u.intent != Intent::none) protected_users.push_back(id);
  }
  info.protected_users = protected_users;

  // Fresh per-capture profile sightings. Seeds depend only on the capture
  // seed and the user id, so a baseline/advanced pair over the same spec
  // sees identical inputs.
  std::map<std::string, PortraitGraph> profiles;
  for (const auto& id : protected_users) profiles[id] = s.observe_profile(id, spec.seed);

  if (spec.mode == CaptureMode::baseline) {
    for (const auto& id : protected_users) {
      s.send({session_id, id, "cloud", MsgType::profile_upload, serialize_profile(profiles[id])});
      s.cached_plain_profiles[id] = profiles[id];
      ++outcome.profile_uploads;
    }
    s.send({session_id, spec.photographer, "cloud", MsgType::photo_upload,
            s.photo_body(outcome.scene.photo_graphs)});
    outcome.photo_uploads = 1;

    std::vector<std::pair<std::string, PortraitGraph>> inputs;
    for (const auto& id : protected_users) inputs.emplace_back(id, profiles[id]);
    auto match_t0 = std::chrono::steady_clock::now();
    std::vector<ProfileMatch> matches =
        match_profiles(inputs, outcome.scene.photo_graphs, s.cfg.xi_s, s.cfg.theta_s);
    outcome.matching_seconds = elapsed_since(match_t0);
    outcome.directives = s.directives_from_matches(matches, outcome.scene.photo_graphs);

    s.send({session_id, "cloud", spec.photographer, MsgType::match_directives,
            s.directive_body(outcome.directives)});
    outcome.result_messages = 1;

    s.publish_photo(session_id, spec.photographer, outcome.scene, outcome.directives, spec,
                    &outcome);
    s.sessions[session_id] = std::move(info);
    return outcome;
  }

  // Advanced mode.
  if (!protected_users.empty()) {
    std::vector<std::string> ring_members{spec.photographer};
    ring_members.insert(ring_members.end(), protected_users.begin(), protected_users.end());
    outcome.ring_size = ring_members.size();

    auto ring_t0 = std::chrono::steady_clock::now();
    bool agreed = s.establish_ring(session_id, ring_members, spec, &outcome);
    outcome.agreement_seconds = elapsed_since(ring_t0);
    if (!agreed) {
      outcome.aborted = true;
      outcome.abort_reason = "agreement incomplete: missing round broadcast";
      s.send({session_id, "cloud", spec.photographer, MsgType::abort_notice,
              Bytes(outcome.abort_reason.begin(), outcome.abort_reason.end())});
      s.rings.erase(spec.photographer);
      s.sessions[session_id] = std::move(info);
      return outcome;
    }

    Impl::RingState& rs = s.rings[spec.photographer];
    for (const auto& member : rs.members) s.retained_r[{member, session_id}] = rs.r;

    for (const auto& id : protected_users) {
      s.last_plain_profile[id] = profiles[id];
      HashedPortraitGraph hashed = transform_profile(profiles[id], rs.r, s.lsh, session_id);
      s.send({session_id, id, "cloud", MsgType::profile_upload, serialize_profile(hashed)});
      info.hashed_profiles[id] = std::move(hashed);
      ++outcome.profile_uploads;
    }

    std::vector<HashedPortraitGraph> hashed_photo;
    for (const auto& g : outcome.scene.photo_graphs)
      hashed_photo.push_back(transform_profile(g, rs.r, s.lsh, session_id));
    s.send({session_id, spec.photographer, "cloud", MsgType::photo_upload,
            s.photo_body(hashed_photo)});
    outcome.photo_uploads = 1;

    std::vector<std::pair<std::string, HashedPortraitGraph>> inputs;
    for (const auto& id : protected_users) inputs.emplace_back(id, info.hashed_profiles[id]);
    auto match_t0 = std::chrono::steady_clock::now();
    std::vector<ProfileMatch> matches =
        match_profiles(inputs, hashed_photo, s.cfg.xi_s, s.cfg.theta_s);
    outcome.matching_seconds = elapsed_since(match_t0);
    outcome.directives = s.directives_from_matches(matches, hashed_photo);
    for (const auto& m : matches) info.matched_graph[m.user_id] = m.photo_index;
    info.hashed_photo = std::move(hashed_photo);

    s.send({session_id, "cloud", spec.photographer, MsgType::match_directives,
            s.directive_body(outcome.directives)});
    outcome.result_messages = 1;
  }

  s.publish_photo(session_id, spec.photographer, outcome.scene, outcome.directives, spec,
                  &outcome);
  s.sessions[session_id] = std::move(info);
  return outcome;
}

VerifyOutcome Simulator::verify_baseline(const std::string& photo_handle) {
  Impl& s = *impl_;
  const std::vector<PortraitGraph>& published = published_photo(photo_handle);
  const std::string& session_id = s.photo_session.at(photo_handle);
  const Impl::SessionInfo& info = s.sessions.at(session_id);

  // The cloud reruns its usual profile matching, cached plain profiles
  // against the shared graphs, conflict resolution included, so a kept
  // portrait is claimed by its owner and not by a look-alike.
  std::vector<std::pair<std::string, PortraitGraph>> inputs;
  for (const auto& user_id : info.protected_users) {
    // Tagged users consented to appear; only erasure subjects count.
    if (s.user(user_id).intent != Intent::invisible) continue;
    auto it = s.cached_plain_profiles.find(user_id);
    if (it == s.cached_plain_profiles.end()) continue;
    inputs.emplace_back(user_id, it->second);
  }

  VerifyOutcome out;
  if (published.empty() || inputs.empty()) return out;
  for (const ProfileMatch& m : match_profiles(inputs, published, s.cfg.xi_s, s.cfg.theta_s))
    out.violations.push_back({info.photographer, m.user_id, m.photo_index, m.score});
  return out;
}

VerifyOutcome Simulator::verify_advanced(const std::string& photo_handle,
                                         const std::string& user_id) {
  Impl& s = *impl_;
  const std::vector<PortraitGraph>& published = published_photo(photo_handle);
  const std::string& session_id = s.photo_session.at(photo_handle);
  const Impl::SessionInfo& info = s.sessions.at(session_id);
  auto profile_it = info.hashed_profiles.find(user_id);
  if (profile_it == info.hashed_profiles.end())
    throw std::invalid_argument("user did not participate in session: " + user_id);

  ByteWriter req;
  req.str16(photo_handle);
  s.send({session_id, user_id, "cloud", MsgType::verify_request, req.take()});

  // Cloud strips every vector off the published photo and shuffles, so
  // the responder learns nothing from the order.
  struct Extracted {
    size_t graph;
    uint16_t node_id;
    FeatureKind kind;
    const std::vector<double>* values;
  };
  std::vector<Extracted> pool;
  for (size_t g = 0; g < published.size(); ++g)
    for (const auto& node : published[g].nodes)
      for (const auto& f : node.features) pool.push_back({g, node.id, f.kind, &f.values});
  for (size_t k = pool.size(); k > 1; --k) std::swap(pool[k - 1], pool[s.cloud_rng.below(k)]);

  ByteWriter vec;
  vec.u32(static_cast<uint32_t>(pool.size()));
  for (const auto& e : pool) {
    vec.u8(static_cast<uint8_t>(e.kind));
    vec.u16(static_cast<uint16_t>(e.values->size()));
    for (double v : *e.values) vec.f64(v);
  }
  s.send({session_id, "cloud", user_id, MsgType::verify_vectors, vec.take()});

  VerifyOutcome out;
  auto r_it = s.retained_r.find({user_id, session_id});
  if (r_it == s.retained_r.end()) {
    s.send({session_id, user_id, "cloud", MsgType::verify_codes, Bytes{0}});  // secret gone
    std::string text = "unverifiable";
    s.send(
        {session_id, "cloud", user_id, MsgType::verify_verdict, Bytes(text.begin(), text.end())});
    out.unverifiable = true;
    return out;
  }

  // Requester transforms each vector under the session secret, keeping
  // the shuffled order; the cloud regroups codes by provenance.
  std::map<std::pair<FeatureKind, size_t>, ScrambleCode> code_cache;
  auto code_for = [&](FeatureKind kind, size_t dim) -> const ScrambleCode& {
    auto key = std::make_pair(kind, dim);
    auto cit = code_cache.find(key);
    if (cit == code_cache.end())
      cit = code_cache.emplace(key, derive_code_for_kind(r_it->second, kind_tag(kind), dim)).first;
    return cit->second;
  };

  std::map<std::pair<size_t, uint16_t>, std::vector<std::pair<FeatureKind, HashCode>>> regrouped;
  ByteWriter cw;
  cw.u8(1);  // status: ok
  cw.u32(static_cast<uint32_t>(pool.size()));
  for (const auto& e : pool) {
    std::vector<double> scrambled = apply_scramble(*e.values, code_for(e.kind, e.values->size()));
    HashCode code = s.lsh.family_for_kind(kind_tag(e.kind)).hash(scrambled);
    cw.u8(static_cast<uint8_t>(e.kind));
    cw.u16(static_cast<uint16_t>(code.bytes().size()));
    cw.raw(code.bytes());
    regrouped[{e.graph, e.node_id}].emplace_back(e.kind, std::move(code));
  }
  s.send({session_id, user_id, "cloud", MsgType::verify_codes, cw.take()});

  // A tagged requester consented to appear, so nothing it finds counts
  // as a violation; the exchange still runs for symmetry.
  bool wants_absence = s.user(user_id).intent == Intent::invisible;

  // The cloud still holds the capture-time match for this user, and code
  // identity survives the round trip: an unmodified region vector yields
  // the same code under the same session secret. A retained portrait is
  // therefore the published graph that shares codes with the graph
  // matched to the requester back then, and a stranger's look-alike can
  // never fake that, so an honestly erased user gets a clean verdict.
  auto matched_it = info.matched_graph.find(user_id);
  auto codes_by_kind = [](std::vector<std::pair<FeatureKind, HashCode>> v) {
    std::sort(v.begin(), v.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    return v;
  };

  std::ostringstream verdict;
  for (size_t g = 0; g < published.size(); ++g) {
    HashedPortraitGraph rebuilt;
    rebuilt.session_ref = session_id;
    rebuilt.edges = published[g].edges;
    for (const auto& node : published[g].nodes) {
      HashedPortraitNode hn;
      hn.id = node.id;
      hn.label = node.label;
      hn.codes = regrouped.at({g, node.id});
      rebuilt.nodes.push_back(std::move(hn));
    }

    bool retained = false;
    if (matched_it != info.matched_graph.end()) {
      const HashedPortraitGraph& original = info.hashed_photo[matched_it->second];
      for (const auto& hn : rebuilt.nodes) {
        for (const auto& on : original.nodes)
          if (hn.id == on.id && codes_by_kind(hn.codes) == codes_by_kind(on.codes)) {
            retained = true;
            break;
          }
        if (retained) break;
      }
    }

    MatchContext ctx = make_context(profile_it->second, rebuilt);
    MatchMatrix m = run_stages(ctx, s.cfg.xi_s);
    double score = graph_similarity(ctx, m);
    if (retained && score >= s.cfg.theta_s && wants_absence) {
      out.violations.push_back({info.photographer, user_id, g, score});
      verdict << "violation " << user_id << " graph " << g << "\n";
    }
  }
  std::string text = out.violations.empty() ? "clean" : verdict.str();
  s.send({session_id, "cloud", user_id, MsgType::verify_verdict, Bytes(text.begin(), text.end())});
  return out;
}

void Simulator::expire_sessions(const std::string& user_id) {
  auto& retained = impl_->retained_r;
  for (auto it = retained.begin(); it != retained.end();)
    it = it->first.first == user_id ? retained.erase(it) : std::next(it);
}

ConfidentialityReport Simulator::confidentiality_scan() const {
  const Impl& s = *impl_;
  ConfidentialityReport report;

  std::set<std::string> advanced_sessions;
  for (const auto& [sid, info] : s.sessions)
    if (info.mode == CaptureMode::advanced) advanced_sessions.insert(sid);

  // Needles: the quantized payload of every feature of every plain
  // profile a client transformed in an advanced session, plus the
  // magnitude bytes of every secret value.
  std::vector<std::pair<std::string, Bytes>> payload_needles;
  for (const auto& [user_id, profile] : s.last_plain_profile)
    for (const auto& node : profile.nodes)
      for (const auto& f : node.features) {
        Bytes payload;
        payload.reserve(f.values.size());
        for (double v : f.values) payload.push_back(quantize_feature_value(v));
        payload_needles.emplace_back(user_id, std::move(payload));
      }
  std::vector<Bytes> secret_needles;
  for (const BigInt& v : s.secret_values) {
    Bytes mag;
    export_bits(v, std::back_inserter(mag), 8);
    if (mag.size() >= 4) secret_needles.push_back(std::move(mag));
  }

  std::set<std::string> exposed;
  for (const auto& entry : s.log.entries()) {
    if (!advanced_sessions.contains(entry.session_id)) continue;

    ByteReader r(entry.envelope);
    r.raw(16);  // session id
    r.str16();  // sender
    r.u8();     // type
    Bytes body = r.raw(r.u32());

    if (entry.type == MsgType::profile_upload) {
      if (body.size() >= 2 && body[1] == kProfileModePlain) report.plain_profile_frames = true;
    } else if (entry.type == MsgType::photo_upload) {
      ByteReader pr(body);
      size_t n = pr.u16();
      for (size_t i = 0; i < n; ++i) {
        Bytes frame = pr.raw(pr.u32());
        if (frame.size() >= 2 && frame[1] == kProfileModePlain) report.plain_profile_frames = true;
      }
    }

    for (const auto& [user_id, needle] : payload_needles)
      if (contains_bytes(body, needle)) exposed.insert(user_id);
    for (const auto& needle : secret_needles)
      if (contains_bytes(body, needle)) report.secret_exposure = true;
  }
  report.exposed_users.assign(exposed.begin(), exposed.end());
  return report;
}

size_t Simulator::agreement_upload_bytes(const std::string& session_id,
                                         const std::string& user_id) const {
  size_t total = 0;
  for (const auto& e : impl_->log.entries()) {
    if (e.session_id != session_id || e.sender != user_id) continue;
    if (e.type == MsgType::public_share || e.type == MsgType::round_share)
      total += e.envelope.size();
  }
  return total;
}

}  // namespace veil
