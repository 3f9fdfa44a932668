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
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "veil/agreement.hpp"
#include "veil/corpus.hpp"
#include "veil/lsh.hpp"
#include "veil/match.hpp"
#include "veil/portrait.hpp"
#include "veil/pose.hpp"

namespace veil {

enum class Intent { invisible, tagged, none };
enum class CaptureMode { baseline, advanced };

enum class MsgType : uint8_t {
  group_params = 1,
  family_announce = 2,
  public_share = 3,      // member -> cloud: {index, b}
  neighbor_publics = 4,  // cloud -> member: {index, ring size, b_prev, b_next}
  round_share = 5,       // member -> cloud: {index, c}
  round_list = 6,        // cloud -> member: ids and c values in ring order
  profile_upload = 7,    // user -> cloud: profile frame
  photo_upload = 8,      // photographer -> cloud: all photo-person frames
  match_directives = 9,  // cloud -> photographer: directive records
  photo_publish = 10,    // photographer -> cloud: published photo handle
  verify_request = 11,
  verify_vectors = 12,  // cloud -> user: shuffled plain vectors off the published photo
  verify_codes = 13,    // user -> cloud: transformed codes, same order
  verify_verdict = 14,
  abort_notice = 15,
};

/// Relay frame: fixed 16-byte session id, sender, type, length-prefixed
/// body. The recipient is channel metadata, not part of the frame.
struct Message {
  std::string session_id;  // padded/truncated to 16 bytes on the wire
  std::string sender;
  std::string recipient;
  MsgType type = MsgType::group_params;
  Bytes body;
};

Bytes encode_envelope(const Message& m);

struct TranscriptEntry {
  size_t seq = 0;
  std::string session_id;
  std::string sender;
  std::string recipient;
  MsgType type = MsgType::group_params;
  Bytes envelope;
};

/// Append-only log of every relayed frame. Every channel has the cloud
/// as one endpoint, so the cloud sees everything; a user sees only the
/// frames it sent or received.
class Transcript {
 public:
  void record(const Message& m);
  const std::vector<TranscriptEntry>& entries() const { return entries_; }
  std::vector<size_t> visible_to(const std::string& party) const;
  /// Line-delimited deterministic text (no timestamps), for persistence
  /// and replay comparison.
  std::string render() const;

 private:
  std::vector<TranscriptEntry> entries_;
};

struct ConcealmentDirective {
  enum class Action { erase, tag };
  Action action = Action::erase;
  std::string user_id;
  size_t photo_index = 0;
  std::vector<std::string> region_refs;
  double score = 0;
};

struct SimConfig {
  uint64_t master_seed = 42;
  unsigned group_bits = 512;
  size_t lsh_m = 128;
  double lsh_w = 3.0;
  FeatureDims dims;
  NoiseModel noise;
  double xi_s = 0.5;
  double theta_s = 0.5;
};

struct UserSpec {
  std::string id;
  Intent intent = Intent::invisible;
  bool registered = true;
  SyntheticPerson person;
  double x = 0;
  double y = 0;
};

struct CaptureSpec {
  std::string photographer;
  Pose camera;
  CaptureMode mode = CaptureMode::baseline;
  size_t bystanders = 0;
  uint64_t seed = 1;
  std::vector<std::string> occluded;    // in FOV but hidden from the photo
  std::vector<std::string> keep_users;  // erase directives the photographer defies
  /// Simulated loss of one member's round broadcast; the session aborts.
  std::optional<std::string> drop_round_share_from;
};

struct CaptureOutcome {
  std::string session_id;
  CaptureMode mode = CaptureMode::baseline;
  bool aborted = false;
  std::string abort_reason;
  std::vector<ConcealmentDirective> directives;
  std::string photo_handle;  // empty when unshared
  Scene scene;               // ground truth for scoring

  size_t ring_size = 0;
  bool ring_reused = false;
  std::vector<std::string> recompute_set;  // members that refreshed c
  size_t agreement_messages = 0;
  size_t profile_uploads = 0;
  size_t photo_uploads = 0;
  size_t result_messages = 0;

  // Wall-clock decomposition of the session, for timing reports only;
  // excluded from determinism guarantees.
  double agreement_seconds = 0;
  double matching_seconds = 0;
};

struct Violation {
  std::string photographer;
  std::string user_id;
  size_t photo_graph_index = 0;
  double score = 0;
};

struct VerifyOutcome {
  bool unverifiable = false;
  std::vector<Violation> violations;
};

struct ConfidentialityReport {
  bool plain_profile_frames = false;      // any plain-mode frame in a profile/photo upload
  std::vector<std::string> exposed_users; // plain payload bytes found in cloud view
  bool secret_exposure = false;           // R or private exponent bytes found
  bool clean() const { return !plain_profile_frames && exposed_users.empty() && !secret_exposure; }
};

/// Returns users' ids whose position falls inside the camera sector.
/// Order follows the input roster.
std::vector<std::string> proximity_check(const Pose& camera, const std::vector<UserSpec>& users);

/// In-process simulation of the cloud, the photographer, and neighbor
/// clients over a star-topology relay. Deterministic for a fixed config:
/// replaying the same captures yields a byte-identical transcript.
class Simulator {
 public:
  explicit Simulator(SimConfig cfg);
  ~Simulator();
  Simulator(Simulator&&) noexcept;
  Simulator& operator=(Simulator&&) noexcept;

  void add_user(const UserSpec& user);

  CaptureOutcome capture(const CaptureSpec& spec);

  /// Cloud-only check of a published photo against the plain profiles
  /// cached during baseline captures. No messages exchanged.
  VerifyOutcome verify_baseline(const std::string& photo_handle);

  /// Interactive variant: the cloud sends the published photo's vectors
  /// in a fresh random order; the requester transforms them under the
  /// session secret; the cloud matches in hashed space.
  VerifyOutcome verify_advanced(const std::string& photo_handle, const std::string& user_id);

  /// Drops a user's retained session secrets; later advanced
  /// verifications by that user come back unverifiable.
  void expire_sessions(const std::string& user_id);

  const Transcript& transcript() const;
  const GroupParams& params() const;
  const LshSuite& suite() const;
  const SimConfig& config() const;

  /// Published photo content (the stand-in for pixel data, cloud-side
  /// state outside the transcript).
  const std::vector<PortraitGraph>& published_photo(const std::string& handle) const;

  /// Structural confidentiality check over the cloud-visible transcript:
  /// no plain-mode frames in profile traffic, no registered user's plain
  /// feature payload bytes, no serialized R or private exponent bytes.
  ConfidentialityReport confidentiality_scan() const;

  /// Upload bytes (full frames) a user spent on agreement messages in
  /// one session.
  size_t agreement_upload_bytes(const std::string& session_id, const std::string& user_id) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace veil
