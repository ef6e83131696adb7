// Copyright 2026 The qa-router Authors
// SPDX-License-Identifier: Apache-2.0

// File-based message exchange with external model processes over a shared
// mount. Each role owns four spool directories:
//
//   <root>/<role>/inbox/       <id>.req.json             (producer, atomic rename)
//   <root>/<role>/processing/  <id>.req.json.<consumer>  (claimed by rename)
//   <root>/<role>/done/        <id>.req.json, <id>.resp.json
//   <root>/<role>/failed/      <id>.req.json, <id>.err.json
//
// Every file becomes visible through rename(2) from a dot-prefixed temporary
// in the same directory, so readers never see partial content. All spool
// directories must live on one filesystem with atomic rename.

#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

namespace qarouter {

using Json = nlohmann::ordered_json;

inline constexpr int kProtocolVersion = 1;

enum class Role { Classifier, Reader, Nl2Sql };
enum class MessageKind { Request, Response };
enum class SpoolBox { Inbox, Processing, Done, Failed };

std::string_view to_string(Role role);
std::string_view to_string(MessageKind kind);
Role parse_role(std::string_view text);

struct IpcMessage {
  std::string id;
  Role role = Role::Classifier;
  MessageKind kind = MessageKind::Request;
  int protocol_version = kProtocolVersion;
  std::string created_at;  // RFC 3339, UTC
  Json payload = Json::object();

  /// Compact UTF-8 JSON with fields in wire order.
  std::string to_wire() const;
  /// Throws Error(SerializationError) on anything that is not a well-formed
  /// envelope. Payload bodies are checked separately by validate_payload.
  static IpcMessage from_wire(std::string_view text);
};

/// Throws Error(SerializationError) describing the first schema violation.
void validate_payload(Role role, MessageKind kind, const Json& payload);

/// Timestamp prefix plus 64 random bits, e.g. 20261016T101500.123456Z-9f0c...
std::string make_message_id();
std::string utc_now_rfc3339();

class SpoolDirs {
 public:
  /// Creates the full directory tree (idempotent).
  static SpoolDirs initialize(const std::filesystem::path& root);
  /// Throws Error(SpoolUnavailable) unless every directory already exists.
  static SpoolDirs open(const std::filesystem::path& root);

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path dir(Role role, SpoolBox box) const;

 private:
  explicit SpoolDirs(std::filesystem::path root) : root_(std::move(root)) {}
  std::filesystem::path root_;
};

/// Writes `<id>.req.json` into the role's inbox; returns the message id.
std::string send_request(const SpoolDirs& spool, const IpcMessage& message);
std::string send_request(const SpoolDirs& spool, Role role, Json payload);

/// Single consumer identity. Claims are exclusive across processes.
class SpoolConsumer {
 public:
  SpoolConsumer(SpoolDirs spool, Role role, std::string consumer_id);

  /// Oldest valid request, or nullopt when the inbox is empty. Requests that
  /// fail envelope or payload validation are moved to failed/ and skipped.
  std::optional<IpcMessage> claim_next();

  /// Throws Error(UnknownRequestId) unless this consumer holds the claim.
  void respond(const std::string& request_id, Json payload);
  void fail(const std::string& request_id, std::string_view reason);

  /// Returns claims left in processing/ by an earlier run under the same
  /// consumer id to the inbox.
  std::size_t requeue_own_claims();

  const std::string& consumer_id() const { return consumer_id_; }
  Role role() const { return role_; }
  const SpoolDirs& spool() const { return spool_; }

 private:
  std::filesystem::path claim_path(const std::string& request_id) const;
  void reject(const std::filesystem::path& claimed, const std::string& id,
              std::string_view reason);

  SpoolDirs spool_;
  Role role_;
  std::string consumer_id_;
};

/// Moves claims older than `threshold` back to the inbox. Each stale file is
/// re-queued exactly once per sweep even with concurrent sweepers.
std::size_t requeue_stale(const SpoolDirs& spool, Role role,
                          std::chrono::milliseconds threshold);

/// Polls done/ until `<id>.resp.json` appears.
/// Errors: ExternalTimeout, MalformedBackendResponse, BackendFailed (the
/// request was moved to failed/).
IpcMessage await_response(const SpoolDirs& spool, Role role, const std::string& id,
                          std::chrono::milliseconds timeout,
                          std::chrono::milliseconds poll = std::chrono::milliseconds(100));

/// Where and how long to wait for an external backend.
struct ExternalBackend {
  std::filesystem::path spool_root;
  std::chrono::milliseconds timeout{30000};
  std::chrono::milliseconds poll{100};
};

/// send_request + await_response; returns the response payload.
Json call_external(const ExternalBackend& backend, Role role, Json request_payload);

}  // namespace qarouter
