// Copyright 2026 The qa-router Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qarouter/ipc.hpp"

namespace qarouter {

/// Response policy of a stub backend, loaded from JSON:
///   {"default": "sql", "keywords": {"quantos": "sql"}, "echo": false, "score": 1.0}
/// `echo` answers with the request text (question or reader input). Otherwise
/// the first keyword phrase found in the normalized request text wins, then
/// `default`.
struct StubBehavior {
  std::string default_value;
  std::vector<std::pair<std::string, std::string>> keywords;  // normalized phrase -> value
  bool echo = false;
  double score = 1.0;
  /// Behaviour-driven failure: requests containing this phrase are moved to
  /// failed/ instead of being answered.
  std::optional<std::string> fail_on;

  static StubBehavior from_json(const Json& j);
  static StubBehavior load(const std::filesystem::path& path);
};

/// Response payload for one request. Throws Error when the behaviour has no
/// answer for it.
Json stub_response(Role role, const StubBehavior& behavior, const Json& request_payload);

struct StubServerOptions {
  std::string consumer_id = "stub";
  std::chrono::milliseconds poll{100};
  std::optional<std::size_t> max_messages;
  std::optional<std::chrono::milliseconds> idle_exit;
  std::chrono::milliseconds stale_after{300000};
};

/// Claim, answer, respond loop. Re-queues its own leftover claims on start and
/// sweeps stale claims of other consumers while idle. Returns the number of
/// requests handled (answered or failed).
std::size_t serve_stub(const SpoolDirs& spool, Role role, const StubBehavior& behavior,
                       const StubServerOptions& options,
                       const std::atomic<bool>* stop = nullptr);

}  // namespace qarouter
