// Copyright 2026 The qa-router Authors
// SPDX-License-Identifier: Apache-2.0

#include "qarouter/stub_server.hpp"

#include <fstream>
#include <thread>

#include "qarouter/error.hpp"
#include "qarouter/textprep.hpp"

namespace qarouter {
namespace {

bool contains_phrase(const TokenSeq& text, const TokenSeq& phrase) {
  if (phrase.empty() || phrase.size() > text.size()) return false;
  for (std::size_t i = 0; i + phrase.size() <= text.size(); ++i) {
    if (std::equal(phrase.begin(), phrase.end(), text.begin() + static_cast<long>(i))) return true;
  }
  return false;
}

std::string request_text(Role role, const Json& payload) {
  const char* field = role == Role::Reader ? "input" : "question";
  return payload.at(field).get<std::string>();
}

}  // namespace

StubBehavior StubBehavior::from_json(const Json& j) {
  StubBehavior b;
  if (!j.is_object()) throw Error(ErrorCode::ConfigError, "stub behavior must be a JSON object");
  if (j.contains("default")) b.default_value = j["default"].get<std::string>();
  if (j.contains("echo")) b.echo = j["echo"].get<bool>();
  if (j.contains("score")) b.score = j["score"].get<double>();
  if (j.contains("fail_on")) b.fail_on = normalize_text(j["fail_on"].get<std::string>()).text;
  if (j.contains("keywords")) {
    for (const auto& [k, v] : j["keywords"].items()) {
      b.keywords.emplace_back(normalize_text(k).text, v.get<std::string>());
    }
  }
  if (!b.echo && b.default_value.empty() && b.keywords.empty()) {
    throw Error(ErrorCode::ConfigError, "stub behavior needs 'default', 'keywords' or 'echo'");
  }
  return b;
}

StubBehavior StubBehavior::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open stub behavior " + path.string());
  try {
    return from_json(Json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, path.string() + ": " + e.what());
  }
}

Json stub_response(Role role, const StubBehavior& behavior, const Json& request_payload) {
  const std::string text = request_text(role, request_payload);
  const TokenSeq tokens = normalized_tokens(text);
  if (behavior.fail_on && contains_phrase(tokens, tokenize(*behavior.fail_on))) {
    throw Error(ErrorCode::BackendFailed, "stub configured to fail on '" + *behavior.fail_on + "'");
  }

  std::string value;
  if (behavior.echo) {
    value = text;
  } else {
    value = behavior.default_value;
    for (const auto& [phrase, v] : behavior.keywords) {
      if (contains_phrase(tokens, tokenize(phrase))) {
        value = v;
        break;
      }
    }
  }
  if (value.empty()) throw Error(ErrorCode::BackendFailed, "stub has no answer for this request");

  Json out;
  switch (role) {
    case Role::Classifier: out["label"] = value; break;
    case Role::Reader:
      out["answer"] = value;
      out["score"] = behavior.score;
      break;
    case Role::Nl2Sql: out["sql"] = value; break;
  }
  return out;
}

std::size_t serve_stub(const SpoolDirs& spool, Role role, const StubBehavior& behavior,
                       const StubServerOptions& options, const std::atomic<bool>* stop) {
  SpoolConsumer consumer(spool, role, options.consumer_id);
  consumer.requeue_own_claims();

  std::size_t handled = 0;
  auto idle_since = std::chrono::steady_clock::now();
  while (!(stop && stop->load())) {
    if (options.max_messages && handled >= *options.max_messages) break;
    std::optional<IpcMessage> request = consumer.claim_next();
    if (!request) {
      if (options.idle_exit &&
          std::chrono::steady_clock::now() - idle_since >= *options.idle_exit) {
        break;
      }
      requeue_stale(spool, role, options.stale_after);
      std::this_thread::sleep_for(options.poll);
      continue;
    }
    try {
      try {
        consumer.respond(request->id, stub_response(role, behavior, request->payload));
      } catch (const Error& e) {
        if (e.code() == ErrorCode::UnknownRequestId) throw;
        consumer.fail(request->id, std::string(error_code_name(e.code())) + ": " + e.what());
      } catch (const std::exception& e) {
        consumer.fail(request->id, e.what());
      }
    } catch (const Error& e) {
      // Claim was re-queued by a stale sweep; another consumer owns it now.
      if (e.code() != ErrorCode::UnknownRequestId) throw;
    }
    ++handled;
    idle_since = std::chrono::steady_clock::now();
  }
  return handled;
}

}  // namespace qarouter
