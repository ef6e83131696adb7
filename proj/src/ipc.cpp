// Copyright 2026 The qa-router Authors
// SPDX-License-Identifier: Apache-2.0

#include "qarouter/ipc.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <fstream>
#include <iterator>
#include <random>
#include <system_error>
#include <thread>
#include <vector>

#include "qarouter/error.hpp"

namespace qarouter {
namespace fs = std::filesystem;

namespace {

constexpr std::string_view kRequestSuffix = ".req.json";
constexpr std::string_view kResponseSuffix = ".resp.json";
constexpr std::string_view kErrorSuffix = ".err.json";

std::mt19937_64& local_engine() {
  thread_local std::mt19937_64 engine = [] {
    std::random_device rd;
    std::seed_seq seq{rd(), rd(), rd(), rd(), static_cast<unsigned>(::getpid()),
                      static_cast<unsigned>(std::chrono::steady_clock::now()
                                                .time_since_epoch().count())};
    return std::mt19937_64(seq);
  }();
  return engine;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + p.string());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

// Temp file in the target directory, fsync, then rename into place.
void write_atomic(const fs::path& dir, const std::string& name, std::string_view content) {
  const fs::path tmp = dir / ("." + name + ".tmp-" + hex64(local_engine()()));
  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_EXCL, 0644);
  if (fd < 0) {
    throw Error(ErrorCode::SpoolUnavailable,
                "cannot create " + tmp.string() + ": " + std::strerror(errno));
  }
  std::size_t written = 0;
  while (written < content.size()) {
    const ssize_t n = ::write(fd, content.data() + written, content.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      const int err = errno;
      ::close(fd);
      ::unlink(tmp.c_str());
      throw Error(ErrorCode::SpoolUnavailable, "write failed: " + std::string(std::strerror(err)));
    }
    written += static_cast<std::size_t>(n);
  }
  ::fsync(fd);
  ::close(fd);
  std::error_code ec;
  fs::rename(tmp, dir / name, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::SpoolUnavailable, "cannot publish " + (dir / name).string());
  }
}

std::string format_utc(std::chrono::system_clock::time_point tp, bool compact) {
  const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(
                          tp.time_since_epoch()).count();
  const std::time_t secs = static_cast<std::time_t>(micros / 1000000);
  const long frac = static_cast<long>(micros % 1000000);
  std::tm tm{};
  ::gmtime_r(&secs, &tm);
  char buf[64];
  if (compact) {
    std::snprintf(buf, sizeof buf, "%04d%02d%02dT%02d%02d%02d.%06ldZ", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, frac);
  } else {
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%06ldZ", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, frac);
  }
  return buf;
}

void require_string(const Json& payload, const char* field) {
  if (!payload.contains(field) || !payload[field].is_string()) {
    throw Error(ErrorCode::SerializationError,
                std::string("payload field '") + field + "' must be a string");
  }
}

std::vector<std::string> sorted_names(const fs::path& dir, std::string_view suffix) {
  std::vector<std::string> names;
  std::error_code ec;
  for (fs::directory_iterator it(dir, ec), end; !ec && it != end; it.increment(ec)) {
    std::string name = it->path().filename().string();
    if (name.empty() || name[0] == '.') continue;
    if (!suffix.empty() && !ends_with(name, suffix)) continue;
    names.push_back(std::move(name));
  }
  if (ec) throw Error(ErrorCode::SpoolUnavailable, "cannot list " + dir.string());
  std::sort(names.begin(), names.end());
  return names;
}

}  // namespace

std::string_view to_string(Role role) {
  switch (role) {
    case Role::Classifier: return "classifier";
    case Role::Reader: return "reader";
    case Role::Nl2Sql: return "nl2sql";
  }
  return "?";
}

std::string_view to_string(MessageKind kind) {
  return kind == MessageKind::Request ? "request" : "response";
}

Role parse_role(std::string_view text) {
  if (text == "classifier") return Role::Classifier;
  if (text == "reader") return Role::Reader;
  if (text == "nl2sql") return Role::Nl2Sql;
  throw Error(ErrorCode::SerializationError, "unknown role '" + std::string(text) + "'");
}

std::string IpcMessage::to_wire() const {
  Json j;
  j["id"] = id;
  j["role"] = std::string(to_string(role));
  j["kind"] = std::string(to_string(kind));
  j["protocol_version"] = protocol_version;
  j["created_at"] = created_at;
  j["payload"] = payload;
  try {
    return j.dump();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SerializationError, e.what());
  }
}

IpcMessage IpcMessage::from_wire(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SerializationError, std::string("invalid JSON: ") + e.what());
  }
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::SerializationError, "invalid message envelope: " + what);
  };
  if (!j.is_object()) fail("not an object");
  for (const char* f : {"id", "role", "kind", "created_at"}) {
    if (!j.contains(f) || !j[f].is_string()) fail(std::string(f) + " must be a string");
  }
  if (!j.contains("protocol_version") || !j["protocol_version"].is_number_integer()) {
    fail("protocol_version must be an integer");
  }
  if (!j.contains("payload") || !j["payload"].is_object()) fail("payload must be an object");

  IpcMessage m;
  m.id = j["id"].get<std::string>();
  if (m.id.empty() || m.id.find('/') != std::string::npos) fail("bad id");
  m.role = parse_role(j["role"].get<std::string>());
  const auto kind = j["kind"].get<std::string>();
  if (kind == "request") m.kind = MessageKind::Request;
  else if (kind == "response") m.kind = MessageKind::Response;
  else fail("unknown kind '" + kind + "'");
  m.protocol_version = j["protocol_version"].get<int>();
  if (m.protocol_version != kProtocolVersion) {
    fail("unsupported protocol_version " + std::to_string(m.protocol_version));
  }
  m.created_at = j["created_at"].get<std::string>();
  m.payload = std::move(j["payload"]);
  return m;
}

void validate_payload(Role role, MessageKind kind, const Json& payload) {
  if (!payload.is_object()) throw Error(ErrorCode::SerializationError, "payload must be an object");
  const bool request = kind == MessageKind::Request;
  switch (role) {
    case Role::Classifier:
      if (request) {
        require_string(payload, "question");
      } else {
        require_string(payload, "label");
        const auto label = payload["label"].get<std::string>();
        if (label != "factual" && label != "sql") {
          throw Error(ErrorCode::SerializationError,
                      "label must be \"factual\" or \"sql\", got \"" + label + "\"");
        }
      }
      break;
    case Role::Reader:
      if (request) {
        require_string(payload, "input");
      } else {
        require_string(payload, "answer");
        if (!payload.contains("score") || !payload["score"].is_number()) {
          throw Error(ErrorCode::SerializationError, "payload field 'score' must be a number");
        }
      }
      break;
    case Role::Nl2Sql:
      if (request) {
        require_string(payload, "question");
        require_string(payload, "db_id");
        if (!payload.contains("schema") || !payload["schema"].is_object()) {
          throw Error(ErrorCode::SerializationError, "payload field 'schema' must be an object");
        }
      } else {
        require_string(payload, "sql");
      }
      break;
  }
}

std::string utc_now_rfc3339() { return format_utc(std::chrono::system_clock::now(), false); }

std::string make_message_id() {
  return format_utc(std::chrono::system_clock::now(), true) + "-" + hex64(local_engine()());
}

SpoolDirs SpoolDirs::initialize(const fs::path& root) {
  SpoolDirs spool(root);
  for (Role role : {Role::Classifier, Role::Reader, Role::Nl2Sql}) {
    for (SpoolBox box : {SpoolBox::Inbox, SpoolBox::Processing, SpoolBox::Done, SpoolBox::Failed}) {
      std::error_code ec;
      fs::create_directories(spool.dir(role, box), ec);
      if (ec) {
        throw Error(ErrorCode::SpoolUnavailable,
                    "cannot create " + spool.dir(role, box).string() + ": " + ec.message());
      }
    }
  }
  return spool;
}

SpoolDirs SpoolDirs::open(const fs::path& root) {
  SpoolDirs spool(root);
  for (Role role : {Role::Classifier, Role::Reader, Role::Nl2Sql}) {
    for (SpoolBox box : {SpoolBox::Inbox, SpoolBox::Processing, SpoolBox::Done, SpoolBox::Failed}) {
      if (!fs::is_directory(spool.dir(role, box))) {
        throw Error(ErrorCode::SpoolUnavailable,
                    "spool directory missing: " + spool.dir(role, box).string());
      }
    }
  }
  return spool;
}

fs::path SpoolDirs::dir(Role role, SpoolBox box) const {
  const char* leaf = "inbox";
  switch (box) {
    case SpoolBox::Inbox: leaf = "inbox"; break;
    case SpoolBox::Processing: leaf = "processing"; break;
    case SpoolBox::Done: leaf = "done"; break;
    case SpoolBox::Failed: leaf = "failed"; break;
  }
  return root_ / std::string(to_string(role)) / leaf;
}

std::string send_request(const SpoolDirs& spool, const IpcMessage& message) {
  if (message.kind != MessageKind::Request) {
    throw Error(ErrorCode::SerializationError, "send_request needs a request message");
  }
  validate_payload(message.role, MessageKind::Request, message.payload);
  const fs::path inbox = spool.dir(message.role, SpoolBox::Inbox);
  if (!fs::is_directory(inbox)) {
    throw Error(ErrorCode::SpoolUnavailable, "spool inbox missing: " + inbox.string());
  }
  write_atomic(inbox, message.id + std::string(kRequestSuffix), message.to_wire());
  return message.id;
}

std::string send_request(const SpoolDirs& spool, Role role, Json payload) {
  IpcMessage m;
  m.id = make_message_id();
  m.role = role;
  m.kind = MessageKind::Request;
  m.created_at = utc_now_rfc3339();
  m.payload = std::move(payload);
  return send_request(spool, m);
}

SpoolConsumer::SpoolConsumer(SpoolDirs spool, Role role, std::string consumer_id)
    : spool_(std::move(spool)), role_(role), consumer_id_(std::move(consumer_id)) {
  if (consumer_id_.empty() ||
      consumer_id_.find_first_of("/.\\ ") != std::string::npos) {
    throw std::invalid_argument("consumer id must be non-empty without '/', '.', '\\' or spaces");
  }
}

fs::path SpoolConsumer::claim_path(const std::string& request_id) const {
  return spool_.dir(role_, SpoolBox::Processing) /
         (request_id + std::string(kRequestSuffix) + "." + consumer_id_);
}

void SpoolConsumer::reject(const fs::path& claimed, const std::string& id,
                           std::string_view reason) {
  Json err;
  err["id"] = id;
  err["role"] = std::string(to_string(role_));
  err["consumer"] = consumer_id_;
  err["error"] = std::string(reason);
  err["failed_at"] = utc_now_rfc3339();
  const fs::path failed = spool_.dir(role_, SpoolBox::Failed);
  write_atomic(failed, id + std::string(kErrorSuffix), err.dump());
  std::error_code ec;
  fs::rename(claimed, failed / (id + std::string(kRequestSuffix)), ec);
  if (ec) throw Error(ErrorCode::SpoolUnavailable, "cannot move " + claimed.string() + " to failed/");
}

std::optional<IpcMessage> SpoolConsumer::claim_next() {
  const fs::path inbox = spool_.dir(role_, SpoolBox::Inbox);
  if (!fs::is_directory(inbox)) {
    throw Error(ErrorCode::SpoolUnavailable, "spool inbox missing: " + inbox.string());
  }
  for (const std::string& name : sorted_names(inbox, kRequestSuffix)) {
    const std::string id = name.substr(0, name.size() - kRequestSuffix.size());
    const fs::path claimed = claim_path(id);
    std::error_code ec;
    fs::rename(inbox / name, claimed, ec);
    if (ec) continue;  // another consumer won the race
    // The claim time drives staleness, not the producer's write time.
    fs::last_write_time(claimed, fs::file_time_type::clock::now(), ec);

    try {
      IpcMessage m = IpcMessage::from_wire(read_file(claimed));
      if (m.id != id) {
        throw Error(ErrorCode::SerializationError, "id does not match file name");
      }
      if (m.role != role_ || m.kind != MessageKind::Request) {
        throw Error(ErrorCode::SerializationError, "not a " + std::string(to_string(role_)) +
                                                       " request");
      }
      validate_payload(role_, MessageKind::Request, m.payload);
      return m;
    } catch (const Error& e) {
      reject(claimed, id, e.what());
    }
  }
  return std::nullopt;
}

void SpoolConsumer::respond(const std::string& request_id, Json payload) {
  const fs::path claimed = claim_path(request_id);
  if (!fs::exists(claimed)) {
    throw Error(ErrorCode::UnknownRequestId,
                "no claim on request '" + request_id + "' held by " + consumer_id_);
  }
  validate_payload(role_, MessageKind::Response, payload);
  IpcMessage response;
  response.id = request_id;
  response.role = role_;
  response.kind = MessageKind::Response;
  response.created_at = utc_now_rfc3339();
  response.payload = std::move(payload);

  const fs::path done = spool_.dir(role_, SpoolBox::Done);
  write_atomic(done, request_id + std::string(kResponseSuffix), response.to_wire());
  std::error_code ec;
  fs::rename(claimed, done / (request_id + std::string(kRequestSuffix)), ec);
  if (ec) throw Error(ErrorCode::SpoolUnavailable, "cannot archive " + claimed.string());
}

void SpoolConsumer::fail(const std::string& request_id, std::string_view reason) {
  const fs::path claimed = claim_path(request_id);
  if (!fs::exists(claimed)) {
    throw Error(ErrorCode::UnknownRequestId,
                "no claim on request '" + request_id + "' held by " + consumer_id_);
  }
  reject(claimed, request_id, reason);
}

std::size_t SpoolConsumer::requeue_own_claims() {
  const fs::path processing = spool_.dir(role_, SpoolBox::Processing);
  const fs::path inbox = spool_.dir(role_, SpoolBox::Inbox);
  const std::string suffix = std::string(kRequestSuffix) + "." + consumer_id_;
  std::size_t moved = 0;
  for (const std::string& name : sorted_names(processing, suffix)) {
    const std::string id = name.substr(0, name.size() - suffix.size());
    std::error_code ec;
    fs::rename(processing / name, inbox / (id + std::string(kRequestSuffix)), ec);
    if (!ec) ++moved;
  }
  return moved;
}

std::size_t requeue_stale(const SpoolDirs& spool, Role role, std::chrono::milliseconds threshold) {
  const fs::path processing = spool.dir(role, SpoolBox::Processing);
  const fs::path inbox = spool.dir(role, SpoolBox::Inbox);
  const auto now = fs::file_time_type::clock::now();
  std::size_t moved = 0;
  for (const std::string& name : sorted_names(processing, {})) {
    const auto pos = name.find(kRequestSuffix);
    if (pos == std::string::npos) continue;
    std::error_code ec;
    const auto mtime = fs::last_write_time(processing / name, ec);
    if (ec || now - mtime < threshold) continue;
    fs::rename(processing / name, inbox / (name.substr(0, pos) + std::string(kRequestSuffix)), ec);
    if (!ec) ++moved;
  }
  return moved;
}

IpcMessage await_response(const SpoolDirs& spool, Role role, const std::string& id,
                          std::chrono::milliseconds timeout, std::chrono::milliseconds poll) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  const fs::path response = spool.dir(role, SpoolBox::Done) / (id + std::string(kResponseSuffix));
  const fs::path error = spool.dir(role, SpoolBox::Failed) / (id + std::string(kErrorSuffix));
  for (;;) {
    if (fs::exists(response)) {
      try {
        IpcMessage m = IpcMessage::from_wire(read_file(response));
        if (m.id != id) throw Error(ErrorCode::SerializationError, "orphan response id " + m.id);
        if (m.role != role || m.kind != MessageKind::Response) {
          throw Error(ErrorCode::SerializationError, "not a " + std::string(to_string(role)) +
                                                         " response");
        }
        validate_payload(role, MessageKind::Response, m.payload);
        return m;
      } catch (const Error& e) {
        throw Error(ErrorCode::MalformedBackendResponse,
                    std::string(to_string(role)) + " response " + id + ": " + e.what());
      }
    }
    if (fs::exists(error)) {
      std::string reason = "request moved to failed/";
      try {
        const auto j = Json::parse(read_file(error));
        if (j.contains("error") && j["error"].is_string()) reason = j["error"].get<std::string>();
      } catch (...) {
      }
      throw Error(ErrorCode::BackendFailed,
                  std::string(to_string(role)) + " backend failed request " + id + ": " + reason);
    }
    if (std::chrono::steady_clock::now() >= deadline) {
      throw Error(ErrorCode::ExternalTimeout,
                  std::string(to_string(role)) + " backend did not answer " + id + " within " +
                      std::to_string(timeout.count()) + " ms");
    }
    std::this_thread::sleep_for(poll);
  }
}

Json call_external(const ExternalBackend& backend, Role role, Json request_payload) {
  const SpoolDirs spool = SpoolDirs::open(backend.spool_root);
  const std::string id = send_request(spool, role, std::move(request_payload));
  return await_response(spool, role, id, backend.timeout, backend.poll).payload;
}

}  // namespace qarouter
