// Copyright 2026 The qa-router Authors
// SPDX-License-Identifier: Apache-2.0

// End-to-end routing: normalize, classify, then retrieve + read (factual) or
// translate + execute (sql). Every stage is timed and failures are recorded
// in the answer record instead of thrown.
//
// Config file (JSON; relative paths resolve against the file's directory):
//
//   {
//     "classifier": {"backend": "builtin", "model": "model.json"}
//                 | {"backend": "builtin", "training_data": "corpus.csv"}
//                 | {"backend": "external", "timeout_ms": 30000},
//     "reader":     {"backend": "builtin"} | {"backend": "external", "timeout_ms": 30000},
//     "nl2sql":     {"backend": "builtin", "rules": "rules.json", "synonyms": "synonyms.json"}
//                 | {"backend": "external", "timeout_ms": 30000},
//     "retrieval_k": 5,
//     "index": "index.json"  |  "corpus": "kb.jsonl",
//     "database": "hospital/",
//     "spool": "spool/",
//     "poll_ms": 100,
//     "workers": 1
//   }
//
// QA_ROUTER_SPOOL overrides "spool".

#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qarouter/classifier.hpp"
#include "qarouter/evalkit.hpp"
#include "qarouter/ipc.hpp"
#include "qarouter/sql.hpp"

namespace qarouter {

enum class BackendKind { Builtin, External };

struct BackendConfig {
  BackendKind kind = BackendKind::Builtin;
  std::chrono::milliseconds timeout{30000};
  std::filesystem::path model;          // classifier: trained model
  std::filesystem::path training_data;  // classifier: train at first use
  std::filesystem::path rules;          // nl2sql
  std::filesystem::path synonyms;       // nl2sql
};

struct RouterConfig {
  BackendConfig classifier;
  BackendConfig reader;
  BackendConfig nl2sql;
  std::size_t retrieval_k = 5;
  std::filesystem::path index;   // snapshot from `index build`
  std::filesystem::path corpus;  // or a corpus chunked and indexed at first use
  std::filesystem::path database;
  std::filesystem::path spool;
  std::chrono::milliseconds poll{100};
  std::size_t workers = 1;
};

/// Throws Error(ConfigError).
RouterConfig config_from_json(const Json& j, const std::filesystem::path& base_dir);
RouterConfig load_config(const std::filesystem::path& path);
/// Checks k >= 1 and that every referenced path exists. Throws Error(ConfigError).
void validate_config(const RouterConfig& config);

/// `flag`, then $QA_ROUTER_CONFIG, then ./qa-router.json. Throws
/// Error(ConfigError) when none exists.
std::filesystem::path discover_config(const std::optional<std::filesystem::path>& flag);

struct StageError {
  ErrorCode code = ErrorCode::IoError;
  std::string stage;
  std::string message;
};

struct AnswerRecord {
  std::string id;
  std::string question;
  std::string normalized;
  std::optional<RouteLabel> route;
  std::string answer;
  std::vector<std::string> passages;  // factual: retrieved ids, rank order
  std::string support;                // factual: passage the answer came from
  std::string sql;                    // sql: executed query
  std::optional<sql::ResultTable> result;
  std::vector<StageTiming> timings;
  double total_seconds = 0.0;
  std::optional<StageError> error;
};

Json record_to_json(const AnswerRecord& record);

struct BatchItem {
  std::string id;
  std::string question;
  std::vector<std::string> golds;
  std::optional<RouteLabel> gold_route;
};

/// JSON Lines of {"id","question","golds"?:[..],"route"?:"factual"|"sql"}.
std::vector<BatchItem> load_batch_jsonl(const std::filesystem::path& path);

class Router {
 public:
  explicit Router(RouterConfig config);
  ~Router();
  Router(const Router&) = delete;
  Router& operator=(const Router&) = delete;

  const RouterConfig& config() const { return config_; }

  /// Never throws; failures land in AnswerRecord::error.
  AnswerRecord answer(std::string_view question) const;

  /// Route-only entry point with the same backend as answer().
  RouteLabel classify(std::string_view question) const;

 private:
  struct Resources;
  RouterConfig config_;
  std::unique_ptr<Resources> resources_;
};

struct BatchReport {
  std::size_t records = 0;
  std::size_t errors = 0;
  std::optional<double> exact_match;
  std::optional<double> macro_f1;
  std::optional<ClassifierReport> routing;
  std::map<RouteLabel, RouteLatency> latency;
};

/// Order follows `items`. Throws Error(EmptyBatch).
std::vector<AnswerRecord> answer_batch(const Router& router, std::span<const BatchItem> items,
                                       std::size_t workers = 1);
BatchReport batch_report(std::span<const BatchItem> items, std::span<const AnswerRecord> records,
                         const MetricConfig& metrics = {});
Json batch_report_to_json(const BatchReport& report);

}  // namespace qarouter
