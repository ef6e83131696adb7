// Copyright 2026 The qa-router Authors
// SPDX-License-Identifier: Apache-2.0

#include "qarouter/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <thread>

#include "qarouter/error.hpp"
#include "qarouter/nl2sql.hpp"
#include "qarouter/reader.hpp"
#include "qarouter/retriever.hpp"

namespace qarouter {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void config_error(const std::string& what) {
  throw Error(ErrorCode::ConfigError, "config: " + what);
}

fs::path resolve(const fs::path& base, const Json& j, const char* key) {
  if (!j.contains(key)) return {};
  const fs::path p = j[key].get<std::string>();
  return p.is_absolute() ? p : base / p;
}

BackendConfig backend_from_json(const Json& j, const fs::path& base, const char* role) {
  BackendConfig b;
  if (j.is_null()) return b;
  if (!j.is_object()) config_error(std::string("\"") + role + "\" must be an object");
  const std::string kind = j.value("backend", std::string("builtin"));
  if (kind == "external") {
    b.kind = BackendKind::External;
  } else if (kind != "builtin") {
    config_error(std::string(role) + ": unknown backend '" + kind + "'");
  }
  b.timeout = std::chrono::milliseconds(j.value("timeout_ms", 30000));
  b.model = resolve(base, j, "model");
  b.training_data = resolve(base, j, "training_data");
  b.rules = resolve(base, j, "rules");
  b.synonyms = resolve(base, j, "synonyms");
  return b;
}

}  // namespace

RouterConfig config_from_json(const Json& j, const fs::path& base_dir) {
  RouterConfig c;
  try {
    if (!j.is_object()) config_error("expected a JSON object");
    c.classifier = backend_from_json(j.value("classifier", Json()), base_dir, "classifier");
    c.reader = backend_from_json(j.value("reader", Json()), base_dir, "reader");
    c.nl2sql = backend_from_json(j.value("nl2sql", Json()), base_dir, "nl2sql");
    const long long k = j.value("retrieval_k", 5LL);
    if (k < 1) config_error("retrieval_k must be >= 1");
    c.retrieval_k = static_cast<std::size_t>(k);
    c.index = resolve(base_dir, j, "index");
    c.corpus = resolve(base_dir, j, "corpus");
    c.database = resolve(base_dir, j, "database");
    c.spool = resolve(base_dir, j, "spool");
    c.poll = std::chrono::milliseconds(j.value("poll_ms", 100));
    const long long workers = j.value("workers", 1LL);
    if (workers < 1) config_error("workers must be >= 1");
    c.workers = static_cast<std::size_t>(workers);
  } catch (const Json::exception& e) {
    config_error(e.what());
  }
  if (const char* spool = std::getenv("QA_ROUTER_SPOOL"); spool && *spool) c.spool = spool;
  return c;
}

RouterConfig load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) config_error("cannot open " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::exception& e) {
    config_error(path.string() + ": " + e.what());
  }
  return config_from_json(j, fs::absolute(path).parent_path());
}

void validate_config(const RouterConfig& c) {
  if (c.retrieval_k < 1) config_error("retrieval_k must be >= 1");
  const auto must_exist = [](const fs::path& p, const std::string& what) {
    if (!p.empty() && !fs::exists(p)) config_error(what + " not found: " + p.string());
  };
  const bool any_external = c.classifier.kind == BackendKind::External ||
                            c.reader.kind == BackendKind::External ||
                            c.nl2sql.kind == BackendKind::External;
  if (any_external && c.spool.empty()) config_error("external backends need a \"spool\" root");
  must_exist(c.spool, "spool");
  if (c.classifier.kind == BackendKind::Builtin) {
    if (c.classifier.model.empty() && c.classifier.training_data.empty()) {
      config_error("builtin classifier needs \"model\" or \"training_data\"");
    }
    must_exist(c.classifier.model, "classifier model");
    must_exist(c.classifier.training_data, "classifier training data");
  }
  if (c.nl2sql.kind == BackendKind::Builtin) {
    must_exist(c.nl2sql.rules, "nl2sql rules");
    must_exist(c.nl2sql.synonyms, "nl2sql synonyms");
  }
  must_exist(c.index, "index");
  must_exist(c.corpus, "corpus");
  must_exist(c.database, "database");
}

fs::path discover_config(const std::optional<fs::path>& flag) {
  if (flag) {
    if (!fs::exists(*flag)) config_error("config file not found: " + flag->string());
    return *flag;
  }
  if (const char* env = std::getenv("QA_ROUTER_CONFIG"); env && *env) {
    if (!fs::exists(env)) config_error("QA_ROUTER_CONFIG points to a missing file: " + std::string(env));
    return env;
  }
  if (fs::exists("qa-router.json")) return "qa-router.json";
  config_error("no config: pass --config, set QA_ROUTER_CONFIG or create ./qa-router.json");
}

// ---------------------------------------------------------------------------

struct Router::Resources {
  std::once_flag classifier_once, index_once, db_once, nl2sql_once;
  std::optional<ClassifierBackend> classifier;
  std::shared_ptr<const InvertedIndex> index;
  std::shared_ptr<const sql::Database> db;
  std::optional<Nl2SqlBackend> nl2sql;
};

Router::Router(RouterConfig config)
    : config_(std::move(config)), resources_(std::make_unique<Resources>()) {}

Router::~Router() = default;

namespace {

ExternalBackend external(const RouterConfig& c, const BackendConfig& b) {
  if (c.spool.empty()) throw Error(ErrorCode::ConfigError, "external backend without a spool root");
  return {c.spool, b.timeout, c.poll};
}

const ClassifierBackend& classifier_backend(const RouterConfig& c, std::once_flag& once,
                                            std::optional<ClassifierBackend>& slot) {
  std::call_once(once, [&] {
    if (c.classifier.kind == BackendKind::External) {
      slot = external(c, c.classifier);
    } else if (!c.classifier.model.empty()) {
      slot = BuiltinClassifier{std::make_shared<const NaiveBayesModel>(load_model(c.classifier.model))};
    } else if (!c.classifier.training_data.empty()) {
      const auto corpus = load_training_csv(c.classifier.training_data);
      slot = BuiltinClassifier{std::make_shared<const NaiveBayesModel>(train_nb(corpus))};
    } else {
      throw Error(ErrorCode::ConfigError, "builtin classifier has no model or training data");
    }
  });
  return *slot;
}

std::string sql_answer_text(const sql::ResultTable& result) {
  std::string text = sql::format_csv(result, false);
  while (!text.empty() && text.back() == '\n') text.pop_back();
  return text;
}

}  // namespace

RouteLabel Router::classify(std::string_view question) const {
  return classify_route(
      classifier_backend(config_, resources_->classifier_once, resources_->classifier), question);
}

AnswerRecord Router::answer(std::string_view question) const {
  using Clock = std::chrono::steady_clock;
  const auto started = Clock::now();
  AnswerRecord rec;
  rec.question = std::string(question);
  Resources& res = *resources_;
  const RouterConfig& c = config_;

  const auto stage = [&](const char* name, auto&& fn) {
    const auto t0 = Clock::now();
    bool ok = true;
    try {
      fn();
    } catch (const Error& e) {
      rec.error = StageError{e.code(), e.stage().empty() ? name : e.stage(), e.what()};
      ok = false;
    } catch (const std::exception& e) {
      rec.error = StageError{ErrorCode::IoError, name, e.what()};
      ok = false;
    }
    rec.timings.push_back({name, std::chrono::duration<double>(Clock::now() - t0).count()});
    return ok;
  };
  const auto finish = [&] {
    rec.total_seconds = std::chrono::duration<double>(Clock::now() - started).count();
    return rec;
  };

  if (!stage("normalize", [&] { rec.normalized = normalize_question(question).text; })) return finish();
  if (!stage("classify", [&] { rec.route = classify(rec.normalized); })) return finish();

  if (*rec.route == RouteLabel::Factual) {
    std::vector<ScoredPassage> hits;
    const bool retrieved = stage("retrieve", [&] {
      std::call_once(res.index_once, [&] {
        if (!c.index.empty()) {
          res.index = std::make_shared<const InvertedIndex>(load_index(c.index));
        } else if (!c.corpus.empty()) {
          std::vector<PassageSet> sets;
          for (const auto& doc : load_corpus(c.corpus)) sets.push_back(chunk_document(doc.id, doc.text));
          res.index = std::make_shared<const InvertedIndex>(build_index(std::span<const PassageSet>(sets)));
        } else {
          throw Error(ErrorCode::ConfigError, "factual route needs \"index\" or \"corpus\"");
        }
      });
      hits = top_k(*res.index, rec.normalized, c.retrieval_k);
      for (const auto& h : hits) rec.passages.push_back(h.passage_id);
    });
    if (!retrieved) return finish();
    stage("read", [&] {
      const ReaderInput input = assemble_reader_input(rec.normalized, hits, *res.index);
      const ReaderBackend backend = c.reader.kind == BackendKind::External
                                        ? ReaderBackend{external(c, c.reader)}
                                        : ReaderBackend{BuiltinReader{}};
      const ReaderAnswer answer = read(backend, input);
      rec.answer = answer.text;
      rec.support = answer.provenance;
    });
    return finish();
  }

  const auto database = [&]() -> const sql::Database& {
    std::call_once(res.db_once, [&] {
      if (c.database.empty()) throw Error(ErrorCode::ConfigError, "sql route needs \"database\"");
      res.db = std::make_shared<const sql::Database>(sql::load_database(c.database));
    });
    return *res.db;
  };
  const bool translated = stage("translate", [&] {
    std::call_once(res.nl2sql_once, [&] {
      if (c.nl2sql.kind == BackendKind::External) {
        res.nl2sql = external(c, c.nl2sql);
      } else {
        res.nl2sql = BuiltinNl2Sql{std::make_shared<const RuleSet>(load_rules(c.nl2sql.rules)),
                                   std::make_shared<const SynonymTable>(load_synonyms(c.nl2sql.synonyms))};
      }
    });
    const sql::Database& db = database();
    const std::string db_id = db.schema.db_id.empty() ? c.database.filename().string() : db.schema.db_id;
    rec.sql = translate(*res.nl2sql, Nl2SqlRequest{rec.normalized, db.schema, db_id});
  });
  if (!translated) return finish();
  stage("execute", [&] {
    const sql::Database& db = database();
    const auto staged = [](const char* name, auto&& fn) {
      try {
        return fn();
      } catch (const Error& e) {
        throw e.with_stage(name);
      }
    };
    const sql::Query query = staged("parse", [&] { return sql::parse_sql(rec.sql); });
    const sql::Plan plan = staged("validate", [&] { return sql::validate(query, db.schema); });
    rec.result = staged("execute", [&] { return sql::execute(plan, db); });
    rec.answer = sql_answer_text(*rec.result);
  });
  return finish();
}

// ---------------------------------------------------------------------------

Json record_to_json(const AnswerRecord& r) {
  Json j;
  j["id"] = r.id;
  j["question"] = r.question;
  j["normalized"] = r.normalized;
  j["route"] = r.route ? Json(std::string(to_string(*r.route))) : Json(nullptr);
  j["answer"] = r.answer;
  Json provenance = Json::object();
  if (r.route == RouteLabel::Factual) {
    provenance["passages"] = r.passages;
    provenance["support"] = r.support;
  } else if (r.route == RouteLabel::Sql) {
    provenance["sql"] = r.sql;
  }
  j["provenance"] = std::move(provenance);
  if (r.result) j["result"] = sql::result_to_json(*r.result);
  Json timings = Json::object();
  for (const auto& t : r.timings) timings[t.stage] = t.seconds;
  j["timings"] = std::move(timings);
  j["total_seconds"] = r.total_seconds;
  if (r.error) {
    j["error"] = {{"code", std::string(error_code_name(r.error->code))},
                  {"stage", r.error->stage},
                  {"message", r.error->message}};
  } else {
    j["error"] = nullptr;
  }
  return j;
}

std::vector<BatchItem> load_batch_jsonl(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::vector<BatchItem> items;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const Json j = Json::parse(line);
      BatchItem item;
      item.question = j.at("question").get<std::string>();
      item.id = j.contains("id") ? j["id"].get<std::string>() : std::to_string(items.size() + 1);
      if (j.contains("golds")) item.golds = j["golds"].get<std::vector<std::string>>();
      if (j.contains("route")) item.gold_route = parse_route_label(j["route"].get<std::string>());
      items.push_back(std::move(item));
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::SerializationError,
                  path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return items;
}

std::vector<AnswerRecord> answer_batch(const Router& router, std::span<const BatchItem> items,
                                       std::size_t workers) {
  if (items.empty()) throw Error(ErrorCode::EmptyBatch, "batch has no questions");
  std::vector<AnswerRecord> records(items.size());
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < items.size();) {
      records[i] = router.answer(items[i].question);
      records[i].id = items[i].id;
    }
  };
  workers = std::clamp<std::size_t>(workers, 1, items.size());
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  return records;
}

BatchReport batch_report(std::span<const BatchItem> items, std::span<const AnswerRecord> records,
                         const MetricConfig& metrics) {
  if (items.size() != records.size()) {
    throw Error(ErrorCode::LengthMismatch, "batch report: items and records differ in length");
  }
  BatchReport report;
  report.records = records.size();
  std::vector<EvalRecord> scored;
  std::vector<EvalRecord> timed;
  std::vector<RouteLabel> predicted_routes;
  std::vector<RouteLabel> gold_routes;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    report.errors += r.error.has_value();
    EvalRecord e;
    e.id = r.id;
    e.prediction = r.answer;
    e.golds = items[i].golds;
    e.route = r.route;
    e.timings = r.timings;
    if (!e.golds.empty()) scored.push_back(e);
    timed.push_back(std::move(e));
    if (items[i].gold_route && r.route) {
      gold_routes.push_back(*items[i].gold_route);
      predicted_routes.push_back(*r.route);
    }
  }
  if (!scored.empty()) {
    report.exact_match = mean_exact_match(scored, metrics);
    report.macro_f1 = macro_avg_f1(scored, metrics);
  }
  if (!gold_routes.empty()) report.routing = classifier_report(predicted_routes, gold_routes);
  try {
    report.latency = latency_stats(timed);
  } catch (const Error&) {
    // Nothing was routed; leave the latency map empty.
  }
  return report;
}

Json batch_report_to_json(const BatchReport& report) {
  Json j;
  j["records"] = report.records;
  j["errors"] = report.errors;
  j["exact_match"] = report.exact_match ? Json(*report.exact_match) : Json(nullptr);
  j["macro_f1"] = report.macro_f1 ? Json(*report.macro_f1) : Json(nullptr);
  if (report.routing) {
    j["routing_accuracy"] = report.routing->accuracy;
    j["routing"] = classifier_report_to_json(*report.routing);
  } else {
    j["routing_accuracy"] = nullptr;
  }
  j["latency"] = latency_to_json(report.latency);
  return j;
}

}  // namespace qarouter
