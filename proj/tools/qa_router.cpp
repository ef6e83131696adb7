// Copyright 2026 The qa-router Authors
// SPDX-License-Identifier: Apache-2.0

// qa-router command line. Exit status: 0 ok, 1 domain error, 2 usage error.

#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "qarouter/classifier.hpp"
#include "qarouter/error.hpp"
#include "qarouter/evalkit.hpp"
#include "qarouter/ipc.hpp"
#include "qarouter/pipeline.hpp"
#include "qarouter/retriever.hpp"
#include "qarouter/sql.hpp"
#include "qarouter/stub_server.hpp"
#include "qarouter/textprep.hpp"

using namespace qarouter;
namespace fs = std::filesystem;

namespace {

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop = true; }

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "write failed: " + path.string());
}

RouterConfig resolve_config(const std::optional<std::string>& flag) {
  std::optional<fs::path> p;
  if (flag) p = *flag;
  RouterConfig c = load_config(discover_config(p));
  validate_config(c);
  return c;
}

void print_error(const StageError& e) {
  std::cerr << "error [" << e.stage << "] " << error_code_name(e.code) << ": " << e.message << "\n";
}

void print_record(const AnswerRecord& r, bool json) {
  if (json) {
    std::cout << record_to_json(r).dump() << "\n";
    return;
  }
  if (r.route) std::cout << "route: " << to_string(*r.route) << "\n";
  if (r.error) return;
  std::cout << "answer: " << r.answer << "\n";
  if (r.route == RouteLabel::Factual) {
    std::cout << "support: " << r.support << "\n";
    std::cout << "passages:";
    for (const auto& id : r.passages) std::cout << " " << id;
    std::cout << "\n";
  } else {
    std::cout << "sql: " << r.sql << "\n";
  }
}

// Returns the exit status for one question.
int ask_one(const Router& router, const std::string& question, bool json) {
  const AnswerRecord r = router.answer(question);
  print_record(r, json);
  if (r.error) {
    print_error(*r.error);
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Question router: factual questions go to passage retrieval and reading, "
               "database questions to SQL."};
  app.require_subcommand(1);
  std::optional<std::string> config_flag;
  app.add_option("--config", config_flag,
                 "Config file (default: $QA_ROUTER_CONFIG, then ./qa-router.json)");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Split a corpus into passages (JSON Lines)");
  std::string corpus_path, passages_out;
  std::size_t max_words = 100;
  ingest->add_option("--corpus", corpus_path, "JSON Lines corpus or directory of .txt files")->required();
  ingest->add_option("--out", passages_out, "Output passages file")->required();
  ingest->add_option("--max-words", max_words, "Passage size limit in words")->check(CLI::PositiveNumber);

  // index
  auto* index = app.add_subcommand("index", "BM25 index snapshots");
  index->require_subcommand(1);
  auto* index_build = index->add_subcommand("build", "Build an index snapshot");
  std::string index_input, index_out;
  Bm25Params params;
  index_build->add_option("--passages", index_input, "Passages from `ingest`, or a raw corpus with --chunk")
      ->required();
  bool chunk_input = false;
  index_build->add_flag("--chunk", chunk_input, "Treat --passages as a raw corpus and chunk it first");
  index_build->add_option("--out", index_out, "Snapshot path")->required();
  index_build->add_option("--k1", params.k1, "BM25 k1");
  index_build->add_option("--b", params.b, "BM25 b");
  auto* index_stats_cmd = index->add_subcommand("stats", "Print snapshot statistics");
  std::string index_path;
  index_stats_cmd->add_option("--index", index_path, "Snapshot path")->required();

  // classifier
  auto* train = app.add_subcommand("train-classifier", "Train the naive Bayes router");
  std::string train_data, model_out;
  double alpha = 1.0;
  train->add_option("--data", train_data, "CSV with header question,label,source")->required();
  train->add_option("--out", model_out, "Model file")->required();
  train->add_option("--alpha", alpha, "Laplace smoothing")->check(CLI::PositiveNumber);

  auto* crossval = app.add_subcommand("crossval", "Stratified k-fold evaluation of the router");
  std::string cv_data;
  std::size_t cv_k = 10;
  std::uint64_t cv_seed = 7;
  crossval->add_option("--data", cv_data, "CSV with header question,label,source")->required();
  crossval->add_option("--k", cv_k, "Number of folds");
  crossval->add_option("--seed", cv_seed, "Shuffle seed");
  crossval->add_option("--alpha", alpha, "Laplace smoothing")->check(CLI::PositiveNumber);

  // ask / eval
  auto* ask = app.add_subcommand("ask", "Answer one question, or read questions from stdin");
  std::optional<std::string> question;
  bool ask_json = false;
  ask->add_option("question", question, "Question text; omit for interactive mode");
  ask->add_flag("--json", ask_json, "Print the answer record as JSON");

  auto* eval = app.add_subcommand("eval", "Answer a JSON Lines batch and report metrics");
  std::string eval_input;
  std::optional<std::string> records_out;
  bool strip_articles = true;
  std::optional<std::size_t> eval_workers;
  eval->add_option("--input", eval_input, "JSON Lines of {id, question, golds, route?}")->required();
  eval->add_option("--records", records_out, "Also write answer records (JSON Lines)");
  eval->add_flag("--strip-articles,!--no-strip-articles", strip_articles,
                 "Drop Portuguese articles before scoring (default on)");
  eval->add_option("--workers", eval_workers, "Parallel questions (default from config)")
      ->check(CLI::PositiveNumber);

  // sql
  auto* sqlcmd = app.add_subcommand("sql", "Run a query against a CSV database");
  std::string db_dir, query_text;
  bool with_header = false, sql_json = false;
  sqlcmd->add_option("--db", db_dir, "Directory with schema.json and one CSV per table")->required();
  sqlcmd->add_option("--query", query_text, "SQL text")->required();
  sqlcmd->add_flag("--header", with_header, "Print the header row");
  sqlcmd->add_flag("--json", sql_json, "Print the result as JSON");

  // spool / stub
  auto* spool_init = app.add_subcommand("spool-init", "Create the exchange directories");
  std::optional<std::string> spool_flag;
  spool_init->add_option("--spool", spool_flag, "Spool root (default: from config)");

  auto* stub = app.add_subcommand("serve-stub", "Serve a role from a fixed behaviour file");
  std::string stub_role, behavior_path, consumer_id = "stub";
  long long poll_ms = 100, stale_ms = 300000;
  std::optional<std::size_t> max_messages;
  std::optional<long long> idle_exit_ms;
  stub->add_option("--spool", spool_flag, "Spool root (default: from config)");
  stub->add_option("--role", stub_role, "classifier, reader or nl2sql")
      ->required()
      ->check(CLI::IsMember({"classifier", "reader", "nl2sql"}));
  stub->add_option("--behavior", behavior_path, "Behaviour JSON")->required()->check(CLI::ExistingFile);
  stub->add_option("--consumer-id", consumer_id, "Claim suffix for this process");
  stub->add_option("--poll-ms", poll_ms, "Inbox poll interval")->check(CLI::PositiveNumber);
  stub->add_option("--stale-ms", stale_ms, "Re-queue claims older than this")->check(CLI::NonNegativeNumber);
  stub->add_option("--max-messages", max_messages, "Exit after this many requests");
  stub->add_option("--idle-exit-ms", idle_exit_ms, "Exit after this long without requests");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  const auto spool_root = [&]() -> fs::path {
    if (spool_flag) return *spool_flag;
    if (const char* env = std::getenv("QA_ROUTER_SPOOL"); env && *env) return env;
    const RouterConfig c = resolve_config(config_flag);
    if (c.spool.empty()) throw UsageError("no spool root: pass --spool or set \"spool\" in the config");
    return c.spool;
  };

  try {
    if (*ingest) {
      std::string out;
      std::size_t docs = 0, passages = 0;
      for (const Document& doc : load_corpus(corpus_path)) {
        ++docs;
        for (const Passage& p : chunk_document(doc.id, doc.text, max_words).passages) {
          ++passages;
          Json j;
          j["id"] = p.id;
          j["doc_id"] = doc.id;
          j["text"] = p.text;
          j["words"] = p.word_count;
          out += j.dump() + "\n";
        }
      }
      write_text(passages_out, out);
      std::cerr << "ingested " << docs << " documents into " << passages << " passages\n";
    } else if (*index_build) {
      InvertedIndex idx;
      if (chunk_input) {
        std::vector<PassageSet> sets;
        for (const Document& doc : load_corpus(index_input)) sets.push_back(chunk_document(doc.id, doc.text));
        idx = build_index(std::span<const PassageSet>(sets), params);
      } else {
        idx = build_index(load_passages_jsonl(index_input), params);
      }
      save_index(idx, index_out);
      std::cout << index_stats(idx).dump(2) << "\n";
    } else if (*index_stats_cmd) {
      std::cout << index_stats(load_index(index_path)).dump(2) << "\n";
    } else if (*train) {
      const auto corpus = load_training_csv(train_data);
      save_model(train_nb(corpus, alpha), model_out);
      std::cerr << "trained on " << corpus.size() << " questions\n";
    } else if (*crossval) {
      const auto corpus = load_training_csv(cv_data);
      const auto report = cross_validate(corpus, cv_k, cv_seed, alpha);
      std::cout << report_to_json(report).dump(2) << "\n";
    } else if (*ask) {
      const Router router(resolve_config(config_flag));
      if (question) return ask_one(router, *question, ask_json);
      std::string line;
      while (std::getline(std::cin, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        ask_one(router, line, ask_json);
        if (!ask_json) std::cout << "\n";
        std::cout.flush();
      }
    } else if (*eval) {
      const RouterConfig config = resolve_config(config_flag);
      const Router router(config);
      const auto items = load_batch_jsonl(eval_input);
      const auto records = answer_batch(router, items, eval_workers.value_or(config.workers));
      if (records_out) {
        std::string out;
        for (const auto& r : records) out += record_to_json(r).dump() + "\n";
        write_text(*records_out, out);
      }
      MetricConfig metrics;
      metrics.strip_articles = strip_articles;
      std::cout << batch_report_to_json(batch_report(items, records, metrics)).dump(2) << "\n";
    } else if (*sqlcmd) {
      const auto staged = [](const char* stage, auto&& fn) {
        try {
          return fn();
        } catch (const Error& e) {
          throw e.with_stage(stage);
        }
      };
      const sql::Database db = staged("load", [&] { return sql::load_database(db_dir); });
      const sql::Query q = staged("parse", [&] { return sql::parse_sql(query_text); });
      const sql::Plan plan = staged("validate", [&] { return sql::validate(q, db.schema); });
      const sql::ResultTable result = staged("execute", [&] { return sql::execute(plan, db); });
      if (sql_json) {
        std::cout << sql::result_to_json(result).dump() << "\n";
      } else {
        std::cout << sql::format_csv(result, with_header);
      }
    } else if (*spool_init) {
      const fs::path root = spool_root();
      SpoolDirs::initialize(root);
      std::cerr << "spool ready at " << root.string() << "\n";
    } else if (*stub) {
      const SpoolDirs spool = SpoolDirs::open(spool_root());
      StubServerOptions opt;
      opt.consumer_id = consumer_id;
      opt.poll = std::chrono::milliseconds(poll_ms);
      opt.stale_after = std::chrono::milliseconds(stale_ms);
      opt.max_messages = max_messages;
      if (idle_exit_ms) opt.idle_exit = std::chrono::milliseconds(*idle_exit_ms);
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      const std::size_t handled =
          serve_stub(spool, parse_role(stub_role), StubBehavior::load(behavior_path), opt, &g_stop);
      std::cerr << "handled " << handled << " requests\n";
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error [" << (e.stage().empty() ? app.get_subcommands().front()->get_name() : e.stage())
              << "] " << error_code_name(e.code()) << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
