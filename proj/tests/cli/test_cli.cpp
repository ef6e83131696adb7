// Copyright 2026 The qa-router Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>

#include "qarouter/ipc.hpp"
#include "tempdir.hpp"

using namespace qarouter;
using namespace std::chrono_literals;
namespace fs = std::filesystem;

namespace {

const fs::path kData = QAROUTER_DATA_DIR;

struct Result {
  int status = -1;
  std::string out;
  std::string err;
};

std::string quote(const std::string& s) {
  std::string q = "'";
  for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return q + "'";
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Runs the CLI as `cd <cwd> && <prefix> qa-router <args>`.
Result run_in(const std::string& cwd, const std::string& prefix, const std::string& args,
              const std::string& stdin_text = {}) {
  static int n = 0;
  const fs::path dir = fs::temp_directory_path();
  const std::string tag = std::to_string(::getpid()) + "-" + std::to_string(n++);
  const fs::path err = dir / ("qa-cli-err-" + tag);
  const fs::path in = dir / ("qa-cli-in-" + tag);
  std::ofstream(in) << stdin_text;
  std::string cmd = quote(QAROUTER_CLI) + " " + args + " <" + quote(in.string()) + " 2>" +
                          quote(err.string());
  if (!prefix.empty()) cmd = prefix + " " + cmd;
  if (!cwd.empty()) cmd = "cd " + quote(cwd) + " && " + cmd;
  Result r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  for (std::size_t got; (got = std::fread(buf, 1, sizeof buf, pipe)) > 0;) r.out.append(buf, got);
  const int status = ::pclose(pipe);
  r.status = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = slurp(err);
  fs::remove(err);
  fs::remove(in);
  return r;
}

Result run(const std::string& args, const std::string& stdin_text = {}) {
  return run_in({}, {}, args, stdin_text);
}

const std::string kConfig = "--config " + quote((kData / "smoke" / "qa-router.json").string());

}  // namespace

TEST_CASE("sql prints the result as CSV") {
  const Result r = run("sql --db " + quote((kData / "hospital").string()) +
                       " --query 'SELECT COUNT(*) FROM Procedures'");
  CHECK(r.status == 0);
  CHECK(r.out == "3\n");

  const Result h = run("sql --db " + quote((kData / "hospital").string()) +
                       " --header --query 'SELECT Procedures.Name FROM Procedures ORDER BY "
                       "Procedures.Cost Asc LIMIT 1'");
  CHECK(h.status == 0);
  CHECK(h.out == "Name\nCurativo\n");
}

TEST_CASE("exit codes") {
  const std::string db = "--db " + quote((kData / "hospital").string());
  const Result syntax = run("sql " + db + " --query 'SELEKT x'");
  CHECK(syntax.status == 1);
  CHECK(syntax.err.find("[parse] SyntaxError") != std::string::npos);

  const Result unknown = run("sql " + db + " --query 'SELECT a FROM Nope'");
  CHECK(unknown.status == 1);
  CHECK(unknown.err.find("[validate] UnknownTable") != std::string::npos);

  CHECK(run("sql --query x").status == 2);
  CHECK(run("nonsense").status == 2);
  CHECK(run("").status == 2);
  CHECK(run("sql " + db + " --query x --frobnicate").status == 2);
  for (const char* cmd : {"", "ingest", "index", "index build", "index stats", "train-classifier",
                          "crossval", "ask", "eval", "sql", "spool-init", "serve-stub"}) {
    CAPTURE(cmd);
    const Result help = run(std::string(cmd) + " --help");
    CHECK(help.status == 0);
    CHECK(help.out.find("--help") != std::string::npos);
  }
}

TEST_CASE("ask one-shot and interactive") {
  const Result r = run(kConfig + " ask 'O que é fístula?'");
  CHECK(r.status == 0);
  CHECK(r.out.find("route: factual\n") != std::string::npos);
  CHECK(r.out.find("answer: Uma fístula é uma conexão anormal") != std::string::npos);
  CHECK(r.out.find("support: fistula#0") != std::string::npos);

  const Result bad = run(kConfig + " ask '?!'");
  CHECK(bad.status == 1);
  CHECK(bad.err.find("[normalize] UnanswerableInput") != std::string::npos);

  const Result repl = run(kConfig + " ask", "Quantos pacientes existem?\n\n?!\nO que causa dor nas costas?\n");
  CHECK(repl.status == 0);
  CHECK(repl.out.find("route: sql\nanswer: 3\nsql: SELECT COUNT(*) FROM Patients\n") != std::string::npos);
  CHECK(repl.out.find("queda ou levantamento pesado") != std::string::npos);
  CHECK(repl.err.find("UnanswerableInput") != std::string::npos);

  const Result json = run(kConfig + " ask --json 'Quantos pacientes existem?'");
  CHECK(json.status == 0);
  const Json j = Json::parse(json.out);
  CHECK(j["route"] == "sql");
  CHECK(j["answer"] == "3");
}

TEST_CASE("config discovery through the environment") {
  const std::string cfg = (kData / "smoke" / "qa-router.json").string();
  const Result with_env = run_in("/", "env QA_ROUTER_CONFIG=" + quote(cfg), "ask 'Quantos pacientes existem?'");
  CHECK(with_env.status == 0);
  CHECK(with_env.out.find("answer: 3") != std::string::npos);

  const Result none = run_in("/", "env -u QA_ROUTER_CONFIG", "ask x");
  CHECK(none.status == 1);
  CHECK(none.err.find("ConfigError") != std::string::npos);
}

TEST_CASE("crossval is deterministic") {
  const std::string args =
      "crossval --data " + quote((kData / "classifier" / "mini_corpus.csv").string()) + " --k 10 --seed 7";
  const Result a = run(args);
  const Result b = run(args);
  CHECK(a.status == 0);
  CHECK(a.out == b.out);
  const Json j = Json::parse(a.out);
  CHECK(j["k"] == 10);
  CHECK(j["mean_f1"].get<double>() >= 0.90);
}

TEST_CASE("ingest, index, train, then answer from the artifacts") {
  qarouter::testing::TempDir tmp("cli");
  const fs::path passages = tmp.path() / "passages.jsonl";
  const fs::path index = tmp.path() / "index.json";
  const fs::path model = tmp.path() / "model.json";

  const Result ing = run("ingest --corpus " + quote((kData / "kb" / "kb.jsonl").string()) + " --out " +
                         quote(passages.string()));
  REQUIRE(ing.status == 0);
  std::ifstream lines(passages);
  std::string first;
  std::getline(lines, first);
  const Json p = Json::parse(first);
  CHECK(p["id"] == "dor-nas-costas#0");
  CHECK(p["doc_id"] == "dor-nas-costas");
  CHECK(p["words"].get<int>() <= 100);

  const Result build = run("index build --passages " + quote(passages.string()) + " --out " +
                           quote(index.string()));
  REQUIRE(build.status == 0);
  const Result stats = run("index stats --index " + quote(index.string()));
  REQUIRE(stats.status == 0);
  CHECK(Json::parse(stats.out) == Json::parse(build.out));

  const Result chunked = run("index build --chunk --passages " + quote((kData / "kb" / "kb.jsonl").string()) +
                             " --out " + quote((tmp.path() / "index2.json").string()));
  REQUIRE(chunked.status == 0);
  CHECK(slurp(index) == slurp(tmp.path() / "index2.json"));

  const Result train = run("train-classifier --data " +
                           quote((kData / "classifier" / "mini_corpus.csv").string()) + " --out " +
                           quote(model.string()));
  REQUIRE(train.status == 0);
  CHECK(fs::file_size(model) > 0);

  const fs::path config = tmp.path() / "qa-router.json";
  Json c;
  c["classifier"] = {{"backend", "builtin"}, {"model", "model.json"}};
  c["nl2sql"] = {{"backend", "builtin"},
                 {"rules", (kData / "nl2sql" / "rules.json").string()},
                 {"synonyms", (kData / "nl2sql" / "synonyms.json").string()}};
  c["index"] = "index.json";
  c["database"] = (kData / "hospital").string();
  std::ofstream(config) << c.dump();
  const Result ask = run("--config " + quote(config.string()) + " ask 'O que causa dor nas costas?'");
  CHECK(ask.status == 0);
  CHECK(ask.out.find("queda ou levantamento pesado") != std::string::npos);
}

TEST_CASE("eval reports metrics") {
  qarouter::testing::TempDir tmp("cli");
  const fs::path records = tmp.path() / "records.jsonl";
  const std::string input = quote((kData / "smoke" / "questions.jsonl").string());
  const Result r = run(kConfig + " eval --input " + input + " --records " + quote(records.string()));
  REQUIRE(r.status == 0);
  const Json j = Json::parse(r.out);
  CHECK(j["records"] == 20);
  CHECK(j["errors"] == 0);
  CHECK(j["routing_accuracy"] == 1.0);
  std::ifstream in(records);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  CHECK(n == 20);

  const Result off = run(kConfig + " eval --no-strip-articles --input " + input);
  REQUIRE(off.status == 0);
  CHECK(Json::parse(off.out)["macro_f1"].get<double>() <= j["macro_f1"].get<double>());
}

TEST_CASE("spool-init and serve-stub") {
  qarouter::testing::TempDir tmp("cli");
  const fs::path root = tmp.path() / "spool";
  REQUIRE(run("spool-init --spool " + quote(root.string())).status == 0);
  const SpoolDirs spool = SpoolDirs::open(root);
  std::vector<std::string> ids;
  for (const char* q : {"quantos pacientes", "o que é asma", "liste os médicos"}) {
    ids.push_back(send_request(spool, Role::Classifier, {{"question", q}}));
  }
  const Result stub = run("serve-stub --spool " + quote(root.string()) + " --role classifier --behavior " +
                          quote((kData / "stubs" / "classifier_keywords.json").string()) +
                          " --poll-ms 5 --idle-exit-ms 200");
  CHECK(stub.status == 0);
  CHECK(stub.err.find("handled 3") != std::string::npos);
  CHECK(await_response(spool, Role::Classifier, ids[0], 100ms, 5ms).payload["label"] == "sql");
  CHECK(await_response(spool, Role::Classifier, ids[1], 100ms, 5ms).payload["label"] == "factual");
  CHECK(await_response(spool, Role::Classifier, ids[2], 100ms, 5ms).payload["label"] == "sql");

  CHECK(run("serve-stub --spool " + quote((tmp.path() / "missing").string()) +
            " --role reader --behavior " + quote((kData / "stubs" / "reader_echo.json").string()))
            .status == 1);
  CHECK(run("serve-stub --spool x --role oracle --behavior " +
            quote((kData / "stubs" / "reader_echo.json").string()))
            .status == 2);
}
