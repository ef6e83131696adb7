// Copyright 2026 The qa-router Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gen.hpp"
#include "qarouter/error.hpp"
#include "qarouter/reader.hpp"

using namespace qarouter;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t count_of(const std::string& haystack, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = haystack.find(needle); pos != std::string::npos;
       pos = haystack.find(needle, pos + 1)) {
    ++n;
  }
  return n;
}

InvertedIndex kb_index() {
  std::vector<PassageSet> sets;
  for (const auto& doc : load_corpus(std::filesystem::path(QAROUTER_DATA_DIR) / "kb/kb.jsonl")) {
    sets.push_back(chunk_document(doc.id, doc.text));
  }
  return build_index(std::span<const PassageSet>(sets));
}

}  // namespace

TEST_CASE("assemble_reader_input layout") {
  const auto empty = assemble_reader_input("O que causa dor nas costas?", std::vector<ReaderPassage>{});
  CHECK(render_reader_input(empty) == "o que causa dor nas costas");

  std::vector<ReaderPassage> five;
  for (std::size_t r = 5; r >= 1; --r) five.push_back({r, "p" + std::to_string(r), "texto"});
  const auto input = assemble_reader_input("pergunta", five);
  CHECK(count_of(render_reader_input(input), "[SEP]") == 5);
  CHECK(input.passages.front().rank == 1);
}

TEST_CASE("reader input golden file") {
  const auto input = assemble_reader_input(
      "O que causa dor nas costas?",
      std::vector<ReaderPassage>{
          {2, "b", "Uma fístula é uma conexão\nanormal.\tFim."},
          {1, "a", "A dor nas costas pode vir de repente e durar menos de seis semanas (aguda)."}});
  CHECK(render_reader_input(input) ==
        slurp(std::filesystem::path(QAROUTER_TEST_DIR) / "golden/reader_input.txt"));
}

TEST_CASE("assemble_reader_input from retrieval") {
  const auto index = kb_index();
  const auto hits = top_k(index, "O que causa dor nas costas?", 5);
  REQUIRE(!hits.empty());
  CHECK(hits.front().passage_id == "dor-nas-costas#0");
  const auto input = assemble_reader_input("O que causa dor nas costas?", hits, index);
  REQUIRE(input.passages.size() == hits.size());
  for (std::size_t i = 0; i < hits.size(); ++i) CHECK(input.passages[i].id == hits[i].passage_id);

  std::vector<ScoredPassage> bogus{{"nope#0", 1.0, 1}};
  CHECK_THROWS_AS(assemble_reader_input("x", bogus, index), Error);
}

TEST_CASE("overlap_f1") {
  CHECK(overlap_f1({"a", "b"}, {"a", "b"}) == 1.0);
  CHECK(overlap_f1({"a"}, {}) == 0.0);
  // common 1, precision 1/3, recall 1/2.
  CHECK(overlap_f1({"a", "b"}, {"a", "c", "d"}) == doctest::Approx(0.4));
  // Multiset: one "a" in the question matches only one "a" in the candidate.
  CHECK(overlap_f1({"a"}, {"a", "a"}) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("extractive_answer on the knowledge base") {
  const auto index = kb_index();
  const auto hits = top_k(index, "O que causa dor nas costas?", 5);
  const auto answer = read(BuiltinReader{}, assemble_reader_input("O que causa dor nas costas?", hits, index));
  CHECK(answer.text.find("queda ou levantamento") != std::string::npos);
  CHECK(answer.text.rfind("A dor nas costas pode vir de repente", 0) == 0);
  CHECK(answer.provenance == "dor-nas-costas#0");
}

TEST_CASE("extractive_answer refusals and tie-break") {
  try {
    extractive_answer(assemble_reader_input("dor", std::vector<ReaderPassage>{}));
    FAIL("expected NoAnswer");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoAnswer);
  }
  CHECK_THROWS_AS(
      extractive_answer(assemble_reader_input("dor", std::vector<ReaderPassage>{{1, "x", "febre alta."}})),
      Error);

  const auto input = assemble_reader_input(
      "febre alta", std::vector<ReaderPassage>{{2, "second", "Tosse. Febre alta."},
                                               {1, "first", "Tosse. Febre alta."}});
  const auto a = extractive_answer(input);
  CHECK(a.provenance == "first");
  CHECK(a.text == "Febre alta.");

  const auto within = extractive_answer(assemble_reader_input(
      "febre", std::vector<ReaderPassage>{{1, "p", "Febre alta. Febre baixa."}}));
  CHECK(within.text == "Febre alta.");
}

TEST_CASE("extractive_answer properties on random passages") {
  testgen::Rng rng(41);
  for (int iter = 0; iter < 300; ++iter) {
    std::vector<ReaderPassage> passages;
    const int n = rng.range(0, 5);
    for (int i = 0; i < n; ++i) {
      passages.push_back({static_cast<std::size_t>(i + 1), "p" + std::to_string(i),
                          testgen::random_document(rng, 4, 12).text});
    }
    std::string question;
    for (const auto& w : testgen::random_tokens(rng, 1, 6)) question += w + " ";
    const auto input = assemble_reader_input(question, passages);
    try {
      const auto a = extractive_answer(input);
      bool found = false;
      for (const auto& p : passages) {
        if (p.id == a.provenance) found = p.text.find(a.text) != std::string::npos;
      }
      CHECK(found);
      CHECK(a.score > 0.0);
      const auto again = extractive_answer(input);
      CHECK(again.text == a.text);
      CHECK(again.provenance == a.provenance);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NoAnswer);
      for (const auto& p : passages) {
        for (const auto& s : split_sentences(p.text)) {
          CHECK(overlap_f1(tokenize(input.question), normalized_tokens(s)) == 0.0);
        }
      }
    }
  }
}
