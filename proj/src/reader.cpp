// Copyright 2026 The qa-router Authors
// SPDX-License-Identifier: Apache-2.0

#include "qarouter/reader.hpp"

#include <algorithm>
#include <unordered_map>

#include "qarouter/error.hpp"
#include "qarouter/textprep.hpp"

namespace qarouter {

ReaderInput assemble_reader_input(std::string_view question, std::vector<ReaderPassage> passages) {
  ReaderInput input;
  input.question = normalize_text(question).text;
  std::stable_sort(passages.begin(), passages.end(),
                   [](const ReaderPassage& a, const ReaderPassage& b) { return a.rank < b.rank; });
  input.passages = std::move(passages);
  return input;
}

ReaderInput assemble_reader_input(std::string_view question, std::span<const ScoredPassage> scored,
                                  const InvertedIndex& index) {
  std::vector<ReaderPassage> passages;
  passages.reserve(scored.size());
  for (std::size_t i = 0; i < scored.size(); ++i) {
    const auto slot = index.find(scored[i].passage_id);
    if (!slot) {
      throw Error(ErrorCode::UnknownPassageId, "unknown passage id: " + scored[i].passage_id);
    }
    const std::size_t rank = scored[i].rank != 0 ? scored[i].rank : i + 1;
    passages.push_back({rank, scored[i].passage_id, index.text(*slot)});
  }
  return assemble_reader_input(question, std::move(passages));
}

std::string render_reader_input(const ReaderInput& input) {
  std::string out = input.question;
  for (const auto& p : input.passages) {
    out += '\n';
    out += input.separator;
    out += ' ';
    for (char c : p.text) out += (c == '\n' || c == '\r' || c == '\t') ? ' ' : c;
  }
  return out;
}

double overlap_f1(const TokenSeq& a, const TokenSeq& b) {
  if (a.empty() || b.empty()) return 0.0;
  std::unordered_map<std::string_view, int> counts;
  for (const auto& t : a) ++counts[t];
  std::size_t common = 0;
  for (const auto& t : b) {
    auto it = counts.find(t);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++common;
    }
  }
  if (common == 0) return 0.0;
  const double precision = static_cast<double>(common) / static_cast<double>(b.size());
  const double recall = static_cast<double>(common) / static_cast<double>(a.size());
  return 2.0 * precision * recall / (precision + recall);
}

ReaderAnswer extractive_answer(const ReaderInput& input) {
  const TokenSeq question = tokenize(input.question);
  ReaderAnswer best;
  for (const auto& passage : input.passages) {
    for (const TextSpan& s : sentence_spans(passage.text)) {
      const std::string_view sentence =
          std::string_view(passage.text).substr(s.begin, s.end - s.begin);
      const double f1 = overlap_f1(question, normalized_tokens(sentence));
      // Strict improvement only: earlier rank and earlier sentence win ties.
      if (f1 > best.score) {
        best.score = f1;
        best.text = std::string(sentence);
        best.provenance = passage.id;
      }
    }
  }
  if (best.score <= 0.0) {
    throw Error(ErrorCode::NoAnswer, "no passage shares a token with the question", "read");
  }
  return best;
}

ReaderAnswer read(const ReaderBackend& backend, const ReaderInput& input) {
  if (std::holds_alternative<BuiltinReader>(backend)) return extractive_answer(input);
  Json request;
  request["input"] = render_reader_input(input);
  const Json response = call_external(std::get<ExternalBackend>(backend), Role::Reader,
                                      std::move(request));
  ReaderAnswer answer;
  answer.text = response.at("answer").get<std::string>();
  answer.score = response.at("score").get<double>();
  answer.provenance = "external:reader";
  if (answer.text.empty()) throw Error(ErrorCode::NoAnswer, "reader backend returned no answer", "read");
  return answer;
}

}  // namespace qarouter
