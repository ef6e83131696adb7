// Copyright 2026 The qa-router Authors
// SPDX-License-Identifier: Apache-2.0

// Text normalization, tokenization and sentence-respecting passage chunking.
// One normalizer is shared by the classifier, the retriever and the reader.

#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace qarouter {

/// Lowercased text holding only letters, digits, single spaces and hyphens or
/// apostrophes between two word characters.
struct NormalizedText {
  std::string text;
  /// Rules that changed the input, in the order they ran.
  std::vector<std::string> applied_rules;
};

using TokenSeq = std::vector<std::string>;

struct Passage {
  std::string id;
  std::size_t first_word = 0;  // index into the document's word sequence
  std::size_t word_count = 0;
  std::string text;            // raw substring of the document
};

struct PassageSet {
  std::string doc_id;
  std::vector<Passage> passages;
  std::size_t max_words = 100;
};

struct Document {
  std::string id;
  std::string text;
};

struct TextSpan {
  std::size_t begin = 0;  // byte offsets
  std::size_t end = 0;
};

/// Normalization without the emptiness check; used for passages and metrics.
NormalizedText normalize_text(std::string_view raw);

/// Throws Error(UnanswerableInput) when nothing survives normalization.
NormalizedText normalize_question(std::string_view raw);

TokenSeq tokenize(std::string_view normalized);

/// Normalize + tokenize, never throws.
TokenSeq normalized_tokens(std::string_view raw);

/// Whitespace-delimited words of raw text (the unit of the passage limit).
std::vector<std::string> split_words(std::string_view raw);
std::vector<TextSpan> word_spans(std::string_view raw);

/// Splits after `.`, `?`, `!` or `…` followed by whitespace or end of text.
/// Not abbreviation-aware: "Dr. Silva" splits after "Dr.".
std::vector<std::string> split_sentences(std::string_view raw);
std::vector<TextSpan> sentence_spans(std::string_view raw);

/// Greedy packing of whole sentences into passages of at most `max_words`
/// words; a sentence longer than the limit is hard-split and its tail keeps
/// filling the next passage. Passage ids are `<doc_id>#<n>`.
PassageSet chunk_document(std::string doc_id, std::string_view raw,
                          std::size_t max_words = 100);

/// Reads a JSON Lines corpus ({"id","text"} per line) or a directory of
/// *.txt files (id = file stem, sorted by name).
std::vector<Document> load_corpus(const std::filesystem::path& path);

}  // namespace qarouter
