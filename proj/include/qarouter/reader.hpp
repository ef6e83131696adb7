// Copyright 2026 The qa-router Authors
// SPDX-License-Identifier: Apache-2.0

// Reader input assembly and the extractive sentence-selection reader.
//
// Wire layout of a ReaderInput (UTF-8, no trailing newline):
//
//   <normalized question>
//   [SEP] <passage rank 1>
//   [SEP] <passage rank 2>
//   ...
//
// Newlines, carriage returns and tabs inside passage text become spaces so
// each passage occupies exactly one line.

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "qarouter/ipc.hpp"
#include "qarouter/retriever.hpp"

namespace qarouter {

inline constexpr std::string_view kReaderSeparator = "[SEP]";

struct ReaderPassage {
  std::size_t rank = 0;  // 1-based
  std::string id;
  std::string text;
};

struct ReaderInput {
  std::string question;  // normalized
  std::vector<ReaderPassage> passages;  // rank ascending
  std::string separator{kReaderSeparator};
};

struct ReaderAnswer {
  std::string text;
  std::string provenance;  // passage id, or "external:reader"
  double score = 0.0;
};

/// Passages follow `scored` order; ids missing from the index raise
/// Error(UnknownPassageId).
ReaderInput assemble_reader_input(std::string_view question, std::span<const ScoredPassage> scored,
                                  const InvertedIndex& index);
ReaderInput assemble_reader_input(std::string_view question, std::vector<ReaderPassage> passages);

std::string render_reader_input(const ReaderInput& input);

/// Multiset token-overlap F1 between two token sequences; 0 when either is empty.
double overlap_f1(const TokenSeq& a, const TokenSeq& b);

/// Sentence with the highest overlap F1 against the question. Ties go to the
/// better-ranked passage, then the earlier sentence. Throws Error(NoAnswer).
ReaderAnswer extractive_answer(const ReaderInput& input);

struct BuiltinReader {};
using ReaderBackend = std::variant<BuiltinReader, ExternalBackend>;

ReaderAnswer read(const ReaderBackend& backend, const ReaderInput& input);

}  // namespace qarouter
