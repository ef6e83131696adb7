// Copyright 2026 The qa-router Authors
// SPDX-License-Identifier: Apache-2.0

// Okapi BM25 over an inverted index of normalized passage tokens.
//
//   score(q, p) = sum over distinct t in q of
//                 idf(t) * tf * (k1 + 1) / (tf + k1 * (1 - b + b * len / avg_len))
//   idf(t) = ln(1 + (N - df + 0.5) / (df + 0.5))   with idf_floor (default)
//   idf(t) = ln((N - df + 0.5) / (df + 0.5))       classic RSJ weight
//
// Query terms count once each. Terms are summed in sorted order, so a
// passage's score does not depend on how the index was assembled.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "qarouter/ipc.hpp"
#include "qarouter/textprep.hpp"

namespace qarouter {

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
  bool idf_floor = true;
};

struct Posting {
  std::uint32_t passage = 0;  // dense index; dense order == passage id order
  std::uint32_t tf = 0;
};

struct ScoredPassage {
  std::string passage_id;
  double score = 0.0;
  std::size_t rank = 0;  // 1-based
};

struct PassageRecord {
  std::string id;
  std::string text;
};

class InvertedIndex {
 public:
  InvertedIndex() = default;

  const Bm25Params& params() const { return params_; }
  std::size_t size() const { return ids_.size(); }
  double avg_length() const;
  std::uint64_t total_length() const { return total_length_; }
  std::size_t vocabulary_size() const { return postings_.size(); }
  std::size_t posting_count() const;
  std::size_t doc_freq(std::string_view term) const;
  /// Null when the term is absent. Sorted by passage index.
  const std::vector<Posting>* postings(std::string_view term) const;
  double idf(std::string_view term) const;

  std::optional<std::size_t> find(std::string_view passage_id) const;
  const std::string& id(std::size_t i) const { return ids_[i]; }
  const std::string& text(std::size_t i) const { return texts_[i]; }
  std::size_t length(std::size_t i) const { return lengths_[i]; }

  /// Per-passage term weight for the term's df; 0 when tf == 0.
  double term_score(double idf, std::uint32_t tf, std::size_t length) const;

 private:
  friend InvertedIndex build_index(std::vector<PassageRecord> passages, const Bm25Params& params);

  Bm25Params params_;
  std::vector<std::string> ids_;
  std::vector<std::string> texts_;
  std::vector<std::size_t> lengths_;
  std::unordered_map<std::string, std::vector<Posting>> postings_;
  std::uint64_t total_length_ = 0;
};

/// Throws Error(DuplicatePassageId); std::invalid_argument for bad params.
InvertedIndex build_index(std::vector<PassageRecord> passages, const Bm25Params& params = {});
InvertedIndex build_index(std::span<const PassageSet> sets, const Bm25Params& params = {});

/// Throws Error(UnknownPassageId).
double bm25_score(const InvertedIndex& index, const TokenSeq& query, std::string_view passage_id);

/// Normalizes and tokenizes `question`, scores every passage sharing a term
/// with it and returns at most k entries ordered by (score desc, id asc).
/// Passages scoring <= 0 are dropped.
std::vector<ScoredPassage> top_k(const InvertedIndex& index, std::string_view question,
                                 std::size_t k = 5);
std::vector<ScoredPassage> top_k_tokens(const InvertedIndex& index, const TokenSeq& query,
                                        std::size_t k = 5);

/// Snapshot: {"format":"qa-router/bm25-index","version":1,"params":{...},
/// "passages":[{"id":..,"text":..}]}. Postings are rebuilt on load.
Json index_to_json(const InvertedIndex& index);
InvertedIndex index_from_json(const Json& j);
void save_index(const InvertedIndex& index, const std::filesystem::path& path);
InvertedIndex load_index(const std::filesystem::path& path);

Json index_stats(const InvertedIndex& index);

/// One {"id","doc_id","text","words"} object per line, as written by `ingest`.
std::vector<PassageRecord> load_passages_jsonl(const std::filesystem::path& path);

}  // namespace qarouter
