// Copyright 2026 The qa-router Authors
// SPDX-License-Identifier: Apache-2.0

#include "qarouter/retriever.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>

#include "qarouter/error.hpp"

namespace qarouter {
namespace {

constexpr const char* kIndexFormat = "qa-router/bm25-index";
constexpr int kIndexVersion = 1;

TokenSeq distinct_sorted(TokenSeq terms) {
  std::sort(terms.begin(), terms.end());
  terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
  return terms;
}

void check_params(const Bm25Params& p) {
  if (!(p.k1 >= 0.0) || !std::isfinite(p.k1)) throw std::invalid_argument("k1 must be >= 0");
  if (!(p.b >= 0.0 && p.b <= 1.0)) throw std::invalid_argument("b must lie in [0, 1]");
}

}  // namespace

std::size_t InvertedIndex::posting_count() const {
  std::size_t n = 0;
  for (const auto& [term, list] : postings_) n += list.size();
  return n;
}

double InvertedIndex::avg_length() const {
  return ids_.empty() ? 0.0
                      : static_cast<double>(total_length_) / static_cast<double>(ids_.size());
}

std::size_t InvertedIndex::doc_freq(std::string_view term) const {
  const auto* list = postings(term);
  return list ? list->size() : 0;
}

const std::vector<Posting>* InvertedIndex::postings(std::string_view term) const {
  const auto it = postings_.find(std::string(term));
  return it == postings_.end() ? nullptr : &it->second;
}

double InvertedIndex::idf(std::string_view term) const {
  const double n = static_cast<double>(ids_.size());
  const double df = static_cast<double>(doc_freq(term));
  const double ratio = (n - df + 0.5) / (df + 0.5);
  return params_.idf_floor ? std::log(1.0 + ratio) : std::log(ratio);
}

std::optional<std::size_t> InvertedIndex::find(std::string_view passage_id) const {
  const auto it = std::lower_bound(ids_.begin(), ids_.end(), passage_id);
  if (it == ids_.end() || *it != passage_id) return std::nullopt;
  return static_cast<std::size_t>(it - ids_.begin());
}

double InvertedIndex::term_score(double idf, std::uint32_t tf, std::size_t length) const {
  if (tf == 0) return 0.0;
  const double f = static_cast<double>(tf);
  const double norm = 1.0 - params_.b + params_.b * static_cast<double>(length) / avg_length();
  return idf * f * (params_.k1 + 1.0) / (f + params_.k1 * norm);
}

InvertedIndex build_index(std::vector<PassageRecord> passages, const Bm25Params& params) {
  check_params(params);
  std::sort(passages.begin(), passages.end(),
            [](const PassageRecord& a, const PassageRecord& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < passages.size(); ++i) {
    if (passages[i].id == passages[i - 1].id) {
      throw Error(ErrorCode::DuplicatePassageId, "duplicate passage id '" + passages[i].id + "'");
    }
  }

  InvertedIndex index;
  index.params_ = params;
  index.ids_.reserve(passages.size());
  index.texts_.reserve(passages.size());
  index.lengths_.reserve(passages.size());
  for (std::size_t i = 0; i < passages.size(); ++i) {
    const TokenSeq tokens = normalized_tokens(passages[i].text);
    std::map<std::string, std::uint32_t> tf;
    for (const auto& t : tokens) ++tf[t];
    for (const auto& [term, count] : tf) {
      index.postings_[term].push_back({static_cast<std::uint32_t>(i), count});
    }
    index.ids_.push_back(std::move(passages[i].id));
    index.texts_.push_back(std::move(passages[i].text));
    index.lengths_.push_back(tokens.size());
    index.total_length_ += tokens.size();
  }
  return index;
}

InvertedIndex build_index(std::span<const PassageSet> sets, const Bm25Params& params) {
  std::vector<PassageRecord> records;
  for (const auto& set : sets) {
    for (const auto& p : set.passages) records.push_back({p.id, p.text});
  }
  return build_index(std::move(records), params);
}

double bm25_score(const InvertedIndex& index, const TokenSeq& query, std::string_view passage_id) {
  const auto target = index.find(passage_id);
  if (!target) {
    throw Error(ErrorCode::UnknownPassageId, "unknown passage id '" + std::string(passage_id) + "'");
  }
  double score = 0.0;
  for (const auto& term : distinct_sorted(query)) {
    const auto* list = index.postings(term);
    if (!list) continue;
    const auto it = std::lower_bound(
        list->begin(), list->end(), *target,
        [](const Posting& p, std::size_t passage) { return p.passage < passage; });
    if (it == list->end() || it->passage != *target) continue;
    score += index.term_score(index.idf(term), it->tf, index.length(*target));
  }
  return score;
}

std::vector<ScoredPassage> top_k_tokens(const InvertedIndex& index, const TokenSeq& query,
                                        std::size_t k) {
  if (k == 0) throw std::invalid_argument("k must be >= 1");
  std::vector<double> scores(index.size(), 0.0);
  std::vector<std::uint32_t> touched;
  for (const auto& term : distinct_sorted(query)) {
    const auto* list = index.postings(term);
    if (!list) continue;
    const double idf = index.idf(term);
    for (const Posting& p : *list) {
      if (scores[p.passage] == 0.0) touched.push_back(p.passage);
      scores[p.passage] += index.term_score(idf, p.tf, index.length(p.passage));
    }
  }
  std::sort(touched.begin(), touched.end());
  touched.erase(std::unique(touched.begin(), touched.end()), touched.end());

  std::vector<std::uint32_t> hits;
  for (auto i : touched) {
    if (scores[i] > 0.0) hits.push_back(i);
  }
  auto better = [&](std::uint32_t a, std::uint32_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  };
  const std::size_t n = std::min(k, hits.size());
  std::partial_sort(hits.begin(), hits.begin() + static_cast<long>(n), hits.end(), better);

  std::vector<ScoredPassage> out;
  out.reserve(n);
  for (std::size_t r = 0; r < n; ++r) {
    out.push_back({index.id(hits[r]), scores[hits[r]], r + 1});
  }
  return out;
}

std::vector<ScoredPassage> top_k(const InvertedIndex& index, std::string_view question,
                                 std::size_t k) {
  return top_k_tokens(index, normalized_tokens(question), k);
}

Json index_to_json(const InvertedIndex& index) {
  Json j;
  j["format"] = kIndexFormat;
  j["version"] = kIndexVersion;
  j["params"] = {{"k1", index.params().k1}, {"b", index.params().b},
                 {"idf_floor", index.params().idf_floor}};
  j["passages"] = Json::array();
  for (std::size_t i = 0; i < index.size(); ++i) {
    j["passages"].push_back({{"id", index.id(i)}, {"text", index.text(i)}});
  }
  return j;
}

InvertedIndex index_from_json(const Json& j) {
  try {
    if (j.at("format").get<std::string>() != kIndexFormat ||
        j.at("version").get<int>() != kIndexVersion) {
      throw Error(ErrorCode::SerializationError, "unsupported index format/version");
    }
    Bm25Params params;
    params.k1 = j.at("params").at("k1").get<double>();
    params.b = j.at("params").at("b").get<double>();
    params.idf_floor = j.at("params").at("idf_floor").get<bool>();
    std::vector<PassageRecord> passages;
    for (const auto& p : j.at("passages")) {
      passages.push_back({p.at("id").get<std::string>(), p.at("text").get<std::string>()});
    }
    return build_index(std::move(passages), params);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SerializationError, std::string("bad index snapshot: ") + e.what());
  }
}

void save_index(const InvertedIndex& index, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << index_to_json(index).dump() << '\n';
}

InvertedIndex load_index(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open index " + path.string());
  try {
    return index_from_json(Json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SerializationError, path.string() + ": " + e.what());
  }
}

Json index_stats(const InvertedIndex& index) {
  Json j;
  j["passages"] = index.size();
  j["vocabulary"] = index.vocabulary_size();
  j["postings"] = index.posting_count();
  j["total_length"] = index.total_length();
  j["avg_length"] = index.avg_length();
  j["params"] = {{"k1", index.params().k1}, {"b", index.params().b},
                 {"idf_floor", index.params().idf_floor}};
  return j;
}

std::vector<PassageRecord> load_passages_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open passages " + path.string());
  std::vector<PassageRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = Json::parse(line);
      out.push_back({j.at("id").get<std::string>(), j.at("text").get<std::string>()});
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::SerializationError,
                  path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace qarouter
