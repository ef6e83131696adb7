// Copyright 2026 The qa-router Authors
// SPDX-License-Identifier: Apache-2.0

#include "qarouter/textprep.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "qarouter/error.hpp"
#include "utf8.hpp"

namespace qarouter {
namespace {

bool is_sentence_final(char32_t cp) {
  return cp == U'?' || cp == U'!' || cp == U'.' || cp == 0x2026;
}

bool is_joiner(char32_t cp) {
  return cp == U'-' || cp == U'\'' || cp == 0x2019;
}

std::vector<char32_t> decode(std::string_view s) {
  std::vector<char32_t> out;
  out.reserve(s.size());
  std::size_t pos = 0;
  while (pos < s.size()) out.push_back(utf8::next(s, pos));
  return out;
}

std::string encode(const std::vector<char32_t>& cps) {
  std::string out;
  out.reserve(cps.size());
  for (char32_t cp : cps) utf8::append(out, cp);
  return out;
}

}  // namespace

NormalizedText normalize_text(std::string_view raw) {
  NormalizedText result;
  std::vector<char32_t> cps = decode(raw);

  bool changed = false;
  for (char32_t& cp : cps) {
    const char32_t lowered = utf8::to_lower(cp);
    changed |= lowered != cp;
    cp = lowered;
  }
  if (changed) result.applied_rules.emplace_back("lowercase");

  // Trailing sentence-final punctuation, possibly repeated ("?!", "...").
  std::size_t end = cps.size();
  std::size_t kept = end;
  while (end > 0 && (utf8::is_space(cps[end - 1]) || is_sentence_final(cps[end - 1]))) {
    if (is_sentence_final(cps[end - 1])) kept = end - 1;
    --end;
  }
  if (kept < cps.size()) {
    cps.resize(kept);
    result.applied_rules.emplace_back("strip_final_punctuation");
  }

  std::vector<char32_t> filtered;
  filtered.reserve(cps.size());
  changed = false;
  for (std::size_t i = 0; i < cps.size(); ++i) {
    const char32_t cp = cps[i];
    if (utf8::is_word_char(cp)) {
      filtered.push_back(cp);
    } else if (utf8::is_space(cp)) {
      if (cp != U' ') changed = true;
      filtered.push_back(U' ');
    } else if (is_joiner(cp) && i > 0 && i + 1 < cps.size() &&
               utf8::is_word_char(cps[i - 1]) && utf8::is_word_char(cps[i + 1])) {
      const char32_t canon = cp == 0x2019 ? U'\'' : cp;
      changed |= canon != cp;
      filtered.push_back(canon);
    } else {
      changed = true;
      filtered.push_back(U' ');
    }
  }
  if (changed) result.applied_rules.emplace_back("replace_special_characters");

  std::vector<char32_t> collapsed;
  collapsed.reserve(filtered.size());
  for (char32_t cp : filtered) {
    if (cp == U' ' && (collapsed.empty() || collapsed.back() == U' ')) continue;
    collapsed.push_back(cp);
  }
  if (!collapsed.empty() && collapsed.back() == U' ') collapsed.pop_back();
  if (collapsed.size() != filtered.size()) {
    result.applied_rules.emplace_back("collapse_whitespace");
  }

  result.text = encode(collapsed);
  return result;
}

NormalizedText normalize_question(std::string_view raw) {
  NormalizedText result = normalize_text(raw);
  if (result.text.empty()) {
    throw Error(ErrorCode::UnanswerableInput,
                "question is empty after normalization", "normalize");
  }
  return result;
}

TokenSeq tokenize(std::string_view normalized) { return split_words(normalized); }

TokenSeq normalized_tokens(std::string_view raw) {
  return tokenize(normalize_text(raw).text);
}

std::vector<TextSpan> word_spans(std::string_view raw) {
  std::vector<TextSpan> spans;
  std::size_t pos = 0;
  std::size_t start = std::string_view::npos;
  while (pos < raw.size()) {
    const std::size_t here = pos;
    const char32_t cp = utf8::next(raw, pos);
    if (utf8::is_space(cp)) {
      if (start != std::string_view::npos) {
        spans.push_back({start, here});
        start = std::string_view::npos;
      }
    } else if (start == std::string_view::npos) {
      start = here;
    }
  }
  if (start != std::string_view::npos) spans.push_back({start, raw.size()});
  return spans;
}

std::vector<std::string> split_words(std::string_view raw) {
  std::vector<std::string> words;
  for (const TextSpan& s : word_spans(raw)) {
    words.emplace_back(raw.substr(s.begin, s.end - s.begin));
  }
  return words;
}

std::vector<TextSpan> sentence_spans(std::string_view raw) {
  std::vector<TextSpan> spans;
  std::size_t pos = 0;
  std::size_t start = std::string_view::npos;  // first non-space byte
  std::size_t last_non_space_end = 0;
  bool after_terminator = false;
  while (pos < raw.size()) {
    const std::size_t here = pos;
    const char32_t cp = utf8::next(raw, pos);
    if (utf8::is_space(cp)) {
      if (after_terminator && start != std::string_view::npos) {
        spans.push_back({start, last_non_space_end});
        start = std::string_view::npos;
      }
      after_terminator = false;
      continue;
    }
    if (start == std::string_view::npos) start = here;
    last_non_space_end = pos;
    after_terminator = is_sentence_final(cp);
  }
  if (start != std::string_view::npos) spans.push_back({start, last_non_space_end});
  return spans;
}

std::vector<std::string> split_sentences(std::string_view raw) {
  std::vector<std::string> out;
  for (const TextSpan& s : sentence_spans(raw)) {
    out.emplace_back(raw.substr(s.begin, s.end - s.begin));
  }
  return out;
}

PassageSet chunk_document(std::string doc_id, std::string_view raw, std::size_t max_words) {
  if (max_words == 0) throw std::invalid_argument("max_words must be >= 1");
  PassageSet set;
  set.doc_id = std::move(doc_id);
  set.max_words = max_words;

  const std::vector<TextSpan> words = word_spans(raw);
  const std::vector<TextSpan> sentences = sentence_spans(raw);

  std::size_t pending_first = 0;
  std::size_t pending_count = 0;
  auto flush = [&] {
    if (pending_count == 0) return;
    Passage p;
    p.id = set.doc_id + "#" + std::to_string(set.passages.size());
    p.first_word = pending_first;
    p.word_count = pending_count;
    const std::size_t b = words[pending_first].begin;
    const std::size_t e = words[pending_first + pending_count - 1].end;
    p.text = std::string(raw.substr(b, e - b));
    set.passages.push_back(std::move(p));
    pending_count = 0;
  };

  std::size_t w = 0;
  for (const TextSpan& sentence : sentences) {
    const std::size_t first = w;
    while (w < words.size() && words[w].begin < sentence.end) ++w;
    std::size_t count = w - first;
    if (count == 0) continue;

    if (count > max_words) {
      flush();
      std::size_t at = first;
      while (count > max_words) {
        pending_first = at;
        pending_count = max_words;
        flush();
        at += max_words;
        count -= max_words;
      }
      pending_first = at;
      pending_count = count;
    } else if (pending_count + count > max_words) {
      flush();
      pending_first = first;
      pending_count = count;
    } else {
      if (pending_count == 0) pending_first = first;
      pending_count += count;
    }
  }
  flush();
  return set;
}

std::vector<Document> load_corpus(const std::filesystem::path& path) {
  namespace fs = std::filesystem;
  std::vector<Document> docs;
  if (fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(path)) {
      if (entry.is_regular_file() && entry.path().extension() == ".txt") {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      std::ifstream in(f, std::ios::binary);
      std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      docs.push_back({f.stem().string(), std::move(text)});
    }
    return docs;
  }

  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open corpus: " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      docs.push_back({j.at("id").get<std::string>(), j.at("text").get<std::string>()});
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::SerializationError,
                  path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return docs;
}

}  // namespace qarouter
