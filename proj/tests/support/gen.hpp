// Copyright 2026 The qa-router Authors
// SPDX-License-Identifier: Apache-2.0

// Seeded generators shared by the property and acceptance tests.

#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace qarouter::testgen {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }
  int range(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
  double unit() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  bool chance(double p) { return unit() < p; }

  template <class T>
  const T& pick(const std::vector<T>& v) { return v[index(v.size())]; }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

inline const std::vector<std::string>& words() {
  static const std::vector<std::string> kWords = {
      "dor",      "nas",      "costas",    "paciente", "fístula", "artéria",
      "coração",  "pressão",  "sangue",    "médico",   "exame",   "raio-x",
      "tórax",    "d'água",   "infecção",  "vírus",    "febre",   "tosse",
      "pulmão",   "rim",      "fígado",    "cérebro",  "músculo", "osso",
      "pele",     "olho",     "dieta",     "vitamina", "cálcio",  "ferro",
      "aguda",    "crônica",  "uma",       "o",        "a",       "de",
      "que",      "é",        "causa",     "pode",     "ser",     "tratamento",
      "sintoma",  "diagnóstico", "Hospital", "Ácido",  "ÓRGÃO",   "ação"};
  return kWords;
}

struct GeneratedDoc {
  std::string text;
  std::vector<std::string> words;        // whitespace words in order
  std::vector<std::size_t> sentence_ends;  // word index one past each sentence
};

/// Document built from known sentences. Words never carry a terminator except
/// the last one of each sentence, so sentence boundaries are known exactly.
inline GeneratedDoc random_document(Rng& rng, int max_sentences, int max_sentence_words) {
  static const std::vector<std::string> kTerminators = {".", "?", "!", "…"};
  static const std::vector<std::string> kSpaces = {" ", " ", " ", "  ", "\n", "\t", " \n "};
  GeneratedDoc doc;
  const int n_sentences = rng.range(0, max_sentences);
  for (int s = 0; s < n_sentences; ++s) {
    const int n_words = rng.range(1, max_sentence_words);
    for (int w = 0; w < n_words; ++w) {
      std::string word = rng.pick(words());
      if (w + 1 == n_words) word += rng.pick(kTerminators);
      else if (rng.chance(0.05)) word += ",";
      if (!doc.text.empty()) doc.text += rng.pick(kSpaces);
      doc.text += word;
      doc.words.push_back(word);
    }
    doc.sentence_ends.push_back(doc.words.size());
  }
  if (rng.chance(0.3)) doc.text = rng.pick(kSpaces) + doc.text + rng.pick(kSpaces);
  return doc;
}

inline std::vector<std::string> random_tokens(Rng& rng, int min_len, int max_len) {
  std::vector<std::string> out;
  const int n = rng.range(min_len, max_len);
  for (int i = 0; i < n; ++i) out.push_back(rng.pick(words()));
  return out;
}

/// Arbitrary text mixing words, punctuation, digits, odd whitespace and the
/// occasional invalid UTF-8 byte.
inline std::string random_messy_text(Rng& rng, int max_pieces) {
  static const std::vector<std::string> kPieces = {
      "?", "!", ".", "...", "…", ",", ";", "-", "'", "’", "--", "(", ")", "\"",
      "«", "»", "45", "3.5", " ", "  ", "\t", "\n", "\xC3", "\xFF", "ª", "º",
      "Ç", "É", "ÃO", "x-y", "O'Neil", "-a-", "'b'", "¿", "¡", "%", "@", "#"};
  std::string out;
  const int n = rng.range(0, max_pieces);
  for (int i = 0; i < n; ++i) {
    if (rng.chance(0.5)) out += rng.pick(words());
    else out += rng.pick(kPieces);
    if (rng.chance(0.4)) out += " ";
  }
  return out;
}

}  // namespace qarouter::testgen
