// Copyright 2026 The qa-router Authors
// SPDX-License-Identifier: Apache-2.0

// Minimal UTF-8 helpers. Character classes cover Latin (incl. every
// Portuguese diacritic), Greek and Cyrillic; input is assumed NFC.

#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace qarouter::utf8 {

inline constexpr char32_t kReplacement = 0xFFFD;

/// Decodes one code point starting at `pos` and advances `pos`. Malformed
/// sequences decode to U+FFFD and consume one byte.
char32_t next(std::string_view s, std::size_t& pos);

void append(std::string& out, char32_t cp);

char32_t to_lower(char32_t cp);
bool is_letter(char32_t cp);
bool is_digit(char32_t cp);
bool is_space(char32_t cp);
bool is_combining_mark(char32_t cp);
/// ASCII punctuation plus common Unicode punctuation (quotes, dashes, ellipsis,
/// inverted marks, guillemets).
bool is_punctuation(char32_t cp);

inline bool is_word_char(char32_t cp) {
  return is_letter(cp) || is_digit(cp) || is_combining_mark(cp);
}

std::string lower(std::string_view s);

}  // namespace qarouter::utf8
