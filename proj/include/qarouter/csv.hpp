// Copyright 2026 The qa-router Authors
// SPDX-License-Identifier: Apache-2.0

// RFC 4180 CSV: quoted fields, doubled quotes, CRLF or LF line ends, optional
// UTF-8 BOM. Blank lines are skipped.

#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace qarouter::csv {

struct Row {
  std::vector<std::string> cells;
  std::size_t line = 0;  // 1-based line where the record starts
};

std::vector<Row> parse(std::string_view text);
std::vector<Row> read_file(const std::filesystem::path& path);

std::string escape(std::string_view cell);
std::string format_row(const std::vector<std::string>& cells);

}  // namespace qarouter::csv
