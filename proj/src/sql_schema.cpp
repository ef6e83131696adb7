// Copyright 2026 The qa-router Authors
// SPDX-License-Identifier: Apache-2.0

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>

#include "qarouter/csv.hpp"
#include "qarouter/sql.hpp"
#include "utf8.hpp"

namespace qarouter::sql {

namespace fs = std::filesystem;

std::string_view to_string(ColumnType type) {
  return type == ColumnType::Number ? "number" : "text";
}

std::optional<std::size_t> TableSchema::find_column(std::string_view column) const {
  const std::string key = utf8::lower(column);
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (utf8::lower(columns[i].name) == key) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> Schema::find_table(std::string_view table) const {
  const std::string key = utf8::lower(table);
  for (std::size_t i = 0; i < tables.size(); ++i) {
    if (utf8::lower(tables[i].name) == key) return i;
  }
  return std::nullopt;
}

namespace {

[[noreturn]] void schema_error(const std::string& what) {
  throw Error(ErrorCode::SchemaError, "schema: " + what);
}

bool valid_identifier(std::string_view name) {
  if (name.empty()) return false;
  const unsigned char first = static_cast<unsigned char>(name[0]);
  if (!(std::isalpha(first) || first == '_' || first >= 0x80)) return false;
  for (char c : name) {
    const unsigned char u = static_cast<unsigned char>(c);
    if (!(std::isalnum(u) || u == '_' || u >= 0x80)) return false;
  }
  return true;
}

}  // namespace

Schema schema_from_json(const Json& j) {
  Schema schema;
  try {
    if (!j.is_object() || !j.contains("tables") || !j["tables"].is_array()) {
      schema_error("expected an object with a \"tables\" array");
    }
    schema.db_id = j.value("db_id", std::string());
    std::set<std::string> table_keys;
    for (const auto& t : j["tables"]) {
      TableSchema table;
      table.name = t.at("name").get<std::string>();
      if (!valid_identifier(table.name)) schema_error("invalid table name '" + table.name + "'");
      if (!table_keys.insert(utf8::lower(table.name)).second) {
        schema_error("duplicate table '" + table.name + "'");
      }
      table.file = t.value("file", table.name + ".csv");
      std::set<std::string> column_keys;
      for (const auto& c : t.at("columns")) {
        Column column;
        column.name = c.at("name").get<std::string>();
        if (!valid_identifier(column.name)) {
          schema_error("invalid column name '" + column.name + "' in " + table.name);
        }
        if (!column_keys.insert(utf8::lower(column.name)).second) {
          schema_error("duplicate column '" + column.name + "' in " + table.name);
        }
        const std::string type = c.value("type", std::string("text"));
        if (type == "number") {
          column.type = ColumnType::Number;
        } else if (type != "text") {
          schema_error("column " + table.name + "." + column.name + " has unknown type '" + type + "'");
        }
        table.columns.push_back(std::move(column));
      }
      if (table.columns.empty()) schema_error("table '" + table.name + "' has no columns");
      schema.tables.push_back(std::move(table));
    }
  } catch (const Json::exception& e) {
    schema_error(e.what());
  }
  if (schema.tables.empty()) schema_error("no tables");
  return schema;
}

Json schema_to_json(const Schema& schema) {
  Json j;
  j["db_id"] = schema.db_id;
  j["tables"] = Json::array();
  for (const auto& t : schema.tables) {
    Json table;
    table["name"] = t.name;
    table["columns"] = Json::array();
    for (const auto& c : t.columns) {
      table["columns"].push_back({{"name", c.name}, {"type", std::string(to_string(c.type))}});
    }
    j["tables"].push_back(std::move(table));
  }
  return j;
}

Schema load_schema(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open schema " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::exception& e) {
    schema_error(path.string() + ": " + e.what());
  }
  return schema_from_json(j);
}

namespace {

Value parse_cell(const std::string& cell, const Column& column, const TableSchema& table,
                 std::size_t row_number) {
  if (cell.empty()) return Null{};
  if (column.type == ColumnType::Text) return cell;
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value, std::chars_format::fixed);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
    throw Error(ErrorCode::NumericParseError,
                table.name + " row " + std::to_string(row_number) + " column " + column.name +
                    ": '" + cell + "' is not a dot-decimal number");
  }
  return value;
}

}  // namespace

Database load_csv_database(const fs::path& schema_file, const fs::path& data_dir) {
  Database db;
  db.schema = load_schema(schema_file);
  for (const auto& table : db.schema.tables) {
    const fs::path file = data_dir / table.file;
    if (!fs::is_regular_file(file)) {
      throw Error(ErrorCode::MissingTableFile,
                  "table " + table.name + ": missing file " + file.string());
    }
    const auto records = csv::read_file(file);
    if (records.empty()) {
      throw Error(ErrorCode::HeaderMismatch, "table " + table.name + ": no header row");
    }
    const auto& header = records.front().cells;
    bool match = header.size() == table.columns.size();
    for (std::size_t i = 0; match && i < header.size(); ++i) {
      match = utf8::lower(header[i]) == utf8::lower(table.columns[i].name);
    }
    if (!match) {
      std::string want;
      for (const auto& c : table.columns) want += (want.empty() ? "" : ",") + c.name;
      throw Error(ErrorCode::HeaderMismatch, "table " + table.name + ": header '" +
                                                 csv::format_row(header) + "' does not match '" +
                                                 want + "'");
    }
    std::vector<Row> rows;
    for (std::size_t r = 1; r < records.size(); ++r) {
      const auto& cells = records[r].cells;
      if (cells.size() != table.columns.size()) {
        throw Error(ErrorCode::SchemaError,
                    table.name + " row " + std::to_string(r) + " (line " +
                        std::to_string(records[r].line) + "): " + std::to_string(cells.size()) +
                        " cells, expected " + std::to_string(table.columns.size()));
      }
      Row row;
      row.reserve(cells.size());
      for (std::size_t c = 0; c < cells.size(); ++c) {
        row.push_back(parse_cell(cells[c], table.columns[c], table, r));
      }
      rows.push_back(std::move(row));
    }
    db.rows.push_back(std::move(rows));
  }
  return db;
}

Database load_database(const fs::path& dir) { return load_csv_database(dir / "schema.json", dir); }

}  // namespace qarouter::sql
