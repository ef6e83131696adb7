// Copyright 2026 The qa-router Authors
// SPDX-License-Identifier: Apache-2.0

// In-memory relational store and the SQL subset used by the database route.
// Grammar: docs/sql_grammar.md.

#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "qarouter/error.hpp"
#include "qarouter/ipc.hpp"

namespace qarouter::sql {

// ---------------------------------------------------------------------------
// Schema and data

enum class ColumnType { Text, Number };
std::string_view to_string(ColumnType type);

struct Column {
  std::string name;
  ColumnType type = ColumnType::Text;
};

struct TableSchema {
  std::string name;
  std::string file;  // CSV file name relative to the data directory
  std::vector<Column> columns;

  /// Case-insensitive.
  std::optional<std::size_t> find_column(std::string_view column) const;
};

struct Schema {
  std::string db_id;
  std::vector<TableSchema> tables;

  /// Case-insensitive.
  std::optional<std::size_t> find_table(std::string_view table) const;
};

/// {"db_id":..,"tables":[{"name":..,"file"?:..,"columns":[{"name":..,"type":"text"|"number"}]}]}
/// Throws Error(SchemaError).
Schema schema_from_json(const Json& j);
Json schema_to_json(const Schema& schema);
Schema load_schema(const std::filesystem::path& path);

struct Null {
  auto operator<=>(const Null&) const = default;
};
using Value = std::variant<Null, double, std::string>;
using Row = std::vector<Value>;

inline bool is_null(const Value& v) { return std::holds_alternative<Null>(v); }

struct Database {
  Schema schema;
  std::vector<std::vector<Row>> rows;  // parallel to schema.tables
};

/// Reads one CSV per table. Header names must match the declared columns
/// (case-insensitive, same order). Numbers use a dot decimal separator; an
/// empty cell is null. Throws Error(MissingTableFile | HeaderMismatch |
/// NumericParseError | SchemaError).
Database load_csv_database(const std::filesystem::path& schema_file,
                           const std::filesystem::path& data_dir);
/// `<dir>/schema.json` plus CSVs in `dir`.
Database load_database(const std::filesystem::path& dir);

// ---------------------------------------------------------------------------
// Syntax

struct ColumnRef {
  std::string table;  // empty when unqualified
  std::string column;
  bool operator==(const ColumnRef&) const = default;
};

struct Projection {
  enum class Kind { Column, CountStar, CountDistinct };
  Kind kind = Kind::Column;
  ColumnRef column;  // unused for CountStar
  bool operator==(const Projection&) const = default;
};

using Literal = std::variant<double, std::string>;
using Operand = std::variant<ColumnRef, Literal>;

enum class CompareOp { Eq, Ne, Lt, Le, Gt, Ge };
std::string_view to_string(CompareOp op);

struct Comparison {
  Operand lhs;
  CompareOp op = CompareOp::Eq;
  Operand rhs;
  bool operator==(const Comparison&) const = default;
};

struct Condition {
  enum class Kind { Compare, And, Or };
  Kind kind = Kind::Compare;
  Comparison compare;              // Kind::Compare
  std::vector<Condition> operands;  // And / Or, at least two
  bool operator==(const Condition&) const = default;
};

struct Join {
  std::string table;
  ColumnRef left;
  ColumnRef right;
  bool operator==(const Join&) const = default;
};

struct OrderBy {
  ColumnRef column;
  bool descending = false;
  bool operator==(const OrderBy&) const = default;
};

struct Query {
  bool distinct = false;
  std::vector<Projection> projections;
  std::string from;
  std::vector<Join> joins;
  std::optional<Condition> where;
  std::optional<OrderBy> order_by;
  std::optional<std::uint64_t> limit;
  bool operator==(const Query&) const = default;
};

class SqlSyntaxError : public Error {
 public:
  SqlSyntaxError(std::size_t offset, std::vector<std::string> expected, std::string found);
  std::size_t offset() const { return offset_; }
  const std::vector<std::string>& expected() const { return expected_; }
  const std::string& found() const { return found_; }

 private:
  std::size_t offset_;
  std::vector<std::string> expected_;
  std::string found_;
};

/// Throws SqlSyntaxError.
Query parse_sql(std::string_view text);
/// Canonical text: upper-case keywords, explicit ASC/DESC, nested AND/OR
/// operands parenthesized. parse_sql(print_sql(q)) == q.
std::string print_sql(const Query& query);

// ---------------------------------------------------------------------------
// Planning and execution

struct BoundColumn {
  std::size_t source = 0;  // position among FROM + JOIN tables
  std::size_t column = 0;  // index within that table
  std::size_t offset = 0;  // index within the concatenated row
  ColumnType type = ColumnType::Text;
  bool operator==(const BoundColumn&) const = default;
};

struct Plan {
  Query query;
  std::vector<std::size_t> sources;  // schema table index per source
  std::vector<std::size_t> source_offset;
  std::size_t width = 0;
  bool aggregate = false;
  std::vector<std::string> headers;
};

/// Throws Error(UnknownTable | UnknownColumn | AmbiguousColumn | TypeMismatch |
/// InvalidQuery).
Plan validate(const Query& query, const Schema& schema);

/// Resolves `ref` against the plan's sources.
BoundColumn bind_column(const Plan& plan, const Schema& schema, const ColumnRef& ref);

struct ResultTable {
  std::vector<std::string> headers;
  std::vector<Row> rows;
};

struct ExecuteOptions {
  std::size_t row_cap = 1'000'000;  // joined rows held at once
};

/// Throws Error(ResourceLimit) when a join exceeds the row cap.
ResultTable execute(const Plan& plan, const Database& db, const ExecuteOptions& options = {});

/// parse_sql, validate and execute.
ResultTable run_query(std::string_view text, const Database& db, const ExecuteOptions& options = {});

/// Shortest round-trip text for numbers, integral values without a fraction.
std::string format_value(const Value& v);
/// RFC 4180 text; headers first when `with_header`.
std::string format_csv(const ResultTable& table, bool with_header);
Json result_to_json(const ResultTable& table);

}  // namespace qarouter::sql
