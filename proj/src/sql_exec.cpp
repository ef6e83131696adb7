// Copyright 2026 The qa-router Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <set>

#include "qarouter/csv.hpp"
#include "qarouter/sql.hpp"
#include "utf8.hpp"

namespace qarouter::sql {

namespace {

std::string display(const ColumnRef& ref) {
  return ref.table.empty() ? ref.column : ref.table + "." + ref.column;
}

// Resolves against the first `visible` sources only.
BoundColumn bind_visible(const Plan& plan, const Schema& schema, const ColumnRef& ref,
                         std::size_t visible) {
  std::optional<BoundColumn> found;
  if (!ref.table.empty()) {
    const auto table = schema.find_table(ref.table);
    std::optional<std::size_t> source;
    for (std::size_t s = 0; table && s < visible; ++s) {
      if (plan.sources[s] == *table) source = s;
    }
    if (!source) {
      throw Error(ErrorCode::UnknownTable, "unknown table: " + ref.table +
                                               (table ? " (not in FROM/JOIN)" : ""));
    }
    const auto& t = schema.tables[*table];
    const auto column = t.find_column(ref.column);
    if (!column) throw Error(ErrorCode::UnknownColumn, "unknown column: " + display(ref));
    return {*source, *column, plan.source_offset[*source] + *column, t.columns[*column].type};
  }
  for (std::size_t s = 0; s < visible; ++s) {
    const auto& t = schema.tables[plan.sources[s]];
    if (const auto column = t.find_column(ref.column)) {
      if (found) throw Error(ErrorCode::AmbiguousColumn, "ambiguous column: " + ref.column);
      found = BoundColumn{s, *column, plan.source_offset[s] + *column, t.columns[*column].type};
    }
  }
  if (!found) throw Error(ErrorCode::UnknownColumn, "unknown column: " + ref.column);
  return *found;
}

ColumnType operand_type(const Plan& plan, const Schema& schema, const Operand& o) {
  if (const auto* ref = std::get_if<ColumnRef>(&o)) {
    return bind_visible(plan, schema, *ref, plan.sources.size()).type;
  }
  return std::holds_alternative<double>(std::get<Literal>(o)) ? ColumnType::Number
                                                               : ColumnType::Text;
}

std::string operand_text(const Operand& o) {
  if (const auto* ref = std::get_if<ColumnRef>(&o)) return display(*ref);
  const auto& lit = std::get<Literal>(o);
  if (const auto* d = std::get_if<double>(&lit)) return format_value(*d);
  return "'" + std::get<std::string>(lit) + "'";
}

void check_condition(const Plan& plan, const Schema& schema, const Condition& c) {
  if (c.kind != Condition::Kind::Compare) {
    for (const auto& child : c.operands) check_condition(plan, schema, child);
    return;
  }
  const ColumnType l = operand_type(plan, schema, c.compare.lhs);
  const ColumnType r = operand_type(plan, schema, c.compare.rhs);
  if (l != r) {
    throw Error(ErrorCode::TypeMismatch,
                "type mismatch: " + operand_text(c.compare.lhs) + " (" + std::string(to_string(l)) +
                    ") " + std::string(to_string(c.compare.op)) + " " +
                    operand_text(c.compare.rhs) + " (" + std::string(to_string(r)) + ")");
  }
}

}  // namespace

BoundColumn bind_column(const Plan& plan, const Schema& schema, const ColumnRef& ref) {
  return bind_visible(plan, schema, ref, plan.sources.size());
}

Plan validate(const Query& query, const Schema& schema) {
  Plan plan;
  plan.query = query;
  auto add_source = [&](const std::string& name) {
    const auto table = schema.find_table(name);
    if (!table) throw Error(ErrorCode::UnknownTable, "unknown table: " + name);
    if (std::find(plan.sources.begin(), plan.sources.end(), *table) != plan.sources.end()) {
      throw Error(ErrorCode::InvalidQuery, "table used twice: " + name);
    }
    plan.sources.push_back(*table);
    plan.source_offset.push_back(plan.width);
    plan.width += schema.tables[*table].columns.size();
  };
  add_source(query.from);
  for (const auto& join : query.joins) {
    add_source(join.table);
    const auto l = bind_visible(plan, schema, join.left, plan.sources.size());
    const auto r = bind_visible(plan, schema, join.right, plan.sources.size());
    if (l.type != r.type) {
      throw Error(ErrorCode::TypeMismatch, "type mismatch in JOIN " + join.table + ": " +
                                               display(join.left) + " = " + display(join.right));
    }
  }

  std::size_t aggregates = 0;
  for (const auto& p : query.projections) {
    switch (p.kind) {
      case Projection::Kind::CountStar:
        ++aggregates;
        plan.headers.push_back("COUNT(*)");
        break;
      case Projection::Kind::CountDistinct: {
        ++aggregates;
        const auto b = bind_column(plan, schema, p.column);
        const auto& t = schema.tables[plan.sources[b.source]];
        plan.headers.push_back("COUNT(DISTINCT " + t.name + "." + t.columns[b.column].name + ")");
        break;
      }
      case Projection::Kind::Column: {
        const auto b = bind_column(plan, schema, p.column);
        plan.headers.push_back(schema.tables[plan.sources[b.source]].columns[b.column].name);
        break;
      }
    }
  }
  if (aggregates != 0 && aggregates != query.projections.size()) {
    throw Error(ErrorCode::InvalidQuery, "cannot mix COUNT with plain columns without GROUP BY");
  }
  plan.aggregate = aggregates != 0;
  if (query.where) check_condition(plan, schema, *query.where);
  if (query.order_by) bind_column(plan, schema, query.order_by->column);
  return plan;
}

namespace {

enum class Truth { False, True, Unknown };

// Total order used for DISTINCT bookkeeping: null < number < text.
struct ValueLess {
  bool operator()(const Value& a, const Value& b) const {
    return a.index() != b.index() ? a.index() < b.index() : a < b;
  }
};
struct RowLess {
  bool operator()(const Row& a, const Row& b) const {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), ValueLess{});
  }
};

Value literal_value(const Literal& lit) {
  if (const auto* d = std::get_if<double>(&lit)) return *d;
  return std::get<std::string>(lit);
}

// Operands bound to row offsets; literal operands carry their value.
struct CompiledOperand {
  std::optional<std::size_t> offset;
  Value literal;
  const Value& get(const Row& row) const { return offset ? row[*offset] : literal; }
};

struct CompiledCondition {
  Condition::Kind kind = Condition::Kind::Compare;
  CompiledOperand lhs;
  CompareOp op = CompareOp::Eq;
  CompiledOperand rhs;
  std::vector<CompiledCondition> operands;
};

CompiledOperand compile(const Plan& plan, const Schema& schema, const Operand& o) {
  CompiledOperand out;
  if (const auto* ref = std::get_if<ColumnRef>(&o)) {
    out.offset = bind_column(plan, schema, *ref).offset;
  } else {
    out.literal = literal_value(std::get<Literal>(o));
  }
  return out;
}

CompiledCondition compile(const Plan& plan, const Schema& schema, const Condition& c) {
  CompiledCondition out;
  out.kind = c.kind;
  if (c.kind == Condition::Kind::Compare) {
    out.lhs = compile(plan, schema, c.compare.lhs);
    out.op = c.compare.op;
    out.rhs = compile(plan, schema, c.compare.rhs);
  } else {
    for (const auto& child : c.operands) out.operands.push_back(compile(plan, schema, child));
  }
  return out;
}

// Numbers compare numerically, text bytewise; null makes the result Unknown.
Truth compare(const Value& a, CompareOp op, const Value& b) {
  if (is_null(a) || is_null(b)) return Truth::Unknown;
  int cmp = 0;
  if (const auto* x = std::get_if<double>(&a)) {
    const double y = std::get<double>(b);
    cmp = *x < y ? -1 : (*x > y ? 1 : 0);
  } else {
    const int c = std::get<std::string>(a).compare(std::get<std::string>(b));
    cmp = c < 0 ? -1 : (c > 0 ? 1 : 0);
  }
  bool r = false;
  switch (op) {
    case CompareOp::Eq: r = cmp == 0; break;
    case CompareOp::Ne: r = cmp != 0; break;
    case CompareOp::Lt: r = cmp < 0; break;
    case CompareOp::Le: r = cmp <= 0; break;
    case CompareOp::Gt: r = cmp > 0; break;
    case CompareOp::Ge: r = cmp >= 0; break;
  }
  return r ? Truth::True : Truth::False;
}

Truth evaluate(const CompiledCondition& c, const Row& row) {
  switch (c.kind) {
    case Condition::Kind::Compare: return compare(c.lhs.get(row), c.op, c.rhs.get(row));
    case Condition::Kind::And: {
      Truth acc = Truth::True;
      for (const auto& child : c.operands) {
        const Truth t = evaluate(child, row);
        if (t == Truth::False) return Truth::False;
        if (t == Truth::Unknown) acc = Truth::Unknown;
      }
      return acc;
    }
    case Condition::Kind::Or: {
      Truth acc = Truth::False;
      for (const auto& child : c.operands) {
        const Truth t = evaluate(child, row);
        if (t == Truth::True) return Truth::True;
        if (t == Truth::Unknown) acc = Truth::Unknown;
      }
      return acc;
    }
  }
  return Truth::Unknown;
}

[[noreturn]] void over_cap(std::size_t cap) {
  throw Error(ErrorCode::ResourceLimit,
              "query exceeds the row cap of " + std::to_string(cap) + " intermediate rows");
}

}  // namespace

ResultTable execute(const Plan& plan, const Database& db, const ExecuteOptions& options) {
  const Schema& schema = db.schema;
  const Query& q = plan.query;

  const auto& base = db.rows[plan.sources[0]];
  if (base.size() > options.row_cap) over_cap(options.row_cap);
  std::vector<Row> rows(base.begin(), base.end());

  for (std::size_t j = 0; j < q.joins.size(); ++j) {
    const auto l = bind_visible(plan, schema, q.joins[j].left, j + 2).offset;
    const auto r = bind_visible(plan, schema, q.joins[j].right, j + 2).offset;
    std::vector<Row> next;
    for (const Row& left : rows) {
      for (const Row& right : db.rows[plan.sources[j + 1]]) {
        Row joined = left;
        joined.insert(joined.end(), right.begin(), right.end());
        if (compare(joined[l], CompareOp::Eq, joined[r]) != Truth::True) continue;
        if (next.size() == options.row_cap) over_cap(options.row_cap);
        next.push_back(std::move(joined));
      }
    }
    rows = std::move(next);
  }

  if (q.where) {
    const CompiledCondition where = compile(plan, schema, *q.where);
    std::erase_if(rows, [&](const Row& row) { return evaluate(where, row) != Truth::True; });
  }

  ResultTable result;
  result.headers = plan.headers;

  if (plan.aggregate) {
    Row out;
    for (const auto& p : q.projections) {
      if (p.kind == Projection::Kind::CountStar) {
        out.push_back(static_cast<double>(rows.size()));
      } else {
        const auto offset = bind_column(plan, schema, p.column).offset;
        std::set<Value, ValueLess> seen;
        for (const Row& row : rows) {
          if (!is_null(row[offset])) seen.insert(row[offset]);
        }
        out.push_back(static_cast<double>(seen.size()));
      }
    }
    if (!q.limit || *q.limit > 0) result.rows.push_back(std::move(out));
    return result;
  }

  if (q.order_by) {
    const auto offset = bind_column(plan, schema, q.order_by->column).offset;
    const bool desc = q.order_by->descending;
    std::stable_sort(rows.begin(), rows.end(), [&](const Row& a, const Row& b) {
      const Value& x = a[offset];
      const Value& y = b[offset];
      if (is_null(x)) return false;
      if (is_null(y)) return true;
      return compare(desc ? y : x, CompareOp::Lt, desc ? x : y) == Truth::True;
    });
  }

  std::vector<std::size_t> offsets;
  for (const auto& p : q.projections) offsets.push_back(bind_column(plan, schema, p.column).offset);
  std::set<Row, RowLess> seen;
  for (const Row& row : rows) {
    if (q.limit && result.rows.size() >= *q.limit) break;
    Row out;
    out.reserve(offsets.size());
    for (std::size_t o : offsets) out.push_back(row[o]);
    if (q.distinct && !seen.insert(out).second) continue;
    result.rows.push_back(std::move(out));
  }
  return result;
}

ResultTable run_query(std::string_view text, const Database& db, const ExecuteOptions& options) {
  return execute(validate(parse_sql(text), db.schema), db, options);
}

std::string format_csv(const ResultTable& table, bool with_header) {
  std::string out;
  if (with_header) out += csv::format_row(table.headers) + "\n";
  for (const auto& row : table.rows) {
    std::vector<std::string> cells;
    for (const auto& v : row) cells.push_back(format_value(v));
    out += csv::format_row(cells) + "\n";
  }
  return out;
}

Json result_to_json(const ResultTable& table) {
  Json j;
  j["headers"] = table.headers;
  j["rows"] = Json::array();
  for (const auto& row : table.rows) {
    Json cells = Json::array();
    for (const auto& v : row) {
      if (is_null(v)) {
        cells.push_back(nullptr);
      } else if (const auto* d = std::get_if<double>(&v)) {
        if (std::floor(*d) == *d && std::abs(*d) < 9e15) {
          cells.push_back(static_cast<std::int64_t>(*d));
        } else {
          cells.push_back(*d);
        }
      } else {
        cells.push_back(std::get<std::string>(v));
      }
    }
    j["rows"].push_back(std::move(cells));
  }
  return j;
}

}  // namespace qarouter::sql
