// Copyright 2026 The qa-router Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>

#include "qarouter/sql.hpp"

namespace qarouter::sql {

std::string_view to_string(CompareOp op) {
  switch (op) {
    case CompareOp::Eq: return "=";
    case CompareOp::Ne: return "!=";
    case CompareOp::Lt: return "<";
    case CompareOp::Le: return "<=";
    case CompareOp::Gt: return ">";
    case CompareOp::Ge: return ">=";
  }
  return "?";
}

namespace {

std::string describe_expected(const std::vector<std::string>& expected) {
  std::string out;
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (i) out += i + 1 == expected.size() ? " or " : ", ";
    out += expected[i];
  }
  return out;
}

}  // namespace

SqlSyntaxError::SqlSyntaxError(std::size_t offset, std::vector<std::string> expected,
                               std::string found)
    : Error(ErrorCode::SyntaxError, "syntax error at byte " + std::to_string(offset) +
                                        ": expected " + describe_expected(expected) + ", found " +
                                        found),
      offset_(offset),
      expected_(std::move(expected)),
      found_(std::move(found)) {}

namespace {

enum class Tok { Ident, Keyword, Number, String, Symbol, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;  // keywords upper-cased; strings unescaped
  double number = 0.0;
  std::size_t offset = 0;
};

constexpr std::array kKeywords = {"AND",  "ASC",   "BY",    "COUNT", "DESC", "DISTINCT",
                                  "FROM", "INNER", "JOIN",  "LIMIT", "ON",   "OR",
                                  "ORDER", "SELECT", "WHERE"};

std::string upper_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

bool ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c >= 0x80; }
bool ident_part(unsigned char c) { return std::isalnum(c) || c == '_' || c >= 0x80; }

std::vector<Token> lex(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (true) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    Token t;
    t.offset = i;
    if (i == s.size()) {
      out.push_back(t);
      return out;
    }
    const unsigned char c = static_cast<unsigned char>(s[i]);
    if (ident_start(c)) {
      std::size_t j = i;
      while (j < s.size() && ident_part(static_cast<unsigned char>(s[j]))) ++j;
      t.text = std::string(s.substr(i, j - i));
      const std::string up = upper_ascii(t.text);
      if (std::find(kKeywords.begin(), kKeywords.end(), up) != kKeywords.end()) {
        t.kind = Tok::Keyword;
        t.text = up;
      } else {
        t.kind = Tok::Ident;
      }
      i = j;
    } else if (std::isdigit(c) ||
               (c == '-' && i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i + 1])))) {
      std::size_t j = i + 1;
      while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      if (j + 1 < s.size() && s[j] == '.' && std::isdigit(static_cast<unsigned char>(s[j + 1]))) {
        j += 1;
        while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      }
      t.kind = Tok::Number;
      t.text = std::string(s.substr(i, j - i));
      std::from_chars(s.data() + i, s.data() + j, t.number);
      if (!std::isfinite(t.number)) {
        throw SqlSyntaxError(i, {"finite number"}, "'" + t.text + "'");
      }
      i = j;
    } else if (c == '\'') {
      std::size_t j = i + 1;
      std::string value;
      for (;;) {
        if (j >= s.size()) throw SqlSyntaxError(i, {"closing quote"}, "unterminated string");
        if (s[j] == '\'') {
          if (j + 1 < s.size() && s[j + 1] == '\'') {
            value += '\'';
            j += 2;
            continue;
          }
          ++j;
          break;
        }
        value += s[j++];
      }
      t.kind = Tok::String;
      t.text = std::move(value);
      i = j;
    } else {
      static constexpr std::array kTwo = {"<=", ">=", "!=", "<>"};
      t.kind = Tok::Symbol;
      const std::string_view rest = s.substr(i);
      for (const char* op : kTwo) {
        if (rest.starts_with(op)) t.text = op;
      }
      if (t.text.empty()) {
        if (std::string_view("(),.*=<>;").find(static_cast<char>(c)) == std::string_view::npos) {
          throw SqlSyntaxError(i, {"token"}, "'" + std::string(1, static_cast<char>(c)) + "'");
        }
        t.text = std::string(1, static_cast<char>(c));
      }
      i += t.text.size();
    }
    out.push_back(std::move(t));
  }
}

class Parser {
 public:
  explicit Parser(std::string_view text) : tokens_(lex(text)) {}

  Query query() {
    Query q;
    expect_keyword("SELECT");
    q.distinct = accept_keyword("DISTINCT");
    q.projections.push_back(projection());
    while (accept_symbol(",")) q.projections.push_back(projection());
    expect_keyword("FROM");
    q.from = identifier({"table name"});
    for (;;) {
      if (accept_keyword("INNER")) {
        expect_keyword("JOIN");
      } else if (!accept_keyword("JOIN")) {
        break;
      }
      Join j;
      j.table = identifier({"table name"});
      expect_keyword("ON");
      j.left = column_ref();
      expect_symbol("=");
      j.right = column_ref();
      q.joins.push_back(std::move(j));
    }
    if (accept_keyword("WHERE")) q.where = disjunction();
    if (accept_keyword("ORDER")) {
      expect_keyword("BY");
      OrderBy o;
      o.column = column_ref();
      if (accept_keyword("DESC")) {
        o.descending = true;
      } else {
        accept_keyword("ASC");
      }
      q.order_by = o;
    }
    if (accept_keyword("LIMIT")) {
      const Token& t = peek();
      if (t.kind != Tok::Number || t.text.find_first_of(".-") != std::string::npos) {
        fail({"nonnegative integer"});
      }
      std::uint64_t n = 0;
      const auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), n);
      if (ec != std::errc()) fail({"nonnegative integer"});
      q.limit = n;
      ++pos_;
    }
    accept_symbol(";");
    if (peek().kind != Tok::End) {
      std::vector<std::string> expected;
      if (!q.order_by && !q.limit) {
        if (!q.where) expected = {"JOIN", "WHERE"};
        expected.push_back("ORDER BY");
      }
      if (!q.limit) expected.push_back("LIMIT");
      expected.push_back("end of input");
      fail(expected);
    }
    return q;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }

  static std::string describe(const Token& t) {
    switch (t.kind) {
      case Tok::End: return "end of input";
      case Tok::String: return "string '" + t.text + "'";
      default: return "'" + t.text + "'";
    }
  }

  [[noreturn]] void fail(std::vector<std::string> expected) const {
    throw SqlSyntaxError(peek().offset, std::move(expected), describe(peek()));
  }

  bool accept_keyword(std::string_view kw) {
    if (peek().kind == Tok::Keyword && peek().text == kw) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect_keyword(std::string_view kw) {
    if (!accept_keyword(kw)) fail({std::string(kw)});
  }
  bool accept_symbol(std::string_view sym) {
    if (peek().kind == Tok::Symbol && peek().text == sym) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect_symbol(std::string_view sym) {
    if (!accept_symbol(sym)) fail({"'" + std::string(sym) + "'"});
  }

  std::string identifier(std::vector<std::string> expected) {
    if (peek().kind != Tok::Ident) fail(std::move(expected));
    return tokens_[pos_++].text;
  }

  ColumnRef column_ref() {
    ColumnRef ref;
    ref.column = identifier({"column name"});
    if (accept_symbol(".")) {
      ref.table = std::move(ref.column);
      ref.column = identifier({"column name"});
    }
    return ref;
  }

  Projection projection() {
    Projection p;
    if (accept_keyword("COUNT")) {
      expect_symbol("(");
      if (accept_symbol("*")) {
        p.kind = Projection::Kind::CountStar;
      } else if (accept_keyword("DISTINCT")) {
        p.kind = Projection::Kind::CountDistinct;
        p.column = column_ref();
      } else {
        fail({"'*'", "DISTINCT"});
      }
      expect_symbol(")");
      return p;
    }
    if (peek().kind != Tok::Ident) fail({"COUNT", "column name"});
    p.column = column_ref();
    return p;
  }

  Operand operand() {
    const Token& t = peek();
    if (t.kind == Tok::Number) {
      ++pos_;
      return Literal{t.number};
    }
    if (t.kind == Tok::String) {
      ++pos_;
      return Literal{t.text};
    }
    if (t.kind == Tok::Ident) return column_ref();
    fail({"column name", "number", "string"});
  }

  Condition primary() {
    if (accept_symbol("(")) {
      Condition c = disjunction();
      expect_symbol(")");
      return c;
    }
    if (peek().kind != Tok::Ident && peek().kind != Tok::Number && peek().kind != Tok::String) {
      fail({"'('", "column name", "number", "string"});
    }
    Condition c;
    c.compare.lhs = operand();
    static const std::array<std::pair<const char*, CompareOp>, 7> kOps = {{{"=", CompareOp::Eq},
                                                                           {"!=", CompareOp::Ne},
                                                                           {"<>", CompareOp::Ne},
                                                                           {"<", CompareOp::Lt},
                                                                           {"<=", CompareOp::Le},
                                                                           {">", CompareOp::Gt},
                                                                           {">=", CompareOp::Ge}}};
    bool matched = false;
    for (const auto& [sym, op] : kOps) {
      if (accept_symbol(sym)) {
        c.compare.op = op;
        matched = true;
        break;
      }
    }
    if (!matched) fail({"'='", "'!='", "'<>'", "'<'", "'<='", "'>'", "'>='"});
    c.compare.rhs = operand();
    return c;
  }

  Condition conjunction() {
    Condition first = primary();
    if (peek().kind != Tok::Keyword || peek().text != "AND") return first;
    Condition c;
    c.kind = Condition::Kind::And;
    c.operands.push_back(std::move(first));
    while (accept_keyword("AND")) c.operands.push_back(primary());
    return c;
  }

  Condition disjunction() {
    Condition first = conjunction();
    if (peek().kind != Tok::Keyword || peek().text != "OR") return first;
    Condition c;
    c.kind = Condition::Kind::Or;
    c.operands.push_back(std::move(first));
    while (accept_keyword("OR")) c.operands.push_back(conjunction());
    return c;
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

std::string number_text(double v) {
  if (v == 0.0) return "0";  // also folds -0
  char buf[64];
  if (std::floor(v) == v && std::abs(v) < 1e15) {
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, static_cast<long long>(v));
    return std::string(buf, ptr);
  }
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed);
  return std::string(buf, ptr);
}

std::string quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    out += c;
    if (c == '\'') out += '\'';
  }
  return out + "'";
}

std::string print_ref(const ColumnRef& ref) {
  return ref.table.empty() ? ref.column : ref.table + "." + ref.column;
}

std::string print_operand(const Operand& o) {
  if (const auto* ref = std::get_if<ColumnRef>(&o)) return print_ref(*ref);
  const auto& lit = std::get<Literal>(o);
  if (const auto* d = std::get_if<double>(&lit)) return number_text(*d);
  return quote(std::get<std::string>(lit));
}

std::string print_condition(const Condition& c) {
  if (c.kind == Condition::Kind::Compare) {
    return print_operand(c.compare.lhs) + " " + std::string(to_string(c.compare.op)) + " " +
           print_operand(c.compare.rhs);
  }
  const char* glue = c.kind == Condition::Kind::And ? " AND " : " OR ";
  std::string out;
  for (std::size_t i = 0; i < c.operands.size(); ++i) {
    if (i) out += glue;
    const auto& child = c.operands[i];
    if (child.kind == Condition::Kind::Compare) {
      out += print_condition(child);
    } else {
      out += "(" + print_condition(child) + ")";
    }
  }
  return out;
}

}  // namespace

Query parse_sql(std::string_view text) { return Parser(text).query(); }

std::string format_value(const Value& v) {
  if (const auto* d = std::get_if<double>(&v)) return number_text(*d);
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  return {};
}

std::string print_sql(const Query& q) {
  std::string out = "SELECT ";
  if (q.distinct) out += "DISTINCT ";
  for (std::size_t i = 0; i < q.projections.size(); ++i) {
    if (i) out += ", ";
    const auto& p = q.projections[i];
    switch (p.kind) {
      case Projection::Kind::Column: out += print_ref(p.column); break;
      case Projection::Kind::CountStar: out += "COUNT(*)"; break;
      case Projection::Kind::CountDistinct:
        out += "COUNT(DISTINCT " + print_ref(p.column) + ")";
        break;
    }
  }
  out += " FROM " + q.from;
  for (const auto& j : q.joins) {
    out += " JOIN " + j.table + " ON " + print_ref(j.left) + " = " + print_ref(j.right);
  }
  if (q.where) out += " WHERE " + print_condition(*q.where);
  if (q.order_by) {
    out += " ORDER BY " + print_ref(q.order_by->column) + (q.order_by->descending ? " DESC" : " ASC");
  }
  if (q.limit) out += " LIMIT " + std::to_string(*q.limit);
  return out;
}

}  // namespace qarouter::sql
