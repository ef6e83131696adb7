// Copyright 2026 The qa-router Authors
// SPDX-License-Identifier: Apache-2.0

#include "qarouter/nl2sql.hpp"

#include <algorithm>
#include <fstream>
#include <optional>

#include "qarouter/error.hpp"

namespace qarouter {

namespace {

constexpr std::pair<std::string_view, SlotKind> kSlotNames[] = {
    {"table", SlotKind::Table},
    {"numeric_column", SlotKind::NumericColumn},
    {"label_column", SlotKind::LabelColumn},
    {"comparator", SlotKind::Comparator},
    {"number", SlotKind::Number},
};

std::string_view slot_name(SlotKind kind) {
  for (const auto& [name, k] : kSlotNames) {
    if (k == kind) return name;
  }
  return "?";
}

[[noreturn]] void rule_error(const std::string& what) {
  throw Error(ErrorCode::RuleSetError, "rule set: " + what);
}

TokenSeq phrase_tokens(const std::string& phrase) {
  TokenSeq t = normalized_tokens(phrase);
  if (t.empty()) rule_error("empty phrase '" + phrase + "'");
  return t;
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    rule_error(path.string() + ": " + e.what());
  }
}

std::vector<SlotKind> template_slots(const std::string& text) {
  std::vector<SlotKind> slots;
  std::size_t pos = 0;
  while ((pos = text.find('{', pos)) != std::string::npos) {
    const std::size_t end = text.find('}', pos);
    if (end == std::string::npos) rule_error("unclosed slot in template '" + text + "'");
    const std::string name = text.substr(pos + 1, end - pos - 1);
    const auto* it = std::find_if(std::begin(kSlotNames), std::end(kSlotNames),
                                  [&](const auto& p) { return p.first == name; });
    if (it == std::end(kSlotNames)) rule_error("template slot {" + name + "} has no binding rule");
    if (std::find(slots.begin(), slots.end(), it->second) == slots.end()) slots.push_back(it->second);
    pos = end + 1;
  }
  return slots;
}

std::optional<sql::CompareOp> parse_op(std::string_view op) {
  for (auto candidate : {sql::CompareOp::Eq, sql::CompareOp::Ne, sql::CompareOp::Lt,
                         sql::CompareOp::Le, sql::CompareOp::Gt, sql::CompareOp::Ge}) {
    if (sql::to_string(candidate) == op) return candidate;
  }
  return std::nullopt;
}

std::vector<std::pair<TokenSeq, std::string>> phrase_map(const Json& j, const char* key) {
  std::vector<std::pair<TokenSeq, std::string>> out;
  if (!j.contains(key)) return out;
  if (!j[key].is_object()) rule_error(std::string("\"") + key + "\" must be an object");
  for (const auto& [phrase, target] : j[key].items()) {
    out.emplace_back(phrase_tokens(phrase), target.get<std::string>());
  }
  return out;
}

}  // namespace

RuleSet rules_from_json(const Json& j) {
  RuleSet set;
  try {
    if (!j.is_object() || !j.contains("rules") || !j["rules"].is_array()) {
      rule_error("expected an object with a \"rules\" array");
    }
    for (const auto& c : j.value("comparators", Json::array())) {
      const std::string op = c.at("op").get<std::string>();
      const auto parsed = parse_op(op);
      if (!parsed) rule_error("unknown comparator '" + op + "'");
      set.comparators.push_back({phrase_tokens(c.at("phrase").get<std::string>()), *parsed});
    }
    for (const auto& r : j["rules"]) {
      RulePattern rule;
      rule.name = r.at("name").get<std::string>();
      for (const auto& t : r.at("triggers")) rule.triggers.push_back(phrase_tokens(t.get<std::string>()));
      if (rule.triggers.empty()) rule_error("rule '" + rule.name + "' has no triggers");
      rule.template_text = r.at("template").get<std::string>();
      rule.slots = template_slots(rule.template_text);
      const bool needs_comparator =
          std::find(rule.slots.begin(), rule.slots.end(), SlotKind::Comparator) != rule.slots.end();
      if (needs_comparator && set.comparators.empty()) {
        rule_error("rule '" + rule.name + "' uses {comparator} but no comparators are defined");
      }
      set.rules.push_back(std::move(rule));
    }
  } catch (const Json::exception& e) {
    rule_error(e.what());
  }
  if (set.rules.empty()) rule_error("no rules");
  return set;
}

RuleSet load_rules(const std::filesystem::path& path) { return rules_from_json(read_json(path)); }

SynonymTable synonyms_from_json(const Json& j) {
  SynonymTable table;
  try {
    if (!j.is_object()) rule_error("synonyms must be an object");
    table.tables = phrase_map(j, "tables");
    table.columns = phrase_map(j, "columns");
    if (j.contains("labels")) {
      for (const auto& [t, c] : j["labels"].items()) table.labels[t] = c.get<std::string>();
    }
  } catch (const Json::exception& e) {
    rule_error(e.what());
  }
  return table;
}

SynonymTable load_synonyms(const std::filesystem::path& path) {
  return synonyms_from_json(read_json(path));
}

namespace {

// Earliest start of `phrase` in `tokens`.
std::optional<std::size_t> find_phrase(const TokenSeq& tokens, const TokenSeq& phrase) {
  if (phrase.empty() || phrase.size() > tokens.size()) return std::nullopt;
  for (std::size_t i = 0; i + phrase.size() <= tokens.size(); ++i) {
    if (std::equal(phrase.begin(), phrase.end(), tokens.begin() + static_cast<long>(i))) return i;
  }
  return std::nullopt;
}

// Candidate (phrase -> target) whose phrase occurs earliest; longer phrases win
// at equal positions, then declaration order.
struct Earliest {
  std::optional<std::size_t> pos;
  std::size_t length = 0;
  std::size_t target = 0;

  void offer(const TokenSeq& tokens, const TokenSeq& phrase, std::size_t candidate) {
    const auto at = find_phrase(tokens, phrase);
    if (!at) return;
    if (!pos || *at < *pos || (*at == *pos && phrase.size() > length)) {
      pos = at;
      length = phrase.size();
      target = candidate;
    }
  }
};

struct Bindings {
  std::optional<std::size_t> table;
  std::optional<std::size_t> numeric_column;
  std::optional<std::size_t> label_column;
  std::optional<sql::CompareOp> comparator;
  std::optional<std::string> number;
};

Bindings bind(const TokenSeq& tokens, const sql::Schema& schema, const RuleSet& rules,
              const SynonymTable& synonyms) {
  Bindings b;

  Earliest table;
  for (std::size_t t = 0; t < schema.tables.size(); ++t) {
    table.offer(tokens, normalized_tokens(schema.tables[t].name), t);
  }
  for (const auto& [phrase, name] : synonyms.tables) {
    if (const auto t = schema.find_table(name)) table.offer(tokens, phrase, *t);
  }
  if (table.pos) b.table = table.target;

  if (b.table) {
    const auto& t = schema.tables[*b.table];
    Earliest column;
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
      if (t.columns[c].type == sql::ColumnType::Number) {
        column.offer(tokens, normalized_tokens(t.columns[c].name), c);
      }
    }
    for (const auto& [phrase, name] : synonyms.columns) {
      const auto c = t.find_column(name);
      if (c && t.columns[*c].type == sql::ColumnType::Number) column.offer(tokens, phrase, *c);
    }
    if (column.pos) b.numeric_column = column.target;

    for (const auto& [table_name, label] : synonyms.labels) {
      if (schema.find_table(table_name) == b.table) b.label_column = t.find_column(label);
    }
    if (!b.label_column) {
      for (std::size_t c = 0; c < t.columns.size() && !b.label_column; ++c) {
        if (t.columns[c].type == sql::ColumnType::Text) b.label_column = c;
      }
    }
  }

  Earliest comparator;
  for (std::size_t i = 0; i < rules.comparators.size(); ++i) {
    comparator.offer(tokens, rules.comparators[i].phrase, i);
  }
  if (comparator.pos) b.comparator = rules.comparators[comparator.target].op;

  for (const auto& token : tokens) {
    if (!token.empty() && std::all_of(token.begin(), token.end(),
                                      [](char c) { return c >= '0' && c <= '9'; })) {
      b.number = token;
      break;
    }
  }
  return b;
}

std::optional<std::string> slot_value(SlotKind kind, const Bindings& b, const sql::Schema& schema) {
  switch (kind) {
    case SlotKind::Table:
      if (b.table) return schema.tables[*b.table].name;
      break;
    case SlotKind::NumericColumn:
      if (b.table && b.numeric_column) return schema.tables[*b.table].columns[*b.numeric_column].name;
      break;
    case SlotKind::LabelColumn:
      if (b.table && b.label_column) return schema.tables[*b.table].columns[*b.label_column].name;
      break;
    case SlotKind::Comparator:
      if (b.comparator) return std::string(sql::to_string(*b.comparator));
      break;
    case SlotKind::Number:
      if (b.number) return b.number;
      break;
  }
  return std::nullopt;
}

}  // namespace

RuleMatch rule_match(const Nl2SqlRequest& request, const RuleSet& rules,
                     const SynonymTable& synonyms) {
  const TokenSeq tokens = normalized_tokens(request.question);
  const Bindings b = bind(tokens, request.schema, rules, synonyms);
  for (const auto& rule : rules.rules) {
    const bool triggered = std::any_of(rule.triggers.begin(), rule.triggers.end(),
                                       [&](const TokenSeq& t) { return find_phrase(tokens, t).has_value(); });
    if (!triggered) continue;
    RuleMatch match;
    match.rule = rule.name;
    bool complete = true;
    for (SlotKind kind : rule.slots) {
      const auto value = slot_value(kind, b, request.schema);
      if (!value) {
        complete = false;
        break;
      }
      match.slots[std::string(slot_name(kind))] = *value;
    }
    if (!complete) continue;
    match.sql = rule.template_text;
    for (const auto& [name, value] : match.slots) {
      const std::string marker = "{" + name + "}";
      for (std::size_t pos; (pos = match.sql.find(marker)) != std::string::npos;) {
        match.sql.replace(pos, marker.size(), value);
      }
    }
    return match;
  }
  throw Error(ErrorCode::NoRuleMatched, "no rule matches question: " + request.question,
              "translate");
}

std::string rule_translate(const Nl2SqlRequest& request, const RuleSet& rules,
                           const SynonymTable& synonyms) {
  return rule_match(request, rules, synonyms).sql;
}

std::string translate(const Nl2SqlBackend& backend, const Nl2SqlRequest& request) {
  std::string text;
  if (const auto* builtin = std::get_if<BuiltinNl2Sql>(&backend)) {
    if (!builtin->rules || !builtin->synonyms) {
      throw Error(ErrorCode::ConfigError, "builtin nl2sql has no rule set", "translate");
    }
    text = rule_translate(request, *builtin->rules, *builtin->synonyms);
  } else {
    Json payload;
    payload["question"] = request.question;
    payload["db_id"] = request.db_id;
    payload["schema"] = sql::schema_to_json(request.schema);
    try {
      text = call_external(std::get<ExternalBackend>(backend), Role::Nl2Sql, std::move(payload))
                 .at("sql")
                 .get<std::string>();
    } catch (const Error& e) {
      throw e.with_stage("translate");
    }
  }
  try {
    sql::parse_sql(text);
  } catch (const sql::SqlSyntaxError& e) {
    throw Error(ErrorCode::MalformedBackendResponse,
                "translator returned unparsable SQL '" + text + "': " + e.what(), "translate");
  }
  return text;
}

SqlAnswer answer_sql_question(const Nl2SqlBackend& backend, const Nl2SqlRequest& request,
                              const sql::Database& db) {
  SqlAnswer answer;
  answer.sql = translate(backend, request);
  const auto staged = [](const char* stage, auto&& fn) {
    try {
      return fn();
    } catch (const Error& e) {
      throw e.with_stage(stage);
    }
  };
  const sql::Query query = staged("parse", [&] { return sql::parse_sql(answer.sql); });
  const sql::Plan plan = staged("validate", [&] { return sql::validate(query, db.schema); });
  answer.result = staged("execute", [&] { return sql::execute(plan, db); });
  return answer;
}

}  // namespace qarouter
