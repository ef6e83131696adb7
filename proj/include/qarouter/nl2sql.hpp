// Copyright 2026 The qa-router Authors
// SPDX-License-Identifier: Apache-2.0

// Question to SQL translation: a keyword-rule baseline grounded on the schema
// through a synonym table, or an external translator over the spool.
//
// Rule file (rules.json):
//   {"comparators":[{"phrase":"menos de","op":"<"},...],
//    "rules":[{"name":..,"triggers":[..],"template":"SELECT ... {table}.{numeric_column} ..."}]}
// Slots: {table} {numeric_column} {label_column} {comparator} {number}.
//
// Synonym file (synonyms.json):
//   {"tables":{"pacientes":"Patients"},"columns":{"idade":"Age"},"labels":{"Appointments":"Room"}}

#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "qarouter/ipc.hpp"
#include "qarouter/sql.hpp"
#include "qarouter/textprep.hpp"

namespace qarouter {

enum class SlotKind { Table, NumericColumn, LabelColumn, Comparator, Number };

struct RulePattern {
  std::string name;
  std::vector<TokenSeq> triggers;  // normalized phrases
  std::string template_text;
  std::vector<SlotKind> slots;     // distinct, in template order
};

struct ComparatorPhrase {
  TokenSeq phrase;
  sql::CompareOp op = sql::CompareOp::Eq;
};

struct RuleSet {
  std::vector<ComparatorPhrase> comparators;
  std::vector<RulePattern> rules;  // priority order
};

struct SynonymTable {
  std::vector<std::pair<TokenSeq, std::string>> tables;   // phrase -> table name
  std::vector<std::pair<TokenSeq, std::string>> columns;  // phrase -> column name
  std::map<std::string, std::string> labels;              // table -> label column
};

/// Throws Error(RuleSetError).
RuleSet rules_from_json(const Json& j);
RuleSet load_rules(const std::filesystem::path& path);
SynonymTable synonyms_from_json(const Json& j);
SynonymTable load_synonyms(const std::filesystem::path& path);

struct Nl2SqlRequest {
  std::string question;  // normalized
  sql::Schema schema;
  std::string db_id;
};

struct RuleMatch {
  std::string rule;
  std::string sql;
  std::map<std::string, std::string> slots;
};

/// First rule, in priority order, with a trigger present and every slot
/// bound. Throws Error(NoRuleMatched).
RuleMatch rule_match(const Nl2SqlRequest& request, const RuleSet& rules,
                     const SynonymTable& synonyms);
std::string rule_translate(const Nl2SqlRequest& request, const RuleSet& rules,
                           const SynonymTable& synonyms);

struct BuiltinNl2Sql {
  std::shared_ptr<const RuleSet> rules;
  std::shared_ptr<const SynonymTable> synonyms;
};
using Nl2SqlBackend = std::variant<BuiltinNl2Sql, ExternalBackend>;

/// Returned text always parses under sql::parse_sql; anything else raises
/// Error(MalformedBackendResponse).
std::string translate(const Nl2SqlBackend& backend, const Nl2SqlRequest& request);

struct SqlAnswer {
  std::string sql;
  sql::ResultTable result;
};

/// translate, parse, validate, execute. Errors carry the stage name.
SqlAnswer answer_sql_question(const Nl2SqlBackend& backend, const Nl2SqlRequest& request,
                              const sql::Database& db);

}  // namespace qarouter
