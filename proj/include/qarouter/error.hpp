// Copyright 2026 The qa-router Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qarouter {

enum class ErrorCode {
  UnanswerableInput,
  TrainingDataError,
  CorpusTooSmall,
  ExternalTimeout,
  MalformedBackendResponse,
  BackendFailed,
  DuplicatePassageId,
  UnknownPassageId,
  NoAnswer,
  SyntaxError,
  UnknownTable,
  UnknownColumn,
  AmbiguousColumn,
  TypeMismatch,
  InvalidQuery,
  ResourceLimit,
  MissingTableFile,
  HeaderMismatch,
  NumericParseError,
  SchemaError,
  NoRuleMatched,
  RuleSetError,
  SpoolUnavailable,
  SerializationError,
  UnknownRequestId,
  EmptyEvaluation,
  LengthMismatch,
  EmptyBatch,
  ConfigError,
  IoError,
};

std::string_view error_code_name(ErrorCode code);

/// Domain error. `stage` is set when the error crossed a pipeline stage
/// boundary (e.g. "translate", "validate").
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string stage = {})
      : std::runtime_error(message), code_(code), stage_(std::move(stage)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& stage() const noexcept { return stage_; }

  /// Same error, re-labelled with the stage it surfaced from.
  Error with_stage(std::string stage) const {
    Error copy = *this;
    copy.stage_ = std::move(stage);
    return copy;
  }

 private:
  ErrorCode code_;
  std::string stage_;
};

}  // namespace qarouter
