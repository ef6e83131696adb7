// Copyright 2026 The qa-router Authors
// SPDX-License-Identifier: Apache-2.0

#include "qarouter/error.hpp"

namespace qarouter {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnanswerableInput: return "UnanswerableInput";
    case ErrorCode::TrainingDataError: return "TrainingDataError";
    case ErrorCode::CorpusTooSmall: return "CorpusTooSmall";
    case ErrorCode::ExternalTimeout: return "ExternalTimeout";
    case ErrorCode::MalformedBackendResponse: return "MalformedBackendResponse";
    case ErrorCode::BackendFailed: return "BackendFailed";
    case ErrorCode::DuplicatePassageId: return "DuplicatePassageId";
    case ErrorCode::UnknownPassageId: return "UnknownPassageId";
    case ErrorCode::NoAnswer: return "NoAnswer";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::UnknownTable: return "UnknownTable";
    case ErrorCode::UnknownColumn: return "UnknownColumn";
    case ErrorCode::AmbiguousColumn: return "AmbiguousColumn";
    case ErrorCode::TypeMismatch: return "TypeMismatch";
    case ErrorCode::InvalidQuery: return "InvalidQuery";
    case ErrorCode::ResourceLimit: return "ResourceLimit";
    case ErrorCode::MissingTableFile: return "MissingTableFile";
    case ErrorCode::HeaderMismatch: return "HeaderMismatch";
    case ErrorCode::NumericParseError: return "NumericParseError";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::NoRuleMatched: return "NoRuleMatched";
    case ErrorCode::RuleSetError: return "RuleSetError";
    case ErrorCode::SpoolUnavailable: return "SpoolUnavailable";
    case ErrorCode::SerializationError: return "SerializationError";
    case ErrorCode::UnknownRequestId: return "UnknownRequestId";
    case ErrorCode::EmptyEvaluation: return "EmptyEvaluation";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EmptyBatch: return "EmptyBatch";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace qarouter
