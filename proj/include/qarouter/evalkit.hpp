// Copyright 2026 The qa-router Authors
// SPDX-License-Identifier: Apache-2.0

// Answer metrics in the SQuAD style (Exact Match, token F1, macro-average F1
// over questions), classifier reports and latency statistics.

#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qarouter/classifier.hpp"
#include "qarouter/ipc.hpp"

namespace qarouter {

struct MetricConfig {
  bool strip_articles = true;
  std::vector<std::string> articles{"o", "a", "os", "as", "um", "uma", "uns", "umas"};
};

/// Lowercase, delete punctuation, drop articles (when enabled), collapse
/// whitespace.
std::string normalize_answer(std::string_view text, const MetricConfig& config = {});

/// 1 iff the normalized prediction equals some normalized gold.
/// std::invalid_argument when `golds` is empty.
int exact_match(std::string_view prediction, std::span<const std::string> golds,
                const MetricConfig& config = {});

/// Multiset overlap F1; 1 when both normalize to nothing, 0 when only one does.
double token_f1(std::string_view prediction, std::string_view gold, const MetricConfig& config = {});

/// Best token_f1 over the golds.
double best_f1(std::string_view prediction, std::span<const std::string> golds,
               const MetricConfig& config = {});

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct EvalRecord {
  std::string id;
  std::string prediction;
  std::vector<std::string> golds;
  std::optional<RouteLabel> route;
  std::vector<StageTiming> timings;
};

/// Mean over records of best_f1. Throws Error(EmptyEvaluation).
double macro_avg_f1(std::span<const EvalRecord> records, const MetricConfig& config = {});
/// Mean over records of exact_match. Throws Error(EmptyEvaluation).
double mean_exact_match(std::span<const EvalRecord> records, const MetricConfig& config = {});

struct ClassMetrics {
  double precision = 0.0;  // 0 when the class is never predicted
  double recall = 0.0;     // 0 when the class never occurs
  double f1 = 0.0;
  std::size_t support = 0;
};

struct ClassifierReport {
  std::size_t n = 0;
  double accuracy = 0.0;
  std::array<ClassMetrics, kRouteCount> per_class{};
  std::array<std::array<std::size_t, kRouteCount>, kRouteCount> confusion{};  // [gold][predicted]
};

/// Throws Error(LengthMismatch) for unequal lengths, Error(EmptyEvaluation) for
/// empty input.
ClassifierReport classifier_report(std::span<const RouteLabel> predictions,
                                   std::span<const RouteLabel> golds);
Json classifier_report_to_json(const ClassifierReport& report);

struct Summary {
  std::size_t count = 0;
  double mean = 0.0;
  double median = 0.0;
  double p95 = 0.0;
};

/// Percentiles interpolate linearly between order statistics (rank p*(n-1)).
/// Throws Error(EmptyEvaluation).
Summary summarize(std::vector<double> values);

struct RouteLatency {
  Summary total;                          // sum of stage timings per record
  std::map<std::string, Summary> stages;  // only stages that occurred
};

/// Records without a route are skipped; routes without records are omitted.
/// Throws Error(EmptyEvaluation) when no record has a route.
std::map<RouteLabel, RouteLatency> latency_stats(std::span<const EvalRecord> records);
Json latency_to_json(const std::map<RouteLabel, RouteLatency>& stats);

}  // namespace qarouter
