// Copyright 2026 The qa-router Authors
// SPDX-License-Identifier: Apache-2.0

// Question routing: Bernoulli naive Bayes over unigram presence, plus an
// external backend reached through the spool protocol.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "qarouter/ipc.hpp"

namespace qarouter {

/// Two classes only. Values double as array indices.
enum class RouteLabel { Factual = 0, Sql = 1 };
inline constexpr std::size_t kRouteCount = 2;

std::string_view to_string(RouteLabel label);
/// Accepts "factual" / "sql"; anything else throws Error(MalformedBackendResponse).
RouteLabel parse_route_label(std::string_view text);

struct LabeledQuestion {
  std::string question;
  RouteLabel label = RouteLabel::Factual;
  std::string source;
};

struct NaiveBayesModel {
  std::vector<std::string> vocabulary;  // sorted, unique
  std::array<double, kRouteCount> log_prior{};
  std::array<std::vector<double>, kRouteCount> log_likelihood_present;
  std::array<std::vector<double>, kRouteCount> log_likelihood_absent;
  double smoothing_alpha = 1.0;

  std::optional<std::size_t> term_index(std::string_view term) const;
};

struct Prediction {
  RouteLabel label = RouteLabel::Factual;
  /// Normalized: exp() over labels sums to 1.
  std::array<double, kRouteCount> log_posterior{};
};

/// Throws Error(TrainingDataError) if a class is missing or a question
/// normalizes to nothing.
NaiveBayesModel train_nb(std::span<const LabeledQuestion> corpus, double smoothing_alpha = 1.0);

/// Out-of-vocabulary tokens are ignored; exact ties go to Factual.
Prediction predict(const NaiveBayesModel& model, std::string_view question);

Json model_to_json(const NaiveBayesModel& model);
NaiveBayesModel model_from_json(const Json& j);
void save_model(const NaiveBayesModel& model, const std::filesystem::path& path);
NaiveBayesModel load_model(const std::filesystem::path& path);

/// CSV with header `question,label,source`.
std::vector<LabeledQuestion> load_training_csv(const std::filesystem::path& path);

struct BuiltinClassifier {
  std::shared_ptr<const NaiveBayesModel> model;
};
using ClassifierBackend = std::variant<BuiltinClassifier, ExternalBackend>;

RouteLabel classify_route(const ClassifierBackend& backend, std::string_view question);

struct FoldResult {
  std::size_t fold = 0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  bool skipped = false;
  double f1 = 0.0;        // Sql is the positive class
  double accuracy = 0.0;
};

struct CrossValidationReport {
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::vector<FoldResult> folds;
  double mean_f1 = 0.0;
  double std_f1 = 0.0;  // sample standard deviation over evaluated folds
  std::vector<std::string> warnings;
};

/// Stratified k-fold evaluation. Throws Error(CorpusTooSmall) when k < 2 or
/// the corpus has fewer than k rows.
CrossValidationReport cross_validate(std::span<const LabeledQuestion> corpus, std::size_t k,
                                     std::uint64_t seed, double smoothing_alpha = 1.0);

Json report_to_json(const CrossValidationReport& report);

/// Fold index per corpus row. Each class is shuffled (Fisher-Yates on
/// mt19937_64 with rejection sampling, identical on every platform) and dealt
/// round-robin, so fold sizes and class ratios differ by at most one.
std::vector<std::size_t> stratified_folds(std::span<const LabeledQuestion> corpus,
                                          std::size_t k, std::uint64_t seed);

}  // namespace qarouter
