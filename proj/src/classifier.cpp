// Copyright 2026 The qa-router Authors
// SPDX-License-Identifier: Apache-2.0

#include "qarouter/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "qarouter/csv.hpp"
#include "qarouter/error.hpp"
#include "qarouter/textprep.hpp"

namespace qarouter {
namespace {

constexpr int kModelFormatVersion = 1;
constexpr const char* kModelFormat = "qa-router/naive-bayes";

std::set<std::string> token_set(std::string_view question) {
  const TokenSeq tokens = tokenize(normalize_question(question).text);
  return {tokens.begin(), tokens.end()};
}

std::uint64_t uniform_below(std::mt19937_64& engine, std::uint64_t n) {
  const std::uint64_t limit = std::mt19937_64::max() - std::mt19937_64::max() % n;
  for (;;) {
    const std::uint64_t v = engine();
    if (v < limit) return v % n;
  }
}

double binary_f1(std::size_t tp, std::size_t fp, std::size_t fn) {
  // No positives in the fold and none predicted counts as perfect agreement.
  if (tp + fp + fn == 0) return 1.0;
  return 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
}

}  // namespace

std::string_view to_string(RouteLabel label) {
  return label == RouteLabel::Sql ? "sql" : "factual";
}

RouteLabel parse_route_label(std::string_view text) {
  if (text == "factual") return RouteLabel::Factual;
  if (text == "sql") return RouteLabel::Sql;
  throw Error(ErrorCode::MalformedBackendResponse,
              "route label must be \"factual\" or \"sql\", got \"" + std::string(text) + "\"");
}

std::optional<std::size_t> NaiveBayesModel::term_index(std::string_view term) const {
  const auto it = std::lower_bound(vocabulary.begin(), vocabulary.end(), term);
  if (it == vocabulary.end() || *it != term) return std::nullopt;
  return static_cast<std::size_t>(it - vocabulary.begin());
}

NaiveBayesModel train_nb(std::span<const LabeledQuestion> corpus, double smoothing_alpha) {
  if (!(smoothing_alpha > 0.0)) {
    throw Error(ErrorCode::TrainingDataError, "smoothing_alpha must be positive");
  }
  std::array<std::size_t, kRouteCount> class_count{};
  std::map<std::string, std::array<std::size_t, kRouteCount>> presence;
  for (std::size_t row = 0; row < corpus.size(); ++row) {
    const auto& example = corpus[row];
    std::set<std::string> tokens;
    try {
      tokens = token_set(example.question);
    } catch (const Error&) {
      throw Error(ErrorCode::TrainingDataError,
                  "training row " + std::to_string(row + 1) + " is empty after normalization");
    }
    const auto c = static_cast<std::size_t>(example.label);
    ++class_count[c];
    for (const auto& t : tokens) ++presence[t][c];
  }
  for (std::size_t c = 0; c < kRouteCount; ++c) {
    if (class_count[c] == 0) {
      throw Error(ErrorCode::TrainingDataError,
                  "training corpus has no '" +
                      std::string(to_string(static_cast<RouteLabel>(c))) + "' examples");
    }
  }

  NaiveBayesModel model;
  model.smoothing_alpha = smoothing_alpha;
  const double total = static_cast<double>(class_count[0] + class_count[1]);
  for (std::size_t c = 0; c < kRouteCount; ++c) {
    model.log_prior[c] = std::log(static_cast<double>(class_count[c]) / total);
    model.log_likelihood_present[c].reserve(presence.size());
    model.log_likelihood_absent[c].reserve(presence.size());
  }
  for (const auto& [term, counts] : presence) {
    model.vocabulary.push_back(term);
    for (std::size_t c = 0; c < kRouteCount; ++c) {
      const double n_c = static_cast<double>(class_count[c]);
      const double n_ct = static_cast<double>(counts[c]);
      const double denom = n_c + 2.0 * smoothing_alpha;
      model.log_likelihood_present[c].push_back(std::log((n_ct + smoothing_alpha) / denom));
      model.log_likelihood_absent[c].push_back(
          std::log((n_c - n_ct + smoothing_alpha) / denom));
    }
  }
  return model;
}

Prediction predict(const NaiveBayesModel& model, std::string_view question) {
  const std::set<std::string> tokens = token_set(question);
  std::vector<bool> present(model.vocabulary.size(), false);
  for (const auto& t : tokens) {
    if (auto idx = model.term_index(t)) present[*idx] = true;
  }

  std::array<double, kRouteCount> joint{};
  for (std::size_t c = 0; c < kRouteCount; ++c) {
    double sum = model.log_prior[c];
    for (std::size_t i = 0; i < model.vocabulary.size(); ++i) {
      sum += present[i] ? model.log_likelihood_present[c][i] : model.log_likelihood_absent[c][i];
    }
    joint[c] = sum;
  }
  const double peak = std::max(joint[0], joint[1]);
  const double lse = peak + std::log(std::exp(joint[0] - peak) + std::exp(joint[1] - peak));

  Prediction p;
  for (std::size_t c = 0; c < kRouteCount; ++c) p.log_posterior[c] = joint[c] - lse;
  // Differences at rounding level count as ties, which go to Factual.
  const double tie_band = 1e-12 * std::max(1.0, std::abs(joint[0]));
  p.label = joint[1] - joint[0] > tie_band ? RouteLabel::Sql : RouteLabel::Factual;
  return p;
}

Json model_to_json(const NaiveBayesModel& model) {
  Json j;
  j["format"] = kModelFormat;
  j["version"] = kModelFormatVersion;
  j["smoothing_alpha"] = model.smoothing_alpha;
  j["vocabulary"] = model.vocabulary;
  for (std::size_t c = 0; c < kRouteCount; ++c) {
    const std::string label(to_string(static_cast<RouteLabel>(c)));
    j["log_prior"][label] = model.log_prior[c];
    j["log_likelihood_present"][label] = model.log_likelihood_present[c];
    j["log_likelihood_absent"][label] = model.log_likelihood_absent[c];
  }
  return j;
}

NaiveBayesModel model_from_json(const Json& j) {
  try {
    if (j.at("format").get<std::string>() != kModelFormat ||
        j.at("version").get<int>() != kModelFormatVersion) {
      throw Error(ErrorCode::SerializationError, "unsupported model format/version");
    }
    NaiveBayesModel m;
    m.smoothing_alpha = j.at("smoothing_alpha").get<double>();
    m.vocabulary = j.at("vocabulary").get<std::vector<std::string>>();
    if (!std::is_sorted(m.vocabulary.begin(), m.vocabulary.end()) ||
        std::adjacent_find(m.vocabulary.begin(), m.vocabulary.end()) != m.vocabulary.end()) {
      throw Error(ErrorCode::SerializationError, "model vocabulary must be sorted and unique");
    }
    for (std::size_t c = 0; c < kRouteCount; ++c) {
      const std::string label(to_string(static_cast<RouteLabel>(c)));
      m.log_prior[c] = j.at("log_prior").at(label).get<double>();
      m.log_likelihood_present[c] = j.at("log_likelihood_present").at(label).get<std::vector<double>>();
      m.log_likelihood_absent[c] = j.at("log_likelihood_absent").at(label).get<std::vector<double>>();
      if (m.log_likelihood_present[c].size() != m.vocabulary.size() ||
          m.log_likelihood_absent[c].size() != m.vocabulary.size()) {
        throw Error(ErrorCode::SerializationError, "likelihood table size mismatch");
      }
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SerializationError, std::string("bad model document: ") + e.what());
  }
}

void save_model(const NaiveBayesModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << model_to_json(model).dump(1) << '\n';
}

NaiveBayesModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open model " + path.string());
  try {
    return model_from_json(Json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SerializationError, path.string() + ": " + e.what());
  }
}

std::vector<LabeledQuestion> load_training_csv(const std::filesystem::path& path) {
  const auto rows = csv::read_file(path);
  if (rows.empty()) throw Error(ErrorCode::TrainingDataError, path.string() + " is empty");
  const auto& header = rows.front().cells;
  if (header.size() < 2 || header[0] != "question" || header[1] != "label" ||
      (header.size() > 2 && header[2] != "source") || header.size() > 3) {
    throw Error(ErrorCode::TrainingDataError,
                path.string() + ": header must be question,label,source");
  }
  std::vector<LabeledQuestion> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& cells = rows[i].cells;
    if (cells.size() != header.size()) {
      throw Error(ErrorCode::TrainingDataError,
                  path.string() + ":" + std::to_string(rows[i].line) + ": wrong column count");
    }
    LabeledQuestion q;
    q.question = cells[0];
    if (cells[1] == "factual") q.label = RouteLabel::Factual;
    else if (cells[1] == "sql") q.label = RouteLabel::Sql;
    else {
      throw Error(ErrorCode::TrainingDataError, path.string() + ":" +
                                                    std::to_string(rows[i].line) +
                                                    ": label must be factual or sql");
    }
    if (cells.size() > 2) q.source = cells[2];
    out.push_back(std::move(q));
  }
  return out;
}

RouteLabel classify_route(const ClassifierBackend& backend, std::string_view question) {
  if (const auto* builtin = std::get_if<BuiltinClassifier>(&backend)) {
    if (!builtin->model) throw Error(ErrorCode::ConfigError, "builtin classifier has no model");
    return predict(*builtin->model, question).label;
  }
  const auto& external = std::get<ExternalBackend>(backend);
  Json request;
  request["question"] = std::string(question);
  const Json response = call_external(external, Role::Classifier, std::move(request));
  return parse_route_label(response.at("label").get<std::string>());
}

std::vector<std::size_t> stratified_folds(std::span<const LabeledQuestion> corpus, std::size_t k,
                                          std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  std::vector<std::size_t> fold_of(corpus.size(), 0);
  std::size_t dealt = 0;
  for (std::size_t c = 0; c < kRouteCount; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      if (static_cast<std::size_t>(corpus[i].label) == c) members.push_back(i);
    }
    for (std::size_t i = members.size(); i > 1; --i) {
      std::swap(members[i - 1], members[uniform_below(engine, i)]);
    }
    for (std::size_t idx : members) fold_of[idx] = dealt++ % k;
  }
  return fold_of;
}

CrossValidationReport cross_validate(std::span<const LabeledQuestion> corpus, std::size_t k,
                                     std::uint64_t seed, double smoothing_alpha) {
  if (k < 2 || corpus.size() < k) {
    throw Error(ErrorCode::CorpusTooSmall, "cross-validation needs k >= 2 and at least k rows (k=" +
                                               std::to_string(k) + ", rows=" +
                                               std::to_string(corpus.size()) + ")");
  }
  CrossValidationReport report;
  report.k = k;
  report.seed = seed;
  const auto fold_of = stratified_folds(corpus, k, seed);

  std::vector<double> scores;
  for (std::size_t fold = 0; fold < k; ++fold) {
    std::vector<LabeledQuestion> train;
    std::vector<const LabeledQuestion*> test;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      if (fold_of[i] == fold) test.push_back(&corpus[i]);
      else train.push_back(corpus[i]);
    }
    FoldResult result;
    result.fold = fold;
    result.n_train = train.size();
    result.n_test = test.size();

    const bool has_factual = std::any_of(train.begin(), train.end(), [](const auto& q) {
      return q.label == RouteLabel::Factual;
    });
    const bool has_sql = std::any_of(train.begin(), train.end(), [](const auto& q) {
      return q.label == RouteLabel::Sql;
    });
    if (!has_factual || !has_sql) {
      result.skipped = true;
      report.warnings.push_back("fold " + std::to_string(fold) +
                                " skipped: training split lacks a class");
      report.folds.push_back(result);
      continue;
    }

    const NaiveBayesModel model = train_nb(train, smoothing_alpha);
    std::size_t tp = 0, fp = 0, fn = 0, correct = 0;
    for (const LabeledQuestion* q : test) {
      const RouteLabel predicted = predict(model, q->question).label;
      if (predicted == q->label) ++correct;
      if (predicted == RouteLabel::Sql && q->label == RouteLabel::Sql) ++tp;
      if (predicted == RouteLabel::Sql && q->label == RouteLabel::Factual) ++fp;
      if (predicted == RouteLabel::Factual && q->label == RouteLabel::Sql) ++fn;
    }
    result.f1 = binary_f1(tp, fp, fn);
    result.accuracy = static_cast<double>(correct) / static_cast<double>(test.size());
    scores.push_back(result.f1);
    report.folds.push_back(result);
  }

  if (scores.empty()) {
    throw Error(ErrorCode::TrainingDataError, "every fold was skipped");
  }
  const double n = static_cast<double>(scores.size());
  report.mean_f1 = std::accumulate(scores.begin(), scores.end(), 0.0) / n;
  if (scores.size() > 1) {
    double ss = 0.0;
    for (double s : scores) ss += (s - report.mean_f1) * (s - report.mean_f1);
    report.std_f1 = std::sqrt(ss / (n - 1.0));
  }
  return report;
}

Json report_to_json(const CrossValidationReport& report) {
  Json j;
  j["k"] = report.k;
  j["seed"] = report.seed;
  j["mean_f1"] = report.mean_f1;
  j["std_f1"] = report.std_f1;
  j["positive_class"] = "sql";
  j["folds"] = Json::array();
  for (const auto& f : report.folds) {
    Json fold;
    fold["fold"] = f.fold;
    fold["n_train"] = f.n_train;
    fold["n_test"] = f.n_test;
    fold["skipped"] = f.skipped;
    if (!f.skipped) {
      fold["f1"] = f.f1;
      fold["accuracy"] = f.accuracy;
    }
    j["folds"].push_back(fold);
  }
  j["warnings"] = report.warnings;
  return j;
}

}  // namespace qarouter
