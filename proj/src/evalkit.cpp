// Copyright 2026 The qa-router Authors
// SPDX-License-Identifier: Apache-2.0

#include "qarouter/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include "qarouter/error.hpp"
#include "utf8.hpp"

namespace qarouter {

std::string normalize_answer(std::string_view text, const MetricConfig& config) {
  std::string stripped;
  std::size_t pos = 0;
  while (pos < text.size()) {
    char32_t cp = utf8::to_lower(utf8::next(text, pos));
    if (utf8::is_punctuation(cp)) continue;
    if (utf8::is_space(cp)) cp = U' ';
    utf8::append(stripped, cp);
  }
  std::string out;
  std::size_t i = 0;
  while (i < stripped.size()) {
    while (i < stripped.size() && stripped[i] == ' ') ++i;
    std::size_t j = i;
    while (j < stripped.size() && stripped[j] != ' ') ++j;
    if (j > i) {
      const std::string_view word(stripped.data() + i, j - i);
      const bool article = config.strip_articles && std::find(config.articles.begin(),
                                                              config.articles.end(),
                                                              word) != config.articles.end();
      if (!article) {
        if (!out.empty()) out += ' ';
        out += word;
      }
    }
    i = j;
  }
  return out;
}

namespace {

std::vector<std::string> answer_tokens(std::string_view text, const MetricConfig& config) {
  std::vector<std::string> tokens;
  const std::string n = normalize_answer(text, config);
  std::size_t i = 0;
  while (i < n.size()) {
    const std::size_t j = std::min(n.find(' ', i), n.size());
    tokens.emplace_back(n.substr(i, j - i));
    i = j + 1;
  }
  return tokens;
}

[[noreturn]] void empty_evaluation(const char* what) {
  throw Error(ErrorCode::EmptyEvaluation, std::string(what) + ": no records");
}

}  // namespace

int exact_match(std::string_view prediction, std::span<const std::string> golds,
                const MetricConfig& config) {
  if (golds.empty()) throw std::invalid_argument("exact_match needs at least one gold answer");
  const std::string p = normalize_answer(prediction, config);
  for (const auto& g : golds) {
    if (normalize_answer(g, config) == p) return 1;
  }
  return 0;
}

double token_f1(std::string_view prediction, std::string_view gold, const MetricConfig& config) {
  const auto p = answer_tokens(prediction, config);
  const auto g = answer_tokens(gold, config);
  if (p.empty() && g.empty()) return 1.0;
  if (p.empty() || g.empty()) return 0.0;
  std::unordered_map<std::string_view, int> counts;
  for (const auto& t : g) ++counts[t];
  std::size_t common = 0;
  for (const auto& t : p) {
    auto it = counts.find(t);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++common;
    }
  }
  if (common == 0) return 0.0;
  const double precision = static_cast<double>(common) / static_cast<double>(p.size());
  const double recall = static_cast<double>(common) / static_cast<double>(g.size());
  return 2.0 * precision * recall / (precision + recall);
}

double best_f1(std::string_view prediction, std::span<const std::string> golds,
               const MetricConfig& config) {
  if (golds.empty()) throw std::invalid_argument("best_f1 needs at least one gold answer");
  double best = 0.0;
  for (const auto& g : golds) best = std::max(best, token_f1(prediction, g, config));
  return best;
}

double macro_avg_f1(std::span<const EvalRecord> records, const MetricConfig& config) {
  if (records.empty()) empty_evaluation("macro_avg_f1");
  double sum = 0.0;
  for (const auto& r : records) sum += best_f1(r.prediction, r.golds, config);
  return sum / static_cast<double>(records.size());
}

double mean_exact_match(std::span<const EvalRecord> records, const MetricConfig& config) {
  if (records.empty()) empty_evaluation("exact_match");
  double sum = 0.0;
  for (const auto& r : records) sum += exact_match(r.prediction, r.golds, config);
  return sum / static_cast<double>(records.size());
}

ClassifierReport classifier_report(std::span<const RouteLabel> predictions,
                                   std::span<const RouteLabel> golds) {
  if (predictions.size() != golds.size()) {
    throw Error(ErrorCode::LengthMismatch, std::to_string(predictions.size()) + " predictions for " +
                                               std::to_string(golds.size()) + " gold labels");
  }
  if (golds.empty()) empty_evaluation("classifier_report");
  ClassifierReport r;
  r.n = golds.size();
  std::size_t correct = 0;
  for (std::size_t i = 0; i < golds.size(); ++i) {
    ++r.confusion[static_cast<std::size_t>(golds[i])][static_cast<std::size_t>(predictions[i])];
    correct += golds[i] == predictions[i];
  }
  r.accuracy = static_cast<double>(correct) / static_cast<double>(r.n);
  for (std::size_t c = 0; c < kRouteCount; ++c) {
    std::size_t predicted = 0;
    std::size_t actual = 0;
    for (std::size_t o = 0; o < kRouteCount; ++o) {
      predicted += r.confusion[o][c];
      actual += r.confusion[c][o];
    }
    const double tp = static_cast<double>(r.confusion[c][c]);
    auto& m = r.per_class[c];
    m.support = actual;
    m.precision = predicted ? tp / static_cast<double>(predicted) : 0.0;
    m.recall = actual ? tp / static_cast<double>(actual) : 0.0;
    m.f1 = m.precision + m.recall > 0 ? 2 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  }
  return r;
}

Json classifier_report_to_json(const ClassifierReport& report) {
  Json j;
  j["n"] = report.n;
  j["accuracy"] = report.accuracy;
  for (std::size_t c = 0; c < kRouteCount; ++c) {
    const auto& m = report.per_class[c];
    const std::string name(to_string(static_cast<RouteLabel>(c)));
    j["per_class"][name] = {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1},
                            {"support", m.support}};
  }
  for (std::size_t g = 0; g < kRouteCount; ++g) {
    for (std::size_t p = 0; p < kRouteCount; ++p) {
      j["confusion"][std::string(to_string(static_cast<RouteLabel>(g)))]
       [std::string(to_string(static_cast<RouteLabel>(p)))] = report.confusion[g][p];
    }
  }
  return j;
}

namespace {

double percentile(const std::vector<double>& sorted, double p) {
  const double rank = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (rank - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

Summary summarize(std::vector<double> values) {
  if (values.empty()) empty_evaluation("summarize");
  std::sort(values.begin(), values.end());
  Summary s;
  s.count = values.size();
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  s.median = percentile(values, 0.5);
  s.p95 = percentile(values, 0.95);
  return s;
}

std::map<RouteLabel, RouteLatency> latency_stats(std::span<const EvalRecord> records) {
  std::map<RouteLabel, std::vector<double>> totals;
  std::map<RouteLabel, std::map<std::string, std::vector<double>>> stages;
  for (const auto& r : records) {
    if (!r.route) continue;
    double total = 0.0;
    for (const auto& t : r.timings) {
      total += t.seconds;
      stages[*r.route][t.stage].push_back(t.seconds);
    }
    totals[*r.route].push_back(total);
  }
  if (totals.empty()) empty_evaluation("latency_stats");
  std::map<RouteLabel, RouteLatency> out;
  for (auto& [route, values] : totals) {
    RouteLatency& l = out[route];
    l.total = summarize(std::move(values));
    for (auto& [stage, v] : stages[route]) l.stages[stage] = summarize(std::move(v));
  }
  return out;
}

Json latency_to_json(const std::map<RouteLabel, RouteLatency>& stats) {
  const auto summary = [](const Summary& s) {
    return Json{{"count", s.count}, {"mean", s.mean}, {"median", s.median}, {"p95", s.p95}};
  };
  Json j = Json::object();
  for (const auto& [route, l] : stats) {
    Json r;
    r["total_seconds"] = summary(l.total);
    r["stages"] = Json::object();
    for (const auto& [stage, s] : l.stages) r["stages"][stage] = summary(s);
    j[std::string(to_string(route))] = std::move(r);
  }
  return j;
}

}  // namespace qarouter
