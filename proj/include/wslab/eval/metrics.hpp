#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wslab/common/types.hpp"

namespace wslab::eval {

/// Area under the ROC curve via the Mann-Whitney U statistic; tied scores
/// get midranks. `labels` are binary {0, 1}; throws unless both occur.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

/// Precision/recall harmonic mean on class 1; zero denominators give 0.
double f1_score(std::span<const int> preds, std::span<const int> labels);

/// Binary predictions `score >= threshold`.
std::vector<int> threshold_predictions(std::span<const double> scores, double threshold);

/// Candidate thresholds: {0, 1} plus midpoints between consecutive sorted
/// unique scores. Returns the arg-max validation F1, smallest on ties.
double tune_threshold_f1(std::span<const double> scores, std::span<const int> labels);

double accuracy(std::span<const int> preds, std::span<const int> labels);

/// Class labels {1..C} -> binary {0, 1} with class 2 as the positive class.
std::vector<int> to_binary(std::span<const int> labels);

/// Arg-max class (1-based) per row of a probability matrix.
std::vector<int> argmax_classes(const Matrix& probs);

/// Mean one-vs-rest AUC over classes; equals roc_auc on column 2 when C=2.
double macro_auc(const Matrix& probs, std::span<const int> labels);

struct MetricsReport {
  double auc = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;
  std::optional<double> threshold;  // binary only
  Index n = 0;
  std::uint64_t seed = 0;
};

/// Binary: AUC on P(class 2), F1/accuracy at `threshold` (0.5 if absent).
/// Multi-class: macro AUC, arg-max accuracy, macro-free F1 = accuracy.
MetricsReport make_report(const Matrix& probs, std::span<const int> labels, std::optional<double> threshold,
                          std::uint64_t seed);

nlohmann::json to_json(const MetricsReport& r);

/// Binary: F1 threshold tuned on the validation probabilities, then the
/// test report at that threshold. An empty validation set falls back to 0.5.
MetricsReport tuned_report(const Matrix& val_probs, std::span<const int> val_labels, const Matrix& test_probs,
                           std::span<const int> test_labels, std::uint64_t seed);

struct MetricSummary {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
};

struct AggregateReport {
  MetricSummary auc;
  MetricSummary f1;
  MetricSummary accuracy;
  std::size_t count = 0;
};

AggregateReport seed_aggregate(std::span<const MetricsReport> reports);
MetricSummary summarize(std::span<const double> values);
double median(std::vector<double> values);
/// Linear-interpolated quantile, q in [0, 1].
double quantile(std::vector<double> values, double q);

}  // namespace wslab::eval
