#include "wslab/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace wslab::eval {

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw InvalidInput("roc_auc: scores and labels differ in length");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  double positive_rank_sum = 0.0;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) {
      const int y = labels[order[k]];
      if (y != 0 && y != 1) throw InvalidInput("roc_auc: labels must be 0 or 1");
      if (y == 1) {
        positive_rank_sum += midrank;
        ++positives;
      }
    }
    i = j + 1;
  }
  const std::size_t negatives = n - positives;
  if (positives == 0 || negatives == 0) throw InvalidInput("roc_auc: both classes must be present");
  const double p = static_cast<double>(positives);
  const double u = positive_rank_sum - p * (p + 1.0) / 2.0;
  return u / (p * static_cast<double>(negatives));
}

double f1_score(std::span<const int> preds, std::span<const int> labels) {
  if (preds.size() != labels.size()) throw InvalidInput("f1: predictions and labels differ in length");
  double tp = 0.0;
  double fp = 0.0;
  double fn = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] == 1 && labels[i] == 1) tp += 1.0;
    else if (preds[i] == 1) fp += 1.0;
    else if (labels[i] == 1) fn += 1.0;
  }
  if (tp == 0.0) return 0.0;
  const double precision = tp / (tp + fp);
  const double recall = tp / (tp + fn);
  return 2.0 * precision * recall / (precision + recall);
}

std::vector<int> threshold_predictions(std::span<const double> scores, double threshold) {
  std::vector<int> out(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) out[i] = scores[i] >= threshold ? 1 : 0;
  return out;
}

double tune_threshold_f1(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw InvalidInput("tune_threshold_f1: length mismatch");
  const auto positives = std::count(labels.begin(), labels.end(), 1);
  if (positives == 0 || positives == static_cast<std::ptrdiff_t>(labels.size())) {
    throw InvalidInput("tune_threshold_f1: degenerate validation set (needs both classes)");
  }
  std::vector<double> unique(scores.begin(), scores.end());
  std::sort(unique.begin(), unique.end());
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());

  std::vector<double> candidates{0.0, 1.0};
  for (std::size_t i = 1; i < unique.size(); ++i) candidates.push_back(0.5 * (unique[i - 1] + unique[i]));
  std::sort(candidates.begin(), candidates.end());

  double best_threshold = candidates.front();
  double best_f1 = -1.0;
  for (const double t : candidates) {
    const double f = f1_score(threshold_predictions(scores, t), labels);
    if (f > best_f1) {
      best_f1 = f;
      best_threshold = t;
    }
  }
  return best_threshold;
}

double accuracy(std::span<const int> preds, std::span<const int> labels) {
  if (preds.size() != labels.size()) throw InvalidInput("accuracy: length mismatch");
  if (preds.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) hits += preds[i] == labels[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(preds.size());
}

std::vector<int> to_binary(std::span<const int> labels) {
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 1 && labels[i] != 2) throw InvalidInput("to_binary: labels must be 1 or 2");
    out[i] = labels[i] == 2 ? 1 : 0;
  }
  return out;
}

std::vector<int> argmax_classes(const Matrix& probs) {
  std::vector<int> out(static_cast<std::size_t>(probs.rows()));
  for (Index i = 0; i < probs.rows(); ++i) {
    Index best = 0;
    probs.row(i).maxCoeff(&best);
    out[static_cast<std::size_t>(i)] = static_cast<int>(best) + 1;
  }
  return out;
}

double macro_auc(const Matrix& probs, std::span<const int> labels) {
  const auto classes = static_cast<int>(probs.cols());
  if (classes == 2) {
    Vector col = probs.col(1);
    std::vector<double> scores(col.data(), col.data() + col.size());
    return roc_auc(scores, to_binary(labels));
  }
  double total = 0.0;
  int used = 0;
  for (int c = 1; c <= classes; ++c) {
    std::vector<int> onevsrest(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) onevsrest[i] = labels[i] == c ? 1 : 0;
    const auto pos = std::count(onevsrest.begin(), onevsrest.end(), 1);
    if (pos == 0 || pos == static_cast<std::ptrdiff_t>(onevsrest.size())) continue;
    Vector col = probs.col(c - 1);
    std::vector<double> scores(col.data(), col.data() + col.size());
    total += roc_auc(scores, onevsrest);
    ++used;
  }
  if (used == 0) throw InvalidInput("macro_auc: no class has both positives and negatives");
  return total / used;
}

MetricsReport make_report(const Matrix& probs, std::span<const int> labels, std::optional<double> threshold,
                          std::uint64_t seed) {
  if (probs.rows() != static_cast<Index>(labels.size())) throw InvalidInput("make_report: length mismatch");
  MetricsReport r;
  r.n = probs.rows();
  r.seed = seed;
  r.auc = macro_auc(probs, labels);
  if (probs.cols() == 2) {
    Vector col = probs.col(1);
    std::vector<double> scores(col.data(), col.data() + col.size());
    const double t = threshold.value_or(0.5);
    const auto binary = to_binary(labels);
    const auto preds = threshold_predictions(scores, t);
    r.threshold = t;
    r.f1 = f1_score(preds, binary);
    r.accuracy = accuracy(preds, binary);
  } else {
    r.accuracy = accuracy(argmax_classes(probs), labels);
    r.f1 = r.accuracy;
  }
  return r;
}

MetricsReport tuned_report(const Matrix& val_probs, std::span<const int> val_labels, const Matrix& test_probs,
                           std::span<const int> test_labels, std::uint64_t seed) {
  std::optional<double> threshold;
  if (test_probs.cols() == 2 && val_probs.rows() > 0) {
    if (val_probs.rows() != static_cast<Index>(val_labels.size())) throw InvalidInput("tuned_report: length mismatch");
    Vector col = val_probs.col(1);
    const std::vector<double> scores(col.data(), col.data() + col.size());
    threshold = tune_threshold_f1(scores, to_binary(val_labels));
  }
  return make_report(test_probs, test_labels, threshold, seed);
}

nlohmann::json to_json(const MetricsReport& r) {
  nlohmann::json j = {{"auc", r.auc}, {"f1", r.f1}, {"accuracy", r.accuracy}, {"n", r.n}, {"seed", r.seed}};
  j["threshold"] = r.threshold ? nlohmann::json(*r.threshold) : nlohmann::json(nullptr);
  return j;
}

MetricSummary summarize(std::span<const double> values) {
  if (values.empty()) throw InvalidInput("summarize: no values");
  // Sorted accumulation keeps the result independent of input order.
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  values = sorted;
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (const double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / n)};
}

AggregateReport seed_aggregate(std::span<const MetricsReport> reports) {
  if (reports.empty()) throw InvalidInput("seed_aggregate: empty report list");
  std::vector<double> auc;
  std::vector<double> f1;
  std::vector<double> acc;
  for (const auto& r : reports) {
    auc.push_back(r.auc);
    f1.push_back(r.f1);
    acc.push_back(r.accuracy);
  }
  return {summarize(auc), summarize(f1), summarize(acc), reports.size()};
}

double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw InvalidInput("quantile: no values");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

}  // namespace wslab::eval
