#include "wslab/labelmodels/triplet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wslab/eval/metrics.hpp"

namespace wslab::labelmodels {

std::string to_string(TripletAggregation agg) {
  switch (agg) {
    case TripletAggregation::Single: return "single";
    case TripletAggregation::Mean: return "mean";
    case TripletAggregation::Median: return "median";
  }
  return "unknown";
}

TripletAggregation triplet_aggregation_from_string(const std::string& name) {
  if (name == "single") return TripletAggregation::Single;
  if (name == "mean") return TripletAggregation::Mean;
  if (name == "median") return TripletAggregation::Median;
  throw InvalidInput("unknown triplet aggregation '" + name + "'");
}

Matrix triplet_moments(const data::LabelMatrix& lm) {
  lm.require_discrete("triplet");
  if (lm.num_classes() != 2) throw InvalidInput("triplet: needs binary votes (C = 2)");
  const Index m = lm.num_lfs();
  // Signed votes as a dense matrix so both sums are plain products.
  Matrix signed_votes(lm.rows(), m);
  Matrix active(lm.rows(), m);
  for (Index i = 0; i < lm.rows(); ++i)
    for (Index j = 0; j < m; ++j) {
      const int v = lm.vote(i, j);
      signed_votes(i, j) = v == 0 ? 0.0 : (v == 2 ? 1.0 : -1.0);
      active(i, j) = v == 0 ? 0.0 : 1.0;
    }
  const Matrix sums = signed_votes.transpose() * signed_votes;
  const Matrix counts = active.transpose() * active;
  Matrix moments(m, m);
  for (Index a = 0; a < m; ++a)
    for (Index b = 0; b < m; ++b)
      moments(a, b) = counts(a, b) > 0.0 ? sums(a, b) / counts(a, b) : std::numeric_limits<double>::quiet_NaN();
  return moments;
}

std::vector<double> triplet_from_moments(const Matrix& moments, TripletAggregation agg) {
  const Index m = moments.rows();
  if (moments.cols() != m) throw InvalidInput("triplet: moment matrix must be square");
  std::vector<double> out(static_cast<std::size_t>(m), std::numeric_limits<double>::quiet_NaN());
  std::vector<double> candidates;
  for (Index i = 0; i < m; ++i) {
    candidates.clear();
    for (Index j = 0; j < m && !(agg == TripletAggregation::Single && !candidates.empty()); ++j) {
      if (j == i) continue;
      for (Index k = j + 1; k < m; ++k) {
        if (k == i) continue;
        const double mij = moments(i, j);
        const double mik = moments(i, k);
        const double mjk = moments(j, k);
        if (std::isnan(mij) || std::isnan(mik) || std::isnan(mjk)) continue;
        if (std::abs(mjk) < TripletEstimate::kMinPairMoment) continue;
        candidates.push_back(std::sqrt(std::abs(mij * mik / mjk)));
        if (agg == TripletAggregation::Single) break;
      }
    }
    if (candidates.empty()) continue;
    double estimate = 0.0;
    switch (agg) {
      case TripletAggregation::Single: estimate = candidates.front(); break;
      case TripletAggregation::Mean: {
        for (const double c : candidates) estimate += c;
        estimate /= static_cast<double>(candidates.size());
        break;
      }
      case TripletAggregation::Median: estimate = eval::median(candidates); break;
    }
    out[static_cast<std::size_t>(i)] = estimate;
  }
  return out;
}

TripletEstimate triplet_fit(const data::LabelMatrix& lm, TripletAggregation agg) {
  if (lm.num_classes() != 2) throw InvalidInput("triplet: needs binary votes (C = 2)");
  if (lm.num_lfs() < 3) throw InvalidInput("triplet: needs at least 3 labeling functions");
  TripletEstimate est;
  est.aggregation = agg;
  est.correlation = triplet_from_moments(triplet_moments(lm), agg);
  for (std::size_t j = 0; j < est.correlation.size(); ++j) {
    double acc = 0.5 + TripletEstimate::kDelta;
    if (std::isnan(est.correlation[j])) {
      est.fallbacks.push_back(static_cast<Index>(j));
    } else {
      acc = std::clamp((est.correlation[j] + 1.0) / 2.0, 0.5 + TripletEstimate::kDelta, 1.0 - TripletEstimate::kDelta);
    }
    est.accuracy.push_back(acc);
  }
  return est;
}

Matrix triplet_posterior(const TripletEstimate& est, const data::LabelMatrix& lm, std::span<const double> prior) {
  lm.require_discrete("triplet");
  if (lm.num_classes() != 2) throw InvalidInput("triplet: needs binary votes (C = 2)");
  if (static_cast<std::size_t>(lm.num_lfs()) != est.accuracy.size()) {
    throw InvalidInput("triplet_posterior: label matrix does not match the estimate");
  }
  if (prior.size() != 2 || !(prior[0] > 0.0) || !(prior[1] > 0.0)) {
    throw InvalidInput("triplet_posterior: prior must have two positive entries");
  }
  Matrix out(lm.rows(), 2);
  for (Index i = 0; i < lm.rows(); ++i) {
    double l1 = std::log(prior[0]);
    double l2 = std::log(prior[1]);
    for (Index j = 0; j < lm.num_lfs(); ++j) {
      const int v = lm.vote(i, j);
      if (v == 0) continue;
      const double a = est.accuracy[static_cast<std::size_t>(j)];
      l1 += std::log(v == 1 ? a : 1.0 - a);
      l2 += std::log(v == 2 ? a : 1.0 - a);
    }
    const double mx = std::max(l1, l2);
    const double e1 = std::exp(l1 - mx);
    const double e2 = std::exp(l2 - mx);
    out(i, 0) = e1 / (e1 + e2);
    out(i, 1) = e2 / (e1 + e2);
  }
  return out;
}

nlohmann::json to_json(const TripletEstimate& est) {
  nlohmann::json corr = nlohmann::json::array();
  for (const double c : est.correlation) corr.push_back(std::isnan(c) ? nlohmann::json(nullptr) : nlohmann::json(c));
  return {{"model", "triplet-" + to_string(est.aggregation)},
          {"accuracy", est.accuracy},
          {"correlation", corr},
          {"fallbacks", est.fallbacks}};
}

}  // namespace wslab::labelmodels
