#pragma once

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wslab/data/label_matrix.hpp"

namespace wslab::labelmodels {

enum class TripletAggregation { Single, Mean, Median };

std::string to_string(TripletAggregation agg);
TripletAggregation triplet_aggregation_from_string(const std::string& name);

/// Closed-form binary accuracy estimates from pairwise vote agreement.
struct TripletEstimate {
  static constexpr double kDelta = 1e-3;
  static constexpr double kMinPairMoment = 1e-3;

  /// P(vote correct | vote), clamped to [0.5 + delta, 1 - delta].
  std::vector<double> accuracy;
  /// Unclamped correlation-scale estimates E[lambda_j * y] in {-1,0,+1} coding.
  std::vector<double> correlation;
  TripletAggregation aggregation = TripletAggregation::Mean;
  /// LFs with no admissible triplet; they were set to 0.5 + delta.
  std::vector<Index> fallbacks;
};

/// Second moments of the {-1, 0, +1}-coded votes (class 1 -> -1,
/// class 2 -> +1), each pair averaged over the rows where both LFs vote.
/// Pairs that never co-vote get NaN.
Matrix triplet_moments(const data::LabelMatrix& lm);

/// Correlation-scale estimates from a moment matrix: for LF i and every
/// admissible pair (j, k) (|M_jk| >= 1e-3), sqrt(|M_ij * M_ik / M_jk|),
/// aggregated per `agg`. LFs without an admissible pair get NaN.
std::vector<double> triplet_from_moments(const Matrix& moments, TripletAggregation agg);

/// Requires C = 2 and at least 3 LFs.
TripletEstimate triplet_fit(const data::LabelMatrix& lm, TripletAggregation agg);

/// Naive-Bayes posterior with symmetric confusions given by the estimated
/// accuracies; abstaining LFs are ignored.
Matrix triplet_posterior(const TripletEstimate& est, const data::LabelMatrix& lm, std::span<const double> prior);

nlohmann::json to_json(const TripletEstimate& est);

}  // namespace wslab::labelmodels
