#pragma once

#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "wslab/data/label_matrix.hpp"

namespace wslab::labelmodels {

/// Dawid-Skene style generative model with conditionally independent LFs.
///
/// confusion[j](v, c) = P(lambda_j = v | y = c + 1) for v in 0..C, where
/// v = 0 is the abstain outcome. Every column sums to 1.
struct NaiveBayesModel {
  int num_classes = 2;
  std::vector<Matrix> confusion;
  std::vector<double> prior;

  int iterations = 0;
  bool converged = false;
  /// Per-iteration log-likelihood of the covered rows.
  std::vector<double> log_likelihood;
  /// Log-likelihood plus the Dirichlet log-density implied by the Laplace
  /// smoothing; this is the quantity EM cannot decrease.
  std::vector<double> objective;
};

struct EmOptions {
  int max_iters = 200;
  double tol = 1e-6;
  double smoothing = 1.0;
};

/// EM on the covered rows, initialized from majority-vote soft labels.
/// The class prior stays fixed at `prior`.
NaiveBayesModel nb_em_fit(const data::LabelMatrix& lm, std::span<const double> prior, const EmOptions& options = {});

/// P(y | lambda) per row, abstains contributing their abstain likelihood.
Matrix nb_posterior(const NaiveBayesModel& model, const data::LabelMatrix& lm);

/// Sum over covered rows of log sum_c prior_c prod_j P(lambda_j | c).
double nb_log_likelihood(const NaiveBayesModel& model, const data::LabelMatrix& lm);

nlohmann::json to_json(const NaiveBayesModel& model);

}  // namespace wslab::labelmodels
