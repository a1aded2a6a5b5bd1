#include "wslab/labelmodels/naive_bayes.hpp"

#include <cmath>
#include <limits>

#include "wslab/labelmodels/majority_vote.hpp"

namespace wslab::labelmodels {

namespace {

void check_prior(std::span<const double> prior, int classes) {
  if (static_cast<int>(prior.size()) != classes) throw InvalidInput("naive bayes: prior must have C entries");
  double total = 0.0;
  for (const double p : prior) {
    if (!(p > 0.0)) throw InvalidInput("naive bayes: prior entries must be positive");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw InvalidInput("naive bayes: prior must sum to 1");
}

// Unnormalized log joint log P(y = c, lambda_i) for each row and class,
// plus the per-row log normalizer.
Matrix log_joint(const NaiveBayesModel& model, const data::LabelMatrix& lm) {
  const int classes = model.num_classes;
  Matrix log_conf_sum = Matrix::Zero(lm.rows(), classes);
  std::vector<Matrix> log_conf;
  log_conf.reserve(model.confusion.size());
  for (const auto& conf : model.confusion) log_conf.push_back(conf.array().log().matrix());
  for (Index i = 0; i < lm.rows(); ++i) {
    for (int c = 0; c < classes; ++c) {
      double s = std::log(model.prior[static_cast<std::size_t>(c)]);
      for (Index j = 0; j < lm.num_lfs(); ++j) s += log_conf[static_cast<std::size_t>(j)](lm.vote(i, j), c);
      log_conf_sum(i, c) = s;
    }
  }
  return log_conf_sum;
}

double log_sum_exp(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  const double mx = row.maxCoeff();
  return mx + std::log((row.array() - mx).exp().sum());
}

// M-step with additive smoothing.
std::vector<Matrix> estimate_confusion(const data::LabelMatrix& lm, const Matrix& q, double smoothing) {
  const int classes = lm.num_classes();
  std::vector<Matrix> conf;
  conf.reserve(static_cast<std::size_t>(lm.num_lfs()));
  const Eigen::RowVectorXd mass = q.colwise().sum();
  for (Index j = 0; j < lm.num_lfs(); ++j) {
    Matrix counts = Matrix::Constant(classes + 1, classes, smoothing);
    for (Index i = 0; i < lm.rows(); ++i) counts.row(lm.vote(i, j)) += q.row(i);
    for (int c = 0; c < classes; ++c) counts.col(c) /= (mass(c) + smoothing * (classes + 1));
    conf.push_back(std::move(counts));
  }
  return conf;
}

double log_dirichlet_term(const std::vector<Matrix>& conf, double smoothing) {
  double s = 0.0;
  for (const auto& m : conf) s += smoothing * m.array().log().sum();
  return s;
}

}  // namespace

Matrix nb_posterior(const NaiveBayesModel& model, const data::LabelMatrix& lm) {
  lm.require_discrete("naive bayes");
  if (lm.num_classes() != model.num_classes || static_cast<std::size_t>(lm.num_lfs()) != model.confusion.size()) {
    throw InvalidInput("nb_posterior: label matrix does not match the fitted model");
  }
  Matrix lj = log_joint(model, lm);
  for (Index i = 0; i < lj.rows(); ++i) {
    const double z = log_sum_exp(lj.row(i));
    lj.row(i) = (lj.row(i).array() - z).exp().matrix();
  }
  return lj;
}

double nb_log_likelihood(const NaiveBayesModel& model, const data::LabelMatrix& lm) {
  const Matrix lj = log_joint(model, lm);
  double total = 0.0;
  for (Index i = 0; i < lj.rows(); ++i)
    if (lm.covered(i)) total += log_sum_exp(lj.row(i));
  return total;
}

NaiveBayesModel nb_em_fit(const data::LabelMatrix& lm, std::span<const double> prior, const EmOptions& options) {
  lm.require_discrete("nb-em");
  check_prior(prior, lm.num_classes());
  if (options.max_iters < 1) throw InvalidInput("nb-em: max_iters must be at least 1");

  std::vector<Index> covered_rows;
  for (Index i = 0; i < lm.rows(); ++i)
    if (lm.covered(i)) covered_rows.push_back(i);
  if (covered_rows.empty()) throw InvalidInput("nb-em: label matrix has zero coverage");
  const data::LabelMatrix train = lm.select_rows(covered_rows);

  NaiveBayesModel model;
  model.num_classes = lm.num_classes();
  model.prior.assign(prior.begin(), prior.end());

  Matrix q = majority_vote_soft(train, prior);
  for (int it = 0; it < options.max_iters; ++it) {
    std::vector<Matrix> next = estimate_confusion(train, q, options.smoothing);
    double change = it == 0 ? std::numeric_limits<double>::infinity() : 0.0;
    if (it > 0) {
      for (std::size_t j = 0; j < next.size(); ++j)
        change = std::max(change, (next[j] - model.confusion[j]).cwiseAbs().maxCoeff());
    }
    model.confusion = std::move(next);
    model.iterations = it + 1;

    const double ll = nb_log_likelihood(model, train);
    model.log_likelihood.push_back(ll);
    model.objective.push_back(ll + log_dirichlet_term(model.confusion, options.smoothing));

    if (change < options.tol) {
      model.converged = true;
      break;
    }
    q = nb_posterior(model, train);
  }
  return model;
}

nlohmann::json to_json(const NaiveBayesModel& model) {
  nlohmann::json lfs = nlohmann::json::array();
  for (const auto& conf : model.confusion) {
    nlohmann::json rows = nlohmann::json::array();
    for (Index v = 0; v < conf.rows(); ++v) {
      std::vector<double> row(conf.row(v).data(), conf.row(v).data() + conf.cols());
      rows.push_back(row);
    }
    lfs.push_back(rows);
  }
  return {{"model", "nb-em"},
          {"num_classes", model.num_classes},
          {"prior", model.prior},
          {"confusion", lfs},
          {"iterations", model.iterations},
          {"converged", model.converged}};
}

}  // namespace wslab::labelmodels
