#include "wslab/labelmodels/majority_vote.hpp"

namespace wslab::labelmodels {

namespace {

void check_prior(std::span<const double> prior, int classes) {
  if (static_cast<int>(prior.size()) != classes) throw InvalidInput("majority vote: prior must have C entries");
}

Matrix vote_counts(const data::LabelMatrix& lm) {
  lm.require_discrete("majority vote");
  Matrix counts = Matrix::Zero(lm.rows(), lm.num_classes());
  for (Index i = 0; i < lm.rows(); ++i)
    for (Index j = 0; j < lm.num_lfs(); ++j) {
      const int v = lm.vote(i, j);
      if (v != 0) counts(i, v - 1) += 1.0;
    }
  return counts;
}

}  // namespace

Matrix majority_vote_soft(const data::LabelMatrix& lm, std::span<const double> prior) {
  check_prior(prior, lm.num_classes());
  Matrix counts = vote_counts(lm);
  for (Index i = 0; i < counts.rows(); ++i) {
    const double total = counts.row(i).sum();
    if (total > 0.0) {
      counts.row(i) /= total;
    } else {
      for (Index c = 0; c < counts.cols(); ++c) counts(i, c) = prior[static_cast<std::size_t>(c)];
    }
  }
  return counts;
}

std::vector<int> majority_vote_hard(const data::LabelMatrix& lm, std::span<const double> prior, std::uint64_t seed) {
  check_prior(prior, lm.num_classes());
  const Matrix counts = vote_counts(lm);
  Rng rng(seed);
  std::vector<int> out(static_cast<std::size_t>(lm.rows()));
  std::vector<int> tied;
  for (Index i = 0; i < counts.rows(); ++i) {
    const double best = counts.row(i).maxCoeff();
    if (best == 0.0) {
      const double u = uniform01(rng);
      double acc = 0.0;
      int pick = lm.num_classes();
      for (int c = 0; c < lm.num_classes(); ++c) {
        acc += prior[static_cast<std::size_t>(c)];
        if (u < acc) {
          pick = c + 1;
          break;
        }
      }
      out[static_cast<std::size_t>(i)] = pick;
      continue;
    }
    tied.clear();
    for (Index c = 0; c < counts.cols(); ++c)
      if (counts(i, c) == best) tied.push_back(static_cast<int>(c) + 1);
    out[static_cast<std::size_t>(i)] = tied.size() == 1 ? tied[0] : tied[uniform_index(rng, tied.size())];
  }
  return out;
}

Matrix one_hot_labels(std::span<const int> labels, int num_classes) {
  Matrix out = Matrix::Zero(static_cast<Index>(labels.size()), num_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 1 || labels[i] > num_classes) throw InvalidInput("one_hot_labels: label out of range");
    out(static_cast<Index>(i), labels[i] - 1) = 1.0;
  }
  return out;
}

}  // namespace wslab::labelmodels
