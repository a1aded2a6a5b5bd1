#include "wslab/data/label_matrix.hpp"

#include <cstdio>

namespace wslab::data {

LabelMatrix::LabelMatrix(Index rows, Index lfs, int num_classes, std::vector<int> votes)
    : rows_(rows), lfs_(lfs), classes_(num_classes), votes_(std::move(votes)) {
  if (num_classes < 2) throw InvalidInput("label matrix: need at least 2 classes");
  if (rows < 0 || lfs < 0 || static_cast<Index>(votes_.size()) != rows * lfs) {
    throw InvalidInput("label matrix: vote count does not match shape");
  }
  for (std::size_t k = 0; k < votes_.size(); ++k) {
    const int v = votes_[k];
    if (v < 0 || v > num_classes) {
      throw InvalidInput("label matrix: vote " + std::to_string(v) + " at row " +
                         std::to_string(static_cast<Index>(k) / std::max<Index>(lfs, 1)) +
                         " outside {0.." + std::to_string(num_classes) + "}");
    }
  }
}

LabelMatrix LabelMatrix::probabilistic(Index rows, Index lfs, int num_classes, std::vector<double> probs) {
  if (num_classes < 2) throw InvalidInput("label matrix: need at least 2 classes");
  if (static_cast<Index>(probs.size()) != rows * lfs * num_classes) {
    throw InvalidInput("label matrix: probability tensor does not match shape");
  }
  std::vector<int> votes(static_cast<std::size_t>(rows * lfs), 0);
  for (Index s = 0; s < rows * lfs; ++s) {
    double total = 0.0;
    double best = 0.0;
    int best_class = 0;
    for (int c = 0; c < num_classes; ++c) {
      const double p = probs[static_cast<std::size_t>(s * num_classes + c)];
      if (!(p >= 0.0 && p <= 1.0)) throw InvalidInput("label matrix: probabilistic vote outside [0, 1]");
      total += p;
      if (p > best) {
        best = p;
        best_class = c + 1;
      }
    }
    if (total > 1.0 + 1e-9) throw InvalidInput("label matrix: probabilistic slice sums above 1");
    votes[static_cast<std::size_t>(s)] = best_class;
  }
  LabelMatrix lm(rows, lfs, num_classes, std::move(votes));
  lm.probs_ = std::move(probs);
  return lm;
}

double LabelMatrix::mass(Index i, Index j, int c) const {
  if (is_probabilistic()) return probs_[static_cast<std::size_t>((i * lfs_ + j) * classes_ + (c - 1))];
  return vote(i, j) == c ? 1.0 : 0.0;
}

bool LabelMatrix::covered(Index i) const {
  for (Index j = 0; j < lfs_; ++j) {
    if (vote(i, j) != 0) return true;
  }
  return false;
}

Matrix LabelMatrix::one_hot() const {
  Matrix out = Matrix::Zero(rows_, lfs_ * classes_);
  if (is_probabilistic()) {
    std::copy(probs_.begin(), probs_.end(), out.data());
    return out;
  }
  for (Index i = 0; i < rows_; ++i)
    for (Index j = 0; j < lfs_; ++j) {
      const int v = vote(i, j);
      if (v != 0) out(i, j * classes_ + (v - 1)) = 1.0;
    }
  return out;
}

LabelMatrix LabelMatrix::select_rows(std::span<const Index> rows) const {
  std::vector<int> votes;
  votes.reserve(rows.size() * static_cast<std::size_t>(lfs_));
  std::vector<double> probs;
  for (const Index i : rows) {
    if (i < 0 || i >= rows_) throw InvalidInput("label matrix: row index out of range");
    for (Index j = 0; j < lfs_; ++j) votes.push_back(vote(i, j));
    if (is_probabilistic()) {
      const auto begin = probs_.begin() + static_cast<std::ptrdiff_t>(i * lfs_ * classes_);
      probs.insert(probs.end(), begin, begin + static_cast<std::ptrdiff_t>(lfs_ * classes_));
    }
  }
  const auto n = static_cast<Index>(rows.size());
  if (is_probabilistic()) return probabilistic(n, lfs_, classes_, std::move(probs));
  return LabelMatrix(n, lfs_, classes_, std::move(votes));
}

LabelMatrix LabelMatrix::select_columns(std::span<const Index> cols) const {
  const auto m = static_cast<Index>(cols.size());
  std::vector<int> votes;
  votes.reserve(static_cast<std::size_t>(rows_ * m));
  std::vector<double> probs;
  for (Index i = 0; i < rows_; ++i)
    for (const Index j : cols) {
      if (j < 0 || j >= lfs_) throw InvalidInput("label matrix: column index out of range");
      votes.push_back(vote(i, j));
      if (is_probabilistic())
        for (int c = 1; c <= classes_; ++c) probs.push_back(mass(i, j, c));
    }
  if (is_probabilistic()) return probabilistic(rows_, m, classes_, std::move(probs));
  return LabelMatrix(rows_, m, classes_, std::move(votes));
}

LabelMatrix LabelMatrix::append_columns(const LabelMatrix& other) const {
  if (other.rows_ != rows_ || other.classes_ != classes_) {
    throw InvalidInput("label matrix: cannot append columns with different rows or classes");
  }
  const Index m = lfs_ + other.lfs_;
  const bool prob = is_probabilistic() || other.is_probabilistic();
  std::vector<int> votes;
  votes.reserve(static_cast<std::size_t>(rows_ * m));
  std::vector<double> probs;
  for (Index i = 0; i < rows_; ++i) {
    for (Index j = 0; j < m; ++j) {
      const LabelMatrix& src = j < lfs_ ? *this : other;
      const Index jj = j < lfs_ ? j : j - lfs_;
      votes.push_back(src.vote(i, jj));
      if (prob)
        for (int c = 1; c <= classes_; ++c) probs.push_back(src.mass(i, jj, c));
    }
  }
  if (prob) return probabilistic(rows_, m, classes_, std::move(probs));
  return LabelMatrix(rows_, m, classes_, std::move(votes));
}

void LabelMatrix::require_discrete(const std::string& who) const {
  if (is_probabilistic()) throw InvalidInput(who + " requires discrete votes");
}

double coverage(const LabelMatrix& lm) {
  if (lm.rows() == 0) return 0.0;
  Index covered = 0;
  for (Index i = 0; i < lm.rows(); ++i) covered += lm.covered(i) ? 1 : 0;
  return static_cast<double>(covered) / static_cast<double>(lm.rows());
}

std::string format_coverage_percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", 100.0 * fraction);
  return buf;
}

}  // namespace wslab::data
