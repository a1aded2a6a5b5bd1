#pragma once

#include <span>
#include <string>
#include <vector>

#include "wslab/common/types.hpp"

namespace wslab::data {

/// N x m table of labeling-function votes over C classes.
///
/// Discrete votes are integers in {0..C}, with 0 meaning abstain and 1..C
/// the classes. A matrix may instead carry probabilistic votes: an
/// N x m x C tensor whose (i, j, .) slices hold non-negative masses summing
/// to at most 1 (an all-zero slice is an abstain).
class LabelMatrix {
 public:
  LabelMatrix() = default;
  LabelMatrix(Index rows, Index lfs, int num_classes, std::vector<int> votes);

  /// `probs` is laid out [i][j][c] (row-major, c fastest).
  static LabelMatrix probabilistic(Index rows, Index lfs, int num_classes, std::vector<double> probs);

  Index rows() const { return rows_; }
  Index num_lfs() const { return lfs_; }
  int num_classes() const { return classes_; }
  bool is_probabilistic() const { return !probs_.empty(); }

  /// Discrete vote. For probabilistic matrices this is the arg-max class of
  /// the slice, or 0 when the slice carries no mass.
  int vote(Index i, Index j) const { return votes_[static_cast<std::size_t>(i * lfs_ + j)]; }
  const std::vector<int>& votes() const { return votes_; }

  /// Vote mass for class c in 1..C.
  double mass(Index i, Index j, int c) const;

  /// True when row i has at least one non-abstain vote (non-zero slice).
  bool covered(Index i) const;

  /// N x (m*C) view of the one-hot (or probabilistic) vote tensor; entry
  /// (i, j*C + c-1) is the mass LF j puts on class c for row i.
  Matrix one_hot() const;

  LabelMatrix select_rows(std::span<const Index> rows) const;
  LabelMatrix select_columns(std::span<const Index> cols) const;
  /// Concatenates LF columns; both matrices must agree on N and C.
  LabelMatrix append_columns(const LabelMatrix& other) const;

  /// Throws InvalidInput unless the matrix holds discrete votes.
  void require_discrete(const std::string& who) const;

 private:
  Index rows_ = 0;
  Index lfs_ = 0;
  int classes_ = 2;
  std::vector<int> votes_;
  std::vector<double> probs_;
};

/// Fraction of rows with at least one vote.
double coverage(const LabelMatrix& lm);

/// Coverage in percent with one decimal, e.g. "25.8".
std::string format_coverage_percent(double fraction);

}  // namespace wslab::data
