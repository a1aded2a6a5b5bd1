#pragma once

#include <optional>
#include <vector>

#include "wslab/common/types.hpp"
#include "wslab/data/label_matrix.hpp"

namespace wslab::data {

struct Split {
  std::vector<Index> train;
  std::vector<Index> val;
  std::vector<Index> test;
};

/// Features plus held-out labels, class balance and a train/val/test split.
///
/// Labels are in {1..C}. They are consulted only by synthetic LF
/// generation, the supervised ceiling and evaluation; the weak-supervision
/// training paths take a Dataset but never read them.
class Dataset {
 public:
  Dataset() = default;
  Dataset(Matrix features, std::optional<std::vector<int>> labels, std::vector<double> class_balance,
          Split split);

  Index size() const { return features_.rows(); }
  Index dims() const { return features_.cols(); }
  int num_classes() const { return static_cast<int>(balance_.size()); }

  const Matrix& features() const { return features_; }
  bool has_labels() const { return labels_.has_value(); }
  const std::vector<int>& labels() const;
  const std::vector<double>& class_balance() const { return balance_; }
  const Split& split() const { return split_; }

  Dataset with_split(Split split) const;
  Matrix rows(std::span<const Index> idx) const;
  std::vector<int> labels_at(std::span<const Index> idx) const;

 private:
  Matrix features_;
  std::optional<std::vector<int>> labels_;
  std::vector<double> balance_;
  Split split_;
};

/// Whole range as training split.
Split all_train(Index n);
/// First n_train rows train, next n_val val, next n_test test.
Split contiguous_split(Index n_train, Index n_val, Index n_test);

/// Drops training rows that no LF votes on. Validation and test indices
/// are untouched; the label matrix keeps all N rows. Throws when no
/// training row is covered.
struct CoveredSubset {
  LabelMatrix matrix;
  Dataset dataset;
};
CoveredSubset covered_subset(const LabelMatrix& lm, const Dataset& ds);

}  // namespace wslab::data
