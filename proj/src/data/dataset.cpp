#include "wslab/data/dataset.hpp"

#include <cmath>
#include <numeric>
#include <set>

namespace wslab::data {

Dataset::Dataset(Matrix features, std::optional<std::vector<int>> labels, std::vector<double> class_balance,
                 Split split)
    : features_(std::move(features)),
      labels_(std::move(labels)),
      balance_(std::move(class_balance)),
      split_(std::move(split)) {
  if (balance_.size() < 2) throw InvalidInput("dataset: class balance needs at least 2 entries");
  double total = 0.0;
  for (const double p : balance_) {
    if (!(p >= 0.0)) throw InvalidInput("dataset: class balance entries must be non-negative");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw InvalidInput("dataset: class balance must sum to 1");
  const Index n = features_.rows();
  if (labels_) {
    if (static_cast<Index>(labels_->size()) != n) throw InvalidInput("dataset: label count differs from row count");
    for (const int y : *labels_) {
      if (y < 1 || y > num_classes()) throw InvalidInput("dataset: label " + std::to_string(y) + " out of range");
    }
  }
  std::set<Index> seen;
  for (const auto* part : {&split_.train, &split_.val, &split_.test}) {
    for (const Index i : *part) {
      if (i < 0 || i >= n) throw InvalidInput("dataset: split index out of range");
      if (!seen.insert(i).second) throw InvalidInput("dataset: split index " + std::to_string(i) + " repeated");
    }
  }
}

const std::vector<int>& Dataset::labels() const {
  if (!labels_) throw InvalidInput("dataset: no labels available");
  return *labels_;
}

Dataset Dataset::with_split(Split split) const {
  return Dataset(features_, labels_, balance_, std::move(split));
}

Matrix Dataset::rows(std::span<const Index> idx) const {
  Matrix out(static_cast<Index>(idx.size()), features_.cols());
  for (std::size_t k = 0; k < idx.size(); ++k) out.row(static_cast<Index>(k)) = features_.row(idx[k]);
  return out;
}

std::vector<int> Dataset::labels_at(std::span<const Index> idx) const {
  const auto& all = labels();
  std::vector<int> out;
  out.reserve(idx.size());
  for (const Index i : idx) out.push_back(all[static_cast<std::size_t>(i)]);
  return out;
}

Split all_train(Index n) {
  Split s;
  s.train.resize(static_cast<std::size_t>(n));
  std::iota(s.train.begin(), s.train.end(), Index{0});
  return s;
}

Split contiguous_split(Index n_train, Index n_val, Index n_test) {
  Split s;
  Index next = 0;
  for (Index i = 0; i < n_train; ++i) s.train.push_back(next++);
  for (Index i = 0; i < n_val; ++i) s.val.push_back(next++);
  for (Index i = 0; i < n_test; ++i) s.test.push_back(next++);
  return s;
}

CoveredSubset covered_subset(const LabelMatrix& lm, const Dataset& ds) {
  if (lm.rows() != ds.size()) {
    throw InvalidInput("covered_subset: label matrix has " + std::to_string(lm.rows()) + " rows but dataset has " +
                       std::to_string(ds.size()));
  }
  Split split = ds.split();
  std::vector<Index> kept;
  for (const Index i : split.train)
    if (lm.covered(i)) kept.push_back(i);
  if (kept.empty()) throw InvalidInput("covered_subset: empty training set (no training row has a vote)");
  split.train = std::move(kept);
  return {lm, ds.with_split(std::move(split))};
}

}  // namespace wslab::data
