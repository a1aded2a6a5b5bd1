#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "wslab/data/label_matrix.hpp"

namespace wslab::labelmodels {

/// Normalized vote counts per row; rows without votes get `prior`.
Matrix majority_vote_soft(const data::LabelMatrix& lm, std::span<const double> prior);

/// Arg-max of the vote counts with uniformly random tie-breaking; rows
/// without votes draw a class from `prior`. Seeded and deterministic.
std::vector<int> majority_vote_hard(const data::LabelMatrix& lm, std::span<const double> prior, std::uint64_t seed);

/// One-hot encoding of 1-based class labels.
Matrix one_hot_labels(std::span<const int> labels, int num_classes);

}  // namespace wslab::labelmodels
