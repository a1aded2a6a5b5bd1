#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "wslab/data/dataset.hpp"

namespace wslab::data {

/// Gaussian blobs: one unit-covariance cluster per class, centers pairwise
/// `separation` apart (scaled simplex vertices, centered at the origin).
struct BlobSpec {
  Index n = 1000;
  Index dims = 10;
  int num_classes = 2;
  double separation = 6.0;
  std::vector<double> balance;  // empty means uniform
  /// Optional contiguous split sizes; must sum to n. Empty means all train.
  std::optional<std::array<Index, 3>> split;
};

Dataset generate_blobs(const BlobSpec& spec, std::uint64_t seed);

enum class LfMode {
  Independent,      // abstain w.p. 1-coverage, else true class w.p. accuracy
  Duplicate,        // bitwise copy of column `source`
  AdversarialFlip,  // copy of `source` with its abstains replaced by the opposite class (C = 2)
  ClassBalance,     // abstain w.p. 1-coverage, else a class drawn from the class balance, ignoring y
};

/// Synthetic labeling function.
///
/// `accuracy` is P(vote = y | vote != abstain); wrong votes are uniform over
/// the other C-1 classes. With `polarity` set the LF only ever emits that
/// class: it fires on a sample with a probability that depends on whether
/// the sample belongs to the class, chosen so that the overall firing rate
/// is `coverage` and the fraction of correct firings is `accuracy`.
struct SyntheticLfSpec {
  double accuracy = 0.7;
  double coverage = 1.0;
  LfMode mode = LfMode::Independent;
  Index source = -1;
  std::optional<int> polarity;

  static SyntheticLfSpec independent(double accuracy, double coverage) {
    return {accuracy, coverage, LfMode::Independent, -1, std::nullopt};
  }
  static SyntheticLfSpec unipolar(int cls, double accuracy, double coverage) {
    return {accuracy, coverage, LfMode::Independent, -1, cls};
  }
  static SyntheticLfSpec coin_flip(double coverage = 1.0) {
    return {0.0, coverage, LfMode::ClassBalance, -1, std::nullopt};
  }
  static SyntheticLfSpec duplicate_of(Index j) { return {1.0, 1.0, LfMode::Duplicate, j, std::nullopt}; }
  static SyntheticLfSpec adversarial_flip_of(Index j) {
    return {1.0, 1.0, LfMode::AdversarialFlip, j, std::nullopt};
  }
};

/// Votes for every row of `ds` (which must carry labels). Column j draws
/// from its own stream derived from (seed, j), so appending specs never
/// changes earlier columns.
LabelMatrix generate_lfs(const Dataset& ds, std::span<const SyntheticLfSpec> specs, std::uint64_t seed);

}  // namespace wslab::data
