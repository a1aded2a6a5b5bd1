#pragma once

#include "wslab/common/types.hpp"

namespace wslab::nn {

/// Row-wise softmax of `logits * inverse_temperature`, max-subtracted.
/// An inverse temperature of exactly 0 yields the uniform distribution.
/// Throws InvalidInput on NaN entries.
Matrix softmax(const Matrix& logits, double inverse_temperature = 1.0);

/// Row-wise log-softmax (no temperature).
Matrix log_softmax(const Matrix& logits);

/// Pulls a gradient with respect to softmax probabilities back to the
/// logits: dz = p * (g - <g, p>) per row.
Matrix softmax_backward(const Matrix& probs, const Matrix& grad_probs);

}  // namespace wslab::nn
