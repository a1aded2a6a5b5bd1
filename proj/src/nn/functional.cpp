#include "wslab/nn/functional.hpp"

#include <cmath>

namespace wslab::nn {

Matrix softmax(const Matrix& logits, double inverse_temperature) {
  if (logits.hasNaN()) throw InvalidInput("softmax: NaN in logits");
  const Index cols = logits.cols();
  if (inverse_temperature == 0.0) {
    return Matrix::Constant(logits.rows(), cols, 1.0 / static_cast<double>(cols));
  }
  Matrix scaled = logits * inverse_temperature;
  for (Index i = 0; i < scaled.rows(); ++i) {
    auto row = scaled.row(i);
    row.array() -= row.maxCoeff();
    row = row.array().exp().matrix();
    row /= row.sum();
  }
  return scaled;
}

Matrix log_softmax(const Matrix& logits) {
  if (logits.hasNaN()) throw InvalidInput("log_softmax: NaN in logits");
  Matrix out = logits;
  for (Index i = 0; i < out.rows(); ++i) {
    auto row = out.row(i);
    const double mx = row.maxCoeff();
    const double lse = mx + std::log((row.array() - mx).exp().sum());
    row.array() -= lse;
  }
  return out;
}

Matrix softmax_backward(const Matrix& probs, const Matrix& grad_probs) {
  const Vector inner = probs.cwiseProduct(grad_probs).rowwise().sum();
  Matrix out = grad_probs;
  out.colwise() -= inner;
  return out.cwiseProduct(probs);
}

}  // namespace wslab::nn
