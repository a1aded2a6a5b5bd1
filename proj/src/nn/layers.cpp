#include "wslab/nn/layers.hpp"

#include <cmath>

namespace wslab::nn {

std::string to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::Dense: return "dense";
    case LayerKind::Relu: return "relu";
    case LayerKind::BatchNorm: return "batchnorm";
    case LayerKind::Dropout: return "dropout";
  }
  return "unknown";
}

LayerKind layer_kind_from_string(const std::string& name) {
  if (name == "dense") return LayerKind::Dense;
  if (name == "relu") return LayerKind::Relu;
  if (name == "batchnorm") return LayerKind::BatchNorm;
  if (name == "dropout") return LayerKind::Dropout;
  throw InvalidInput("unknown layer kind '" + name + "'");
}

void Layer::require_cache(bool cached) const {
  if (!cached) {
    throw std::logic_error("backward() called on " + to_string(spec().kind) +
                           " layer without a cached forward pass");
  }
}

namespace {

void check_width(const Matrix& input, Index expected, const char* layer) {
  if (input.cols() != expected) {
    throw InvalidInput(std::string(layer) + ": expected input width " + std::to_string(expected) +
                       ", got " + std::to_string(input.cols()));
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Dense

Dense::Dense(Index in, Index out)
    : in_(in),
      out_(out),
      weight_{"weight", Matrix::Zero(in, out), Matrix::Zero(in, out)},
      bias_{"bias", Matrix::Zero(1, out), Matrix::Zero(1, out)} {
  if (in <= 0 || out <= 0) throw InvalidInput("dense: dimensions must be positive");
}

Dense::Dense(Index in, Index out, Rng& rng) : Dense(in, out) {
  const double bound = std::sqrt(6.0 / static_cast<double>(in));
  for (Index i = 0; i < in; ++i)
    for (Index j = 0; j < out; ++j) weight_.value(i, j) = (2.0 * uniform01(rng) - 1.0) * bound;
}

Matrix Dense::forward(const Matrix& input, Mode, Rng&) {
  check_width(input, in_, "dense");
  input_ = input;
  cached_ = true;
  Matrix out = input * weight_.value;
  out.rowwise() += bias_.value.row(0);
  return out;
}

Matrix Dense::backward(const Matrix& grad_output) {
  require_cache(cached_);
  weight_.grad.noalias() += input_.transpose() * grad_output;
  bias_.grad += grad_output.colwise().sum();
  return grad_output * weight_.value.transpose();
}

// ---------------------------------------------------------------------------
// Relu

Matrix Relu::forward(const Matrix& input, Mode, Rng&) {
  check_width(input, dim_, "relu");
  input_ = input;
  cached_ = true;
  return input.cwiseMax(0.0);
}

Matrix Relu::backward(const Matrix& grad_output) {
  require_cache(cached_);
  return (input_.array() > 0.0).select(grad_output, 0.0);
}

// ---------------------------------------------------------------------------
// BatchNorm

BatchNorm::BatchNorm(Index dim)
    : dim_(dim),
      scale_{"scale", Matrix::Ones(1, dim), Matrix::Zero(1, dim)},
      shift_{"shift", Matrix::Zero(1, dim), Matrix::Zero(1, dim)},
      running_mean_(Matrix::Zero(1, dim)),
      running_var_(Matrix::Ones(1, dim)) {
  if (dim <= 0) throw InvalidInput("batchnorm: dimension must be positive");
}

Matrix BatchNorm::forward(const Matrix& input, Mode mode, Rng&) {
  check_width(input, dim_, "batchnorm");
  const Index n = input.rows();
  Matrix mean;
  Matrix var;
  if (mode == Mode::Train) {
    if (n < 2) throw InvalidInput("batchnorm: train mode needs a batch of at least 2 rows");
    mean = input.colwise().mean();
    Matrix centered = input.rowwise() - mean.row(0);
    var = centered.array().square().colwise().mean();
    const double unbiased = static_cast<double>(n) / static_cast<double>(n - 1);
    running_mean_ = kDecay * running_mean_ + (1.0 - kDecay) * mean;
    running_var_ = kDecay * running_var_ + (1.0 - kDecay) * unbiased * var;
  } else {
    mean = running_mean_;
    var = running_var_;
  }
  inv_std_ = (var.array() + kEpsilon).rsqrt();
  normalized_ = (input.rowwise() - mean.row(0)).array().rowwise() * inv_std_.row(0).array();
  cached_mode_ = mode;
  cached_ = true;
  Matrix out = normalized_.array().rowwise() * scale_.value.row(0).array();
  out.rowwise() += shift_.value.row(0);
  return out;
}

Matrix BatchNorm::backward(const Matrix& grad_output) {
  require_cache(cached_);
  scale_.grad += (grad_output.array() * normalized_.array()).colwise().sum().matrix();
  shift_.grad += grad_output.colwise().sum();

  Matrix grad_norm = grad_output.array().rowwise() * scale_.value.row(0).array();
  if (cached_mode_ == Mode::Eval) {
    return grad_norm.array().rowwise() * inv_std_.row(0).array();
  }
  // d x = inv_std / n * (n g - sum(g) - xhat * sum(g * xhat))
  const double n = static_cast<double>(grad_output.rows());
  const Matrix sum_g = grad_norm.colwise().sum();
  const Matrix sum_gx = (grad_norm.array() * normalized_.array()).colwise().sum();
  Matrix grad_input = n * grad_norm;
  grad_input.rowwise() -= sum_g.row(0);
  grad_input.array() -= normalized_.array().rowwise() * sum_gx.row(0).array();
  grad_input.array().rowwise() *= (inv_std_.row(0).array() / n);
  return grad_input;
}

// ---------------------------------------------------------------------------
// Dropout

Dropout::Dropout(Index dim, double rate) : dim_(dim), rate_(rate) {
  if (dim <= 0) throw InvalidInput("dropout: dimension must be positive");
  if (!(rate >= 0.0 && rate < 1.0)) throw InvalidInput("dropout: rate must lie in [0, 1)");
}

Matrix Dropout::forward(const Matrix& input, Mode mode, Rng& rng) {
  check_width(input, dim_, "dropout");
  cached_ = true;
  if (mode == Mode::Eval || rate_ == 0.0) {
    mask_ = Matrix::Ones(input.rows(), input.cols());
    return input;
  }
  const double keep_scale = 1.0 / (1.0 - rate_);
  mask_.resize(input.rows(), input.cols());
  for (Index i = 0; i < mask_.rows(); ++i)
    for (Index j = 0; j < mask_.cols(); ++j) mask_(i, j) = uniform01(rng) < rate_ ? 0.0 : keep_scale;
  return input.cwiseProduct(mask_);
}

Matrix Dropout::backward(const Matrix& grad_output) {
  require_cache(cached_);
  return grad_output.cwiseProduct(mask_);
}

}  // namespace wslab::nn
