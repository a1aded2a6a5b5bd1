#include "wslab/weasel/encoder.hpp"

#include <cmath>

#include "wslab/nn/functional.hpp"

namespace wslab::weasel {

namespace {
constexpr double kReluFloor = 1e-5;
}

std::string to_string(AccuracyActivation a) {
  switch (a) {
    case AccuracyActivation::Softmax: return "softmax";
    case AccuracyActivation::Sigmoid: return "sigmoid";
    case AccuracyActivation::Relu: return "relu";
    case AccuracyActivation::Tanh: return "tanh";
  }
  return "unknown";
}

AccuracyActivation accuracy_activation_from_string(const std::string& name) {
  for (const auto a : {AccuracyActivation::Softmax, AccuracyActivation::Sigmoid, AccuracyActivation::Relu,
                       AccuracyActivation::Tanh}) {
    if (to_string(a) == name) return a;
  }
  throw InvalidInput("unknown accuracy activation '" + name + "'");
}

Matrix prior_weighted_logits(const Matrix& s, std::span<const double> prior) {
  if (static_cast<Index>(prior.size()) != s.cols()) throw InvalidInput("encoder: prior must have C entries");
  Matrix out = s;
  for (Index c = 0; c < s.cols(); ++c) {
    const double p = prior[static_cast<std::size_t>(c)];
    if (!(p > 0.0)) throw InvalidInput("encoder: prior entries must be positive");
    out.col(c).array() += std::log(p);
  }
  return out;
}

EncoderHead::EncoderHead(Index num_lfs, int num_classes, Index feature_dims, const EncoderConfig& config,
                         double dropout, Rng& rng)
    : lfs_(num_lfs), classes_(num_classes), dims_(feature_dims), config_(config) {
  if (num_lfs < 1) throw InvalidInput("encoder: need at least one labeling function");
  if (num_classes < 2) throw InvalidInput("encoder: need at least two classes");
  tau1_ = config.inverse_temperature;
  tau2_ = config.scale.value_or(std::sqrt(static_cast<double>(num_lfs)));
  if (!(tau1_ >= 0.0)) throw InvalidInput("encoder: inverse temperature tau1 must be non-negative");
  if (!(tau2_ > 0.0)) throw InvalidInput("encoder: scale tau2 must be positive");
  nn::MlpSpec spec;
  spec.input_dim = num_lfs * num_classes + (config.use_features ? feature_dims : 0);
  spec.hidden = config.hidden;
  spec.output_dim = config.class_conditional ? num_lfs * num_classes : num_lfs;
  spec.batchnorm = config.batchnorm;
  spec.dropout = dropout;
  body_ = nn::Mlp(spec, rng);
}

void EncoderHead::check_shapes(const Matrix& votes, const Matrix& features) const {
  if (votes.cols() != lfs_ * classes_) {
    throw InvalidInput("encoder: vote tensor has width " + std::to_string(votes.cols()) + ", expected " +
                       std::to_string(lfs_ * classes_));
  }
  if (config_.use_features && (features.cols() != dims_ || features.rows() != votes.rows())) {
    throw InvalidInput("encoder: feature batch shape mismatch");
  }
}

Matrix EncoderHead::body_input(const Matrix& votes, const Matrix& features) const {
  check_shapes(votes, features);
  if (!config_.use_features) return votes;
  Matrix in(votes.rows(), votes.cols() + features.cols());
  in << votes, features;
  return in;
}

Matrix EncoderHead::accuracy_scores(const Matrix& raw) const {
  const Index width = config_.class_conditional ? lfs_ * classes_ : lfs_;
  if (raw.cols() != width) throw InvalidInput("encoder: raw score width mismatch");
  switch (config_.activation) {
    case AccuracyActivation::Softmax: {
      if (!config_.class_conditional) return tau2_ * nn::softmax(raw, tau1_);
      // Softmax over the LF axis separately for each class column.
      Matrix theta(raw.rows(), raw.cols());
      Matrix column(raw.rows(), lfs_);
      for (int c = 0; c < classes_; ++c) {
        for (Index j = 0; j < lfs_; ++j) column.col(j) = raw.col(j * classes_ + c);
        const Matrix p = nn::softmax(column, tau1_);
        for (Index j = 0; j < lfs_; ++j) theta.col(j * classes_ + c) = tau2_ * p.col(j);
      }
      return theta;
    }
    case AccuracyActivation::Sigmoid:
      return tau2_ * (1.0 / (1.0 + (-tau1_ * raw.array()).exp())).matrix();
    case AccuracyActivation::Relu:
      return tau2_ * ((tau1_ * raw.array()).max(0.0) + kReluFloor).matrix();
    case AccuracyActivation::Tanh:
      return tau2_ * (tau1_ * raw.array()).tanh().matrix();
  }
  return {};
}

Matrix EncoderHead::aggregate(const Matrix& theta, const Matrix& votes) const {
  Matrix s = Matrix::Zero(votes.rows(), classes_);
  for (Index j = 0; j < lfs_; ++j) {
    const auto block = votes.middleCols(j * classes_, classes_);
    if (config_.class_conditional) {
      s += theta.middleCols(j * classes_, classes_).cwiseProduct(block);
    } else {
      s.array() += block.array().colwise() * theta.col(j).array();
    }
  }
  return s;
}

EncoderPass EncoderHead::forward(const Matrix& votes, const Matrix& features, std::span<const double> prior,
                                 nn::Mode mode, Rng& rng) {
  EncoderPass pass;
  pass.raw = body_.forward(body_input(votes, features), mode, rng);
  pass.theta = accuracy_scores(pass.raw);
  pass.logits = prior_weighted_logits(aggregate(pass.theta, votes), prior);
  pass.posterior = nn::softmax(pass.logits);
  return pass;
}

Matrix EncoderHead::posterior(const Matrix& votes, const Matrix& features, std::span<const double> prior) {
  Rng unused(0);
  return forward(votes, features, prior, nn::Mode::Eval, unused).posterior;
}

void EncoderHead::backward(const EncoderPass& pass, const Matrix& votes, const Matrix& grad_logits) {
  // d s = d logits (the prior shift is constant).
  Matrix grad_theta(pass.theta.rows(), pass.theta.cols());
  for (Index j = 0; j < lfs_; ++j) {
    const auto block = votes.middleCols(j * classes_, classes_);
    if (config_.class_conditional) {
      grad_theta.middleCols(j * classes_, classes_) = grad_logits.cwiseProduct(block);
    } else {
      grad_theta.col(j) = grad_logits.cwiseProduct(block).rowwise().sum();
    }
  }

  Matrix grad_raw(pass.raw.rows(), pass.raw.cols());
  switch (config_.activation) {
    case AccuracyActivation::Softmax: {
      if (tau1_ == 0.0) {
        grad_raw.setZero();
        break;
      }
      // theta = tau2 * p with p = softmax(tau1 * raw).
      if (!config_.class_conditional) {
        const Matrix p = pass.theta / tau2_;
        grad_raw = tau1_ * nn::softmax_backward(p, tau2_ * grad_theta);
        break;
      }
      Matrix p(pass.raw.rows(), lfs_);
      Matrix g(pass.raw.rows(), lfs_);
      for (int c = 0; c < classes_; ++c) {
        for (Index j = 0; j < lfs_; ++j) {
          p.col(j) = pass.theta.col(j * classes_ + c) / tau2_;
          g.col(j) = tau2_ * grad_theta.col(j * classes_ + c);
        }
        const Matrix gr = tau1_ * nn::softmax_backward(p, g);
        for (Index j = 0; j < lfs_; ++j) grad_raw.col(j * classes_ + c) = gr.col(j);
      }
      break;
    }
    case AccuracyActivation::Sigmoid: {
      const Matrix sig = pass.theta / tau2_;
      grad_raw = (tau2_ * tau1_) * grad_theta.cwiseProduct(sig.cwiseProduct((1.0 - sig.array()).matrix()));
      break;
    }
    case AccuracyActivation::Relu:
      grad_raw = (pass.raw.array() * tau1_ > 0.0).select((tau2_ * tau1_) * grad_theta, 0.0);
      break;
    case AccuracyActivation::Tanh: {
      const Matrix t = pass.theta / tau2_;
      grad_raw = (tau2_ * tau1_) * grad_theta.cwiseProduct((1.0 - t.array().square()).matrix());
      break;
    }
  }
  body_.backward(grad_raw);
}

}  // namespace wslab::weasel
