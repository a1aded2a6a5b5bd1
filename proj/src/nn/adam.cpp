#include "wslab/nn/adam.hpp"

#include <cmath>

namespace wslab::nn {

Adam::Adam(AdamConfig config) : config_(config) {
  if (!(config_.lr > 0.0)) throw InvalidInput("adam: learning rate must be positive");
  if (config_.weight_decay < 0.0) throw InvalidInput("adam: weight decay must be non-negative");
}

void Adam::step(std::span<Parameter* const> params) {
  if (steps_ == 0) {
    m_.clear();
    v_.clear();
    for (const Parameter* p : params) {
      m_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
      v_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
    }
  }
  if (params.size() != m_.size()) throw InvalidInput("adam: parameter count changed between steps");
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Parameter& p = *params[i];
    if (p.value.rows() != m_[i].rows() || p.value.cols() != m_[i].cols() ||
        p.grad.rows() != p.value.rows() || p.grad.cols() != p.value.cols()) {
      throw InvalidInput("adam: shape mismatch for parameter '" + p.name + "'");
    }
  }

  ++steps_;
  const double t = static_cast<double>(steps_);
  const double c1 = 1.0 - std::pow(config_.beta1, t);
  const double c2 = 1.0 - std::pow(config_.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter& p = *params[i];
    Matrix g = p.grad;
    if (config_.weight_decay > 0.0) g += config_.weight_decay * p.value;
    m_[i] = config_.beta1 * m_[i] + (1.0 - config_.beta1) * g;
    v_[i] = config_.beta2 * v_[i] + (1.0 - config_.beta2) * g.cwiseAbs2();
    p.value.array() -= config_.lr * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + config_.epsilon);
  }
}

}  // namespace wslab::nn
