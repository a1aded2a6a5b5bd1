#include "wslab/weasel/losses.hpp"

#include <cmath>

#include "wslab/nn/functional.hpp"

namespace wslab::weasel {

std::string to_string(LossKind kind) {
  switch (kind) {
    case LossKind::SymmetricCeStopGrad: return "sym-ce-stopgrad";
    case LossKind::CeNoStopGrad: return "ce-no-stopgrad";
    case LossKind::AsymmetricCe: return "asymmetric-ce";
    case LossKind::L1: return "l1";
    case LossKind::SquaredHellinger: return "squared-hellinger";
    case LossKind::Mig: return "mig";
  }
  return "unknown";
}

LossKind loss_kind_from_string(const std::string& name) {
  for (const LossKind k : {LossKind::SymmetricCeStopGrad, LossKind::CeNoStopGrad, LossKind::AsymmetricCe, LossKind::L1,
                           LossKind::SquaredHellinger, LossKind::Mig}) {
    if (to_string(k) == name) return k;
  }
  throw InvalidInput("unknown loss '" + name + "'");
}

namespace {

Matrix clamped_log(const Matrix& probs) { return probs.cwiseMax(kProbFloor).array().log().matrix(); }

// -sum_c target_c log(pred_c), averaged; prediction given by its logits.
// Returns the value and fills the logit gradients of whichever sides are
// live. The prediction-side gradient is p - q (exact for normalized q).
double ce_term(const Matrix& pred_logits, const Matrix& target_probs, Matrix* grad_pred_logits,
               Matrix* grad_target_logits) {
  const double n = static_cast<double>(pred_logits.rows());
  const Matrix pred = nn::softmax(pred_logits);
  const Matrix log_pred = nn::log_softmax(pred_logits).cwiseMax(std::log(kProbFloor));
  const double value = -(target_probs.cwiseProduct(log_pred)).sum() / n;
  if (grad_pred_logits) {
    Matrix g = pred;
    g.array().colwise() *= target_probs.rowwise().sum().array();
    *grad_pred_logits = (g - target_probs) / n;
  }
  if (grad_target_logits) {
    *grad_target_logits = nn::softmax_backward(target_probs, -log_pred / n);
  }
  return value;
}

void check_pair(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw InvalidInput("loss: prediction shapes differ");
  if (a.rows() == 0) throw InvalidInput("loss: empty batch");
}

}  // namespace

double cross_entropy(const Matrix& prediction, const Matrix& target) {
  check_pair(prediction, target);
  return -(target.cwiseProduct(clamped_log(prediction))).sum() / static_cast<double>(prediction.rows());
}

double l1_distance(const Matrix& a, const Matrix& b) {
  check_pair(a, b);
  return (a - b).cwiseAbs().sum() / static_cast<double>(a.rows());
}

double squared_hellinger(const Matrix& a, const Matrix& b) {
  check_pair(a, b);
  return 1.0 - a.cwiseProduct(b).cwiseMax(0.0).cwiseSqrt().sum() / static_cast<double>(a.rows());
}

double mig_value(const Matrix& a, const Matrix& b, std::span<const double> prior) {
  check_pair(a, b);
  const Index n = a.rows();
  if (n < 2) throw InvalidInput("mig: batch must hold at least 2 samples");
  if (static_cast<Index>(prior.size()) != a.cols()) throw InvalidInput("mig: prior must have C entries");
  Matrix b_scaled = b;
  for (Index c = 0; c < b.cols(); ++c) b_scaled.col(c) /= prior[static_cast<std::size_t>(c)];
  const Matrix r = a * b_scaled.transpose();  // r(i, j) = sum_c a_ic b_jc / p_c
  double joint = 0.0;
  for (Index i = 0; i < n; ++i) joint += std::log(std::max(r(i, i), kProbFloor));
  const double off_diagonal = r.sum() - r.trace();
  const double nn = static_cast<double>(n);
  return -(joint / nn - off_diagonal / (nn * (nn - 1.0)) + 1.0);
}

void mig_gradients(const Matrix& a, const Matrix& b, std::span<const double> prior, Matrix& grad_a, Matrix& grad_b) {
  check_pair(a, b);
  const Index n = a.rows();
  if (n < 2) throw InvalidInput("mig: batch must hold at least 2 samples");
  const double nn = static_cast<double>(n);
  Eigen::RowVectorXd inv_prior(a.cols());
  for (Index c = 0; c < a.cols(); ++c) inv_prior(c) = 1.0 / prior[static_cast<std::size_t>(c)];
  const Matrix a_scaled = a.array().rowwise() * inv_prior.array();
  const Matrix b_scaled = b.array().rowwise() * inv_prior.array();
  const Eigen::RowVectorXd sum_a = a_scaled.colwise().sum();
  const Eigen::RowVectorXd sum_b = b_scaled.colwise().sum();
  grad_a.resize(n, a.cols());
  grad_b.resize(n, a.cols());
  for (Index i = 0; i < n; ++i) {
    const double rii = a.row(i).dot(b_scaled.row(i));
    const double joint_weight = rii > kProbFloor ? 1.0 / (nn * rii) : 0.0;
    grad_a.row(i) = -(joint_weight * b_scaled.row(i) - (sum_b - b_scaled.row(i)) / (nn * (nn - 1.0)));
    grad_b.row(i) = -(joint_weight * a_scaled.row(i) - (sum_a - a_scaled.row(i)) / (nn * (nn - 1.0)));
  }
}

LossTerm soft_target_cross_entropy(const Matrix& logits, const Matrix& targets) {
  check_pair(logits, targets);
  LossTerm t;
  t.name = "ce";
  t.value = ce_term(logits, targets, &t.grad_downstream, nullptr);
  t.grad_encoder = Matrix::Zero(logits.rows(), logits.cols());
  t.encoder_live = false;
  return t;
}

LossResult compute_loss(LossKind kind, const Matrix& logits_downstream, const Matrix& logits_encoder,
                        std::span<const double> prior) {
  check_pair(logits_downstream, logits_encoder);
  const Index rows = logits_downstream.rows();
  const Index cols = logits_downstream.cols();
  const Matrix y_f = nn::softmax(logits_downstream);
  const Matrix y_e = nn::softmax(logits_encoder);
  const Matrix zero = Matrix::Zero(rows, cols);
  const double n = static_cast<double>(rows);

  LossResult result;
  switch (kind) {
    case LossKind::SymmetricCeStopGrad: {
      LossTerm t1{"ce(y_f, sg(y_e))", 0.0, {}, zero, true, false};
      t1.value = ce_term(logits_downstream, y_e, &t1.grad_downstream, nullptr);
      LossTerm t2{"ce(y_e, sg(y_f))", 0.0, zero, {}, false, true};
      t2.value = ce_term(logits_encoder, y_f, &t2.grad_encoder, nullptr);
      result.terms = {std::move(t1), std::move(t2)};
      break;
    }
    case LossKind::CeNoStopGrad: {
      LossTerm t1{"ce(y_f, y_e)", 0.0, {}, {}};
      t1.value = ce_term(logits_downstream, y_e, &t1.grad_downstream, &t1.grad_encoder);
      LossTerm t2{"ce(y_e, y_f)", 0.0, {}, {}};
      t2.value = ce_term(logits_encoder, y_f, &t2.grad_encoder, &t2.grad_downstream);
      result.terms = {std::move(t1), std::move(t2)};
      break;
    }
    case LossKind::AsymmetricCe: {
      LossTerm t{"ce(y_f, y_e)", 0.0, {}, {}};
      t.value = ce_term(logits_downstream, y_e, &t.grad_downstream, &t.grad_encoder);
      result.terms = {std::move(t)};
      break;
    }
    case LossKind::L1: {
      const Matrix sign = (y_f - y_e).array().sign().matrix() / n;
      LossTerm t{"l1", l1_distance(y_f, y_e), nn::softmax_backward(y_f, sign), nn::softmax_backward(y_e, -sign)};
      result.terms = {std::move(t)};
      break;
    }
    case LossKind::SquaredHellinger: {
      const Matrix sf = y_f.cwiseMax(kProbFloor).cwiseSqrt();
      const Matrix se = y_e.cwiseMax(kProbFloor).cwiseSqrt();
      const Matrix gf = -0.5 * se.cwiseQuotient(sf) / n;
      const Matrix ge = -0.5 * sf.cwiseQuotient(se) / n;
      LossTerm t{"squared-hellinger", squared_hellinger(y_f, y_e), nn::softmax_backward(y_f, gf),
                 nn::softmax_backward(y_e, ge)};
      result.terms = {std::move(t)};
      break;
    }
    case LossKind::Mig: {
      // MIG is symmetric in its two arguments, so giving each network the
      // partial derivative with the other side held fixed is the same as
      // the plain gradient of a single MIG term.
      Matrix ga;
      Matrix gb;
      mig_gradients(y_f, y_e, prior, ga, gb);
      LossTerm t{"mig", mig_value(y_f, y_e, prior), nn::softmax_backward(y_f, ga), nn::softmax_backward(y_e, gb)};
      result.terms = {std::move(t)};
      break;
    }
  }
  result.grad_downstream = zero;
  result.grad_encoder = zero;
  for (const auto& t : result.terms) {
    result.value += t.value;
    result.grad_downstream += t.grad_downstream;
    result.grad_encoder += t.grad_encoder;
  }
  return result;
}

}  // namespace wslab::weasel
