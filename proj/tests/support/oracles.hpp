#pragma once
// Independent reference implementations and finite-difference helpers
// shared by the unit tests and the acceptance runner.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "wslab/common/types.hpp"
#include "wslab/nn/layers.hpp"
#include "wslab/nn/mlp.hpp"
#include "wslab/weasel/losses.hpp"
#include "wslab/weasel/model.hpp"

namespace wslab::oracle {

inline constexpr double kStep = 1e-6;
inline constexpr double kGradTolerance = 1e-4;

/// ||a - b|| / max(||a||, ||b||). Both below 1e-7 counts as zero: central
/// differences at h = 1e-6 carry roundoff around 1e-10 per entry.
inline double rel_error(const Matrix& a, const Matrix& b) {
  const double scale = std::max(a.norm(), b.norm());
  if (scale < 1e-7) return 0.0;
  return (a - b).norm() / scale;
}

inline Matrix random_matrix(Index rows, Index cols, Rng& rng, double scale = 1.0) {
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = scale * standard_normal(rng);
  return m;
}

/// Central differences of `f` with respect to every entry of `x`.
inline Matrix numeric_gradient(Matrix& x, const std::function<double()>& f, double h = kStep) {
  Matrix g(x.rows(), x.cols());
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index j = 0; j < x.cols(); ++j) {
      const double saved = x(i, j);
      x(i, j) = saved + h;
      const double up = f();
      x(i, j) = saved - h;
      const double down = f();
      x(i, j) = saved;
      g(i, j) = (up - down) / (2.0 * h);
    }
  }
  return g;
}

/// Worst relative error over the input gradient and every parameter of a
/// layer for the objective sum(forward(x) .* R). The RNG is re-seeded per
/// evaluation so dropout masks stay fixed.
inline double layer_gradient_error(nn::Layer& layer, Matrix input, nn::Mode mode, std::uint64_t seed) {
  Rng rng(seed);
  Rng probe_rng(seed);
  const Matrix probe = layer.forward(input, mode, probe_rng);
  const Matrix weights = random_matrix(probe.rows(), probe.cols(), rng);
  auto objective = [&] {
    Rng r(seed);
    return layer.forward(input, mode, r).cwiseProduct(weights).sum();
  };
  for (nn::Parameter* p : layer.parameters()) p->grad.setZero();
  Rng r(seed);
  layer.forward(input, mode, r);
  const Matrix grad_input = layer.backward(weights);
  std::vector<Matrix> grads;
  for (nn::Parameter* p : layer.parameters()) grads.push_back(p->grad);

  double worst = rel_error(grad_input, numeric_gradient(input, objective));
  std::size_t k = 0;
  for (nn::Parameter* p : layer.parameters()) worst = std::max(worst, rel_error(grads[k++], numeric_gradient(p->value, objective)));
  return worst;
}

/// Same check for a whole network.
inline double mlp_gradient_error(nn::Mlp& net, Matrix input, nn::Mode mode, std::uint64_t seed) {
  Rng rng(seed);
  Rng probe_rng(seed);
  const Matrix probe = net.forward(input, mode, probe_rng);
  const Matrix weights = random_matrix(probe.rows(), probe.cols(), rng);
  auto objective = [&] {
    Rng r(seed);
    return net.forward(input, mode, r).cwiseProduct(weights).sum();
  };
  net.zero_grad();
  Rng r(seed);
  net.forward(input, mode, r);
  const Matrix grad_input = net.backward(weights);
  std::vector<Matrix> grads;
  for (nn::Parameter* p : net.parameters()) grads.push_back(p->grad);
  double worst = rel_error(grad_input, numeric_gradient(input, objective));
  std::size_t k = 0;
  for (nn::Parameter* p : net.parameters()) worst = std::max(worst, rel_error(grads[k++], numeric_gradient(p->value, objective)));
  return worst;
}

/// Sum of the loss terms that are live for one side.
inline double live_value(const weasel::LossResult& r, bool downstream_side) {
  double v = 0.0;
  for (const auto& t : r.terms)
    if (downstream_side ? t.downstream_live : t.encoder_live) v += t.value;
  return v;
}

/// Loss gradients with respect to both logit matrices against central
/// differences; a side only sees the terms live for it.
inline double loss_gradient_error(weasel::LossKind kind, Matrix zf, Matrix ze, std::span<const double> prior) {
  const auto base = weasel::compute_loss(kind, zf, ze, prior);
  auto f_side = [&] { return live_value(weasel::compute_loss(kind, zf, ze, prior), true); };
  auto e_side = [&] { return live_value(weasel::compute_loss(kind, zf, ze, prior), false); };
  const double ef = rel_error(base.grad_downstream, numeric_gradient(zf, f_side));
  const double ee = rel_error(base.grad_encoder, numeric_gradient(ze, e_side));
  return std::max(ef, ee);
}

/// Full objective (encoder body -> accuracy scores -> aggregation ->
/// posterior, downstream net, loss) against central differences on every
/// parameter of both networks, honoring stop-grad through term liveness.
inline double composite_gradient_error(weasel::WeaselModel& model, const Matrix& votes, const Matrix& x,
                                       std::uint64_t seed) {
  auto evaluate = [&](weasel::EncoderPass* pass_out, Matrix* zf_out) {
    Rng re(seed);
    Rng rf(seed + 1);
    weasel::EncoderPass pass = model.encoder.forward(votes, x, model.prior, nn::Mode::Train, re);
    Matrix zf = model.downstream.forward(x, nn::Mode::Train, rf);
    auto loss = weasel::compute_loss(model.loss, zf, pass.logits, model.prior);
    if (pass_out) *pass_out = pass;
    if (zf_out) *zf_out = zf;
    return loss;
  };
  weasel::EncoderPass pass;
  const auto base = evaluate(&pass, nullptr);
  model.encoder.body().zero_grad();
  model.downstream.zero_grad();
  model.encoder.backward(pass, votes, base.grad_encoder);
  model.downstream.backward(base.grad_downstream);

  double worst = 0.0;
  for (nn::Parameter* p : model.encoder.body().parameters()) {
    const Matrix analytic = p->grad;
    worst = std::max(worst, rel_error(analytic, numeric_gradient(p->value, [&] { return live_value(evaluate(nullptr, nullptr), false); })));
  }
  for (nn::Parameter* p : model.downstream.parameters()) {
    const Matrix analytic = p->grad;
    worst = std::max(worst, rel_error(analytic, numeric_gradient(p->value, [&] { return live_value(evaluate(nullptr, nullptr), true); })));
  }
  return worst;
}

/// AUC as the fraction of (positive, negative) pairs ranked correctly,
/// ties counting one half.
inline double brute_force_auc(std::span<const double> scores, std::span<const int> labels) {
  double wins = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      pairs += 1.0;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

inline double brute_force_f1(std::span<const double> scores, std::span<const int> labels, double threshold) {
  double tp = 0.0;
  double fp = 0.0;
  double fn = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool pred = scores[i] >= threshold;
    if (pred && labels[i] == 1) tp += 1.0;
    if (pred && labels[i] == 0) fp += 1.0;
    if (!pred && labels[i] == 1) fn += 1.0;
  }
  return tp == 0.0 ? 0.0 : 2.0 * tp / (2.0 * tp + fp + fn);
}

/// Best F1 over every threshold that changes the prediction set.
inline double best_f1_sweep(std::span<const double> scores, std::span<const int> labels) {
  std::vector<double> candidates(scores.begin(), scores.end());
  candidates.push_back(std::numeric_limits<double>::infinity());
  double best = 0.0;
  for (const double t : candidates) best = std::max(best, brute_force_f1(scores, labels, t));
  return best;
}

/// Exact posterior P(y | votes) for conditionally independent LFs with
/// per-class vote distributions `emission[j](v, c)` = P(vote_j = v | y = c),
/// v = 0 (abstain) .. C.
inline Matrix bayes_posterior(const std::vector<Matrix>& emission, std::span<const double> prior,
                              const std::vector<int>& votes, Index rows, Index lfs) {
  const auto classes = static_cast<Index>(prior.size());
  Matrix post(rows, classes);
  for (Index i = 0; i < rows; ++i) {
    double total = 0.0;
    for (Index c = 0; c < classes; ++c) {
      double p = prior[static_cast<std::size_t>(c)];
      for (Index j = 0; j < lfs; ++j) p *= emission[static_cast<std::size_t>(j)](votes[static_cast<std::size_t>(i * lfs + j)], c);
      post(i, c) = p;
      total += p;
    }
    post.row(i) /= total;
  }
  return post;
}

}  // namespace wslab::oracle
