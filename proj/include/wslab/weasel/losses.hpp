#pragma once

#include <span>
#include <string>
#include <vector>

#include "wslab/common/types.hpp"

namespace wslab::weasel {

enum class LossKind {
  SymmetricCeStopGrad,  // CE(y_f, sg(y_e)) + CE(y_e, sg(y_f))
  CeNoStopGrad,         // CE(y_f, y_e) + CE(y_e, y_f), gradients through targets
  AsymmetricCe,         // CE(y_f, y_e) only, gradients to both sides
  L1,
  SquaredHellinger,
  Mig,
};

std::string to_string(LossKind kind);
LossKind loss_kind_from_string(const std::string& name);

/// Probabilities are clamped to [kProbFloor, 1] before taking logs.
inline constexpr double kProbFloor = 1e-12;

/// One additive piece of a loss. Gradients are with respect to the
/// logits of each side (y_f = softmax(z_f), y_e = softmax(z_e)); a side
/// that is stop-gradded in this term gets an exact zero matrix.
struct LossTerm {
  std::string name;
  double value = 0.0;
  Matrix grad_downstream;
  Matrix grad_encoder;
  /// Whether the term is differentiated with respect to each side.
  bool downstream_live = true;
  bool encoder_live = true;
};

struct LossResult {
  double value = 0.0;
  Matrix grad_downstream;
  Matrix grad_encoder;
  std::vector<LossTerm> terms;
};

/// Batch-averaged loss between the downstream prediction softmax(z_f) and
/// the encoder posterior softmax(z_e). `prior` is the class balance used by
/// the MIG estimator.
LossResult compute_loss(LossKind kind, const Matrix& logits_downstream, const Matrix& logits_encoder,
                        std::span<const double> prior);

/// Cross-entropy of a softmax prediction against fixed soft targets, batch
/// averaged; gradient with respect to the logits.
LossTerm soft_target_cross_entropy(const Matrix& logits, const Matrix& targets);

// Distribution-level helpers (batch averaged), used by tests and reports.
double cross_entropy(const Matrix& prediction, const Matrix& target);
double l1_distance(const Matrix& a, const Matrix& b);
double squared_hellinger(const Matrix& a, const Matrix& b);

/// Negated MIG lower bound over a batch of n >= 2 paired distributions:
/// -[(1/n) sum_i log R_ii - 1/(n(n-1)) sum_{i != j} R_ij + 1] with
/// R_ij = sum_c a_ic b_jc / prior_c.
double mig_value(const Matrix& a, const Matrix& b, std::span<const double> prior);
/// Gradients of mig_value with respect to a and b.
void mig_gradients(const Matrix& a, const Matrix& b, std::span<const double> prior, Matrix& grad_a, Matrix& grad_b);

}  // namespace wslab::weasel
