#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wslab/nn/mlp.hpp"

namespace wslab::weasel {

/// Squashing applied to the raw encoder scores to obtain accuracy scores.
enum class AccuracyActivation {
  Softmax,  // tau2 * softmax(tau1 * e) over the LF axis
  Sigmoid,  // tau2 * sigmoid(tau1 * e) per LF
  Relu,     // tau2 * (relu(tau1 * e) + 1e-5) per LF
  Tanh,     // tau2 * tanh(tau1 * e) per LF, may go negative
};

std::string to_string(AccuracyActivation a);
AccuracyActivation accuracy_activation_from_string(const std::string& name);

struct EncoderConfig {
  std::vector<Index> hidden{70, 70};
  bool batchnorm = true;
  double inverse_temperature = 1.0;  // tau1
  std::optional<double> scale;       // tau2; sqrt(m) when unset
  bool class_conditional = false;
  bool use_features = true;
  AccuracyActivation activation = AccuracyActivation::Softmax;
};

/// Cached intermediates of one encoder pass over a batch.
struct EncoderPass {
  Matrix raw;        // e(lambda, x): B x m, or B x (m*C) class-conditional
  Matrix theta;      // accuracy scores, same shape as raw
  Matrix logits;     // s + log(prior): B x C
  Matrix posterior;  // y_e = softmax(logits)
};

/// Neural encoder plus the accuracy-score head and the vote aggregation.
///
/// The body maps concat(flattened one-hot votes, features) to raw scores;
/// the head turns them into accuracy scores theta; the aggregation forms
/// s_c = sum_j theta_j * votes_jc (theta_jc in class-conditional mode) and
/// y_e proportional to softmax(s) * prior.
class EncoderHead {
 public:
  EncoderHead() = default;
  EncoderHead(Index num_lfs, int num_classes, Index feature_dims, const EncoderConfig& config, double dropout,
              Rng& rng);

  Index num_lfs() const { return lfs_; }
  int num_classes() const { return classes_; }
  Index feature_dims() const { return dims_; }
  double inverse_temperature() const { return tau1_; }
  double scale() const { return tau2_; }
  const EncoderConfig& config() const { return config_; }

  nn::Mlp& body() { return body_; }
  const nn::Mlp& body() const { return body_; }

  /// Network input for a batch: votes (B x m*C) followed by features.
  Matrix body_input(const Matrix& votes, const Matrix& features) const;

  /// Accuracy scores from raw scores (pure).
  Matrix accuracy_scores(const Matrix& raw) const;

  /// s = aggregated votes, B x C.
  Matrix aggregate(const Matrix& theta, const Matrix& votes) const;

  EncoderPass forward(const Matrix& votes, const Matrix& features, std::span<const double> prior, nn::Mode mode,
                      Rng& rng);
  /// Eval-mode posterior, leaves no observable state behind.
  Matrix posterior(const Matrix& votes, const Matrix& features, std::span<const double> prior);

  /// Backpropagates dL/dlogits through aggregation, head and body,
  /// accumulating into the body parameters.
  void backward(const EncoderPass& pass, const Matrix& votes, const Matrix& grad_logits);

 private:
  void check_shapes(const Matrix& votes, const Matrix& features) const;

  Index lfs_ = 0;
  int classes_ = 2;
  Index dims_ = 0;
  double tau1_ = 1.0;
  double tau2_ = 1.0;
  EncoderConfig config_;
  nn::Mlp body_;
};

/// softmax(s) * prior, renormalized; in log space: softmax(s + log prior).
Matrix prior_weighted_logits(const Matrix& s, std::span<const double> prior);

}  // namespace wslab::weasel
