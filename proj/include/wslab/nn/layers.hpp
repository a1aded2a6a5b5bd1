#pragma once

#include <memory>
#include <string>
#include <vector>

#include "wslab/common/types.hpp"

namespace wslab::nn {

enum class Mode { Train, Eval };

/// A trainable tensor together with its accumulated gradient.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
};

enum class LayerKind { Dense, Relu, BatchNorm, Dropout };

std::string to_string(LayerKind kind);
LayerKind layer_kind_from_string(const std::string& name);

/// Structural description of a layer, enough to rebuild it.
struct LayerSpec {
  LayerKind kind = LayerKind::Dense;
  Index in = 0;
  Index out = 0;
  double rate = 0.0;  // dropout only
};

/// Base class for the feed-forward building blocks.
///
/// forward() caches whatever backward() needs; backward() accumulates into
/// the parameter gradients and returns the gradient with respect to the
/// layer input. Calling backward() before any forward() throws.
class Layer {
 public:
  virtual ~Layer() = default;

  virtual Matrix forward(const Matrix& input, Mode mode, Rng& rng) = 0;
  virtual Matrix backward(const Matrix& grad_output) = 0;

  virtual std::vector<Parameter*> parameters() { return {}; }
  /// Non-trainable state that still belongs in checkpoints.
  virtual std::vector<Matrix*> buffers() { return {}; }

  virtual LayerSpec spec() const = 0;
  virtual std::unique_ptr<Layer> clone() const = 0;

 protected:
  void require_cache(bool cached) const;
};

class Dense final : public Layer {
 public:
  Dense(Index in, Index out);
  /// He-style uniform init in +-sqrt(6 / fan_in), zero bias.
  Dense(Index in, Index out, Rng& rng);

  Matrix forward(const Matrix& input, Mode mode, Rng& rng) override;
  Matrix backward(const Matrix& grad_output) override;
  std::vector<Parameter*> parameters() override { return {&weight_, &bias_}; }
  LayerSpec spec() const override { return {LayerKind::Dense, in_, out_, 0.0}; }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Dense>(*this); }

  Parameter& weight() { return weight_; }
  Parameter& bias() { return bias_; }

 private:
  Index in_;
  Index out_;
  Parameter weight_;  // in x out
  Parameter bias_;    // 1 x out
  Matrix input_;
  bool cached_ = false;
};

class Relu final : public Layer {
 public:
  explicit Relu(Index dim) : dim_(dim) {}

  Matrix forward(const Matrix& input, Mode mode, Rng& rng) override;
  Matrix backward(const Matrix& grad_output) override;
  LayerSpec spec() const override { return {LayerKind::Relu, dim_, dim_, 0.0}; }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Relu>(*this); }

 private:
  Index dim_;
  Matrix input_;
  bool cached_ = false;
};

/// Batch normalization over the batch axis.
///
/// Train mode normalizes with the (biased) batch statistics and folds them
/// into running averages with decay 0.9; eval mode uses the running
/// averages only and leaves them untouched.
class BatchNorm final : public Layer {
 public:
  static constexpr double kEpsilon = 1e-5;
  static constexpr double kDecay = 0.9;

  explicit BatchNorm(Index dim);

  Matrix forward(const Matrix& input, Mode mode, Rng& rng) override;
  Matrix backward(const Matrix& grad_output) override;
  std::vector<Parameter*> parameters() override { return {&scale_, &shift_}; }
  std::vector<Matrix*> buffers() override { return {&running_mean_, &running_var_}; }
  LayerSpec spec() const override { return {LayerKind::BatchNorm, dim_, dim_, 0.0}; }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<BatchNorm>(*this); }

  const Matrix& running_mean() const { return running_mean_; }
  const Matrix& running_var() const { return running_var_; }
  Parameter& scale() { return scale_; }
  Parameter& shift() { return shift_; }

 private:
  Index dim_;
  Parameter scale_;
  Parameter shift_;
  Matrix running_mean_;
  Matrix running_var_;
  Matrix normalized_;
  Matrix inv_std_;
  Mode cached_mode_ = Mode::Eval;
  bool cached_ = false;
};

/// Inverted dropout: kept activations are scaled by 1/(1-rate) in train
/// mode so eval mode is the identity.
class Dropout final : public Layer {
 public:
  Dropout(Index dim, double rate);

  Matrix forward(const Matrix& input, Mode mode, Rng& rng) override;
  Matrix backward(const Matrix& grad_output) override;
  LayerSpec spec() const override { return {LayerKind::Dropout, dim_, dim_, rate_}; }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Dropout>(*this); }

 private:
  Index dim_;
  double rate_;
  Matrix mask_;
  bool cached_ = false;
};

}  // namespace wslab::nn
