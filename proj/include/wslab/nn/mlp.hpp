#pragma once

#include <memory>
#include <vector>

#include <nlohmann/json.hpp>

#include "wslab/nn/layers.hpp"

namespace wslab::nn {

/// Shape of a fully connected ReLU network:
/// [dense -> (batchnorm) -> relu -> (dropout)] per hidden width, then a
/// final dense layer to `output_dim`.
struct MlpSpec {
  Index input_dim = 0;
  std::vector<Index> hidden;
  Index output_dim = 0;
  bool batchnorm = false;
  double dropout = 0.0;
};

/// Ordered stack of layers with value semantics (copies deep-clone layers).
class Mlp {
 public:
  Mlp() = default;
  Mlp(const MlpSpec& spec, Rng& rng);
  explicit Mlp(std::vector<std::unique_ptr<Layer>> layers);

  Mlp(const Mlp& other);
  Mlp& operator=(const Mlp& other);
  Mlp(Mlp&&) noexcept = default;
  Mlp& operator=(Mlp&&) noexcept = default;

  Matrix forward(const Matrix& input, Mode mode, Rng& rng);
  /// Eval-mode forward that leaves the caller's RNG alone.
  Matrix predict(const Matrix& input);
  /// Backpropagates `grad_output`, accumulating parameter gradients, and
  /// returns the gradient with respect to the network input.
  Matrix backward(const Matrix& grad_output);

  void zero_grad();
  std::vector<Parameter*> parameters();
  std::vector<Matrix*> buffers();

  Index input_dim() const;
  Index output_dim() const;
  std::size_t size() const { return layers_.size(); }
  Layer& layer(std::size_t i) { return *layers_.at(i); }
  const Layer& layer(std::size_t i) const { return *layers_.at(i); }

  /// Flat copy of every parameter and buffer, in layer order.
  std::vector<double> state() const;
  void load_state(const std::vector<double>& flat);

 private:
  void validate_chain() const;

  std::vector<std::unique_ptr<Layer>> layers_;
};

/// Checkpoint format: {"layers": [{"kind", "in", "out", "rate"}...],
/// "state": [flat parameters and buffers]}.
nlohmann::json to_json(const Mlp& net);
Mlp mlp_from_json(const nlohmann::json& doc);

}  // namespace wslab::nn
