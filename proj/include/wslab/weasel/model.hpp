#pragma once

#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "wslab/weasel/encoder.hpp"
#include "wslab/weasel/losses.hpp"

namespace wslab::weasel {

struct DownstreamConfig {
  std::vector<Index> hidden{50, 50, 25};
  bool batchnorm = false;
};

/// Architecture and objective of the end-to-end learner.
struct WeaselConfig {
  EncoderConfig encoder;
  DownstreamConfig downstream;
  LossKind loss = LossKind::SymmetricCeStopGrad;
  /// Class prior multiplied into the encoder posterior; empty = uniform.
  std::vector<double> prior;
  double dropout = 0.3;
};

/// Encoder, downstream classifier and the objective tying them together.
struct WeaselModel {
  EncoderHead encoder;
  nn::Mlp downstream;
  std::vector<double> prior;
  LossKind loss = LossKind::SymmetricCeStopGrad;

  int num_classes() const { return encoder.num_classes(); }

  /// softmax of the downstream logits, eval mode. Needs only features.
  Matrix predict(const Matrix& features);
  /// Encoder posterior y_e, eval mode.
  Matrix encoder_posterior(const Matrix& votes, const Matrix& features);
};

/// Builds both networks with initialization drawn from `seed`.
WeaselModel make_weasel_model(const WeaselConfig& config, Index num_lfs, int num_classes, Index feature_dims,
                              std::uint64_t seed);

/// Downstream network alone (used by baselines and the supervised ceiling).
nn::Mlp make_downstream(const DownstreamConfig& config, Index feature_dims, int num_classes, double dropout,
                        std::uint64_t seed);

nlohmann::json checkpoint_json(const WeaselModel& model);

}  // namespace wslab::weasel
