#pragma once

#include <span>
#include <vector>

#include "wslab/nn/layers.hpp"

namespace wslab::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.0;  // classic L2, added to the gradient
};

/// Adam with bias correction. Moment buffers are created on the first
/// step and must keep matching the parameter shapes afterwards.
class Adam {
 public:
  explicit Adam(AdamConfig config = {});

  void step(std::span<Parameter* const> params);

  long step_count() const { return steps_; }
  const AdamConfig& config() const { return config_; }
  const std::vector<Matrix>& first_moments() const { return m_; }
  const std::vector<Matrix>& second_moments() const { return v_; }

 private:
  AdamConfig config_;
  long steps_ = 0;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
};

}  // namespace wslab::nn
