#pragma once

#include <unordered_map>
#include <vector>

#include "hgbd/nn/tape.hpp"

namespace hgbd::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Bias-corrected Adam over a fixed parameter list.
class Adam {
 public:
  Adam(std::vector<Parameter*> params, AdamConfig cfg = {});

  /// Applies one update from the current Parameter::grad values.
  void step();
  void zero_grad();

  double lr() const { return cfg_.lr; }
  void set_lr(double lr) { cfg_.lr = lr; }
  long steps() const { return t_; }
  const std::vector<Parameter*>& params() const { return params_; }

 private:
  std::vector<Parameter*> params_;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
  AdamConfig cfg_;
  long t_ = 0;
};

}  // namespace hgbd::nn
