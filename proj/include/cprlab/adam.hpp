#pragma once

#include <cstdint>
#include <vector>

#include "cprlab/autograd.hpp"

namespace cprlab::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam. Update rule per element:
//   m <- b1*m + (1-b1)*g ;  v <- b2*v + (1-b2)*g^2
//   theta -= lr * (m/(1-b1^t)) / sqrt(v/(1-b2^t) + eps)
// The epsilon sits inside the square root, so a unit first-step gradient at
// lr=1e-3 moves the parameter by exactly -1e-3/sqrt(1+1e-8).
class Adam {
 public:
  explicit Adam(std::vector<NodePtr> params, AdamConfig cfg = {});

  // Consumes current grads; params with no accumulated grad are treated as
  // having zero gradient (moments still decay, t still advances).
  void step();
  void zero_grad();
  std::uint64_t steps() const { return t_; }
  const AdamConfig& config() const { return cfg_; }

 private:
  std::vector<NodePtr> params_;
  std::vector<std::vector<double>> m_, v_;
  AdamConfig cfg_;
  std::uint64_t t_ = 0;
};

}  // namespace cprlab::nn
