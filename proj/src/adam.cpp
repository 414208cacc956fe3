#include "cprlab/adam.hpp"

#include <cmath>

#include "cprlab/common.hpp"

namespace cprlab::nn {

Adam::Adam(std::vector<NodePtr> params, AdamConfig cfg)
    : params_(std::move(params)), cfg_(cfg) {
  if (!(cfg_.beta1 >= 0.0 && cfg_.beta1 < 1.0))
    throw InvalidInput("Adam: beta1 must lie in [0,1)");
  if (!(cfg_.beta2 >= 0.0 && cfg_.beta2 < 1.0))
    throw InvalidInput("Adam: beta2 must lie in [0,1)");
  if (!(cfg_.eps > 0.0)) throw InvalidInput("Adam: eps must be > 0");
  if (!std::isfinite(cfg_.lr) || cfg_.lr < 0.0)
    throw InvalidInput("Adam: lr must be finite and >= 0");
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const auto& p : params_) {
    m_.emplace_back(p->value.size(), 0.0);
    v_.emplace_back(p->value.size(), 0.0);
  }
}

void Adam::step() {
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t pi = 0; pi < params_.size(); ++pi) {
    Node& p = *params_[pi];
    auto& m = m_[pi];
    auto& v = v_[pi];
    const bool has = p.has_grad();
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = has ? p.grad.data[i] : 0.0;
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g;
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g * g;
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      p.value.data[i] -= cfg_.lr * mhat / std::sqrt(vhat + cfg_.eps);
    }
  }
}

void Adam::zero_grad() { nn::zero_grad(params_); }

}  // namespace cprlab::nn
