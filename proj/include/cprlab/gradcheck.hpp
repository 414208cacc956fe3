#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "cprlab/autograd.hpp"

namespace cprlab::nn {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

// Compares reverse-mode gradients against central finite differences.
// `build_loss` must rebuild the scalar loss graph from the parameters' current
// values on every call. Up to `samples_per_tensor` random elements are probed
// per parameter tensor. Elements whose numeric estimate is unstable across
// step shrinkage (a kink or tie was crossed) are re-estimated with smaller
// steps; the smallest-error estimate wins, so genuine gradient bugs — which
// persist at every step size — still surface.
GradCheckResult grad_check(
    const std::function<NodePtr()>& build_loss,
    const std::vector<std::pair<std::string, NodePtr>>& params, SeededRng& rng,
    std::size_t samples_per_tensor = 20, double step = 1e-5);

}  // namespace cprlab::nn
