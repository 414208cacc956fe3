#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "cprlab/rng.hpp"
#include "cprlab/tensor.hpp"

namespace cprlab::nn {

// Reverse-mode automatic differentiation over Tensor-valued expressions.
// Nodes form a DAG; ids increase with creation order, so iterating reachable
// nodes by descending id is a valid topological order for backpropagation.
// All forward/backward loops use a fixed summation order (time ascending, then
// input channel, then output channel), so results are bit-deterministic.
struct Node;
using NodePtr = std::shared_ptr<Node>;

struct Node {
  Tensor value;
  Tensor grad;  // empty until gradient reaches this node
  bool requires_grad = false;
  std::uint64_t id = 0;
  std::vector<NodePtr> parents;
  std::function<void()> backprop;

  void ensure_grad() {
    if (grad.data.empty()) grad = Tensor(value.length, value.channels);
  }
  bool has_grad() const { return !grad.data.empty(); }
};

// Graph inputs. `leaf` marks a trainable parameter; `constant` does not
// receive gradients.
NodePtr constant(Tensor v);
NodePtr leaf(Tensor v);

// Same-padded 1D cross-correlation. Weight tensor shape (kernel, in*out) with
// element (t, ci*out + co); bias shape (1, out). Kernel length must be odd.
NodePtr conv1d(const NodePtr& x, const NodePtr& w, const NodePtr& b);

// Per-timestep affine map over channels. Weight shape (in, out), bias (1, out).
NodePtr dense(const NodePtr& x, const NodePtr& w, const NodePtr& b);

NodePtr relu(const NodePtr& x);  // subgradient at 0 is 0

// Non-overlapping max pooling; length must divide evenly, ties break to the
// earliest index.
NodePtr maxpool1d(const NodePtr& x, std::size_t pool);

// Nearest-neighbor repetition by `factor`.
NodePtr upsample1d(const NodePtr& x, std::size_t factor);

NodePtr concat_channels(const NodePtr& a, const NodePtr& b);
NodePtr add(const NodePtr& a, const NodePtr& b);
NodePtr scale(const NodePtr& x, double k);
NodePtr reshape(const NodePtr& x, std::size_t length, std::size_t channels);

// Scalar sum of mask-weighted absolute errors: sum(mask * |pred - target|).
// Gradient w.r.t. pred is mask * sign(pred - target), with sign(0) = 0.
NodePtr masked_abs_sum(const NodePtr& pred, Tensor target, Tensor mask);

// Mean absolute error over unmasked positions. With a null mask, positions
// where the target is NaN are treated as masked.
NodePtr mae_loss(const NodePtr& pred, const Tensor& target,
                 const Tensor* mask = nullptr);

// Scalar readout sum(x * w) for gradient-check harnesses.
NodePtr dot_const(const NodePtr& x, Tensor w);

// Backpropagate from a scalar root; accumulates into the grads of every
// reachable node with requires_grad. seed_grad lets callers fold a constant
// outer factor (e.g. 1/batch_total) into one pass.
void backward(const NodePtr& root, double seed_grad = 1.0);

void zero_grad(const std::vector<NodePtr>& params);

std::size_t count_unmasked(const Tensor& mask);

// Uniform init in +-sqrt(6/(fan_in+fan_out)).
void glorot_fill(Tensor& w, std::size_t fan_in, std::size_t fan_out,
                 SeededRng& rng);

}  // namespace cprlab::nn
