#include "cprlab/autograd.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <unordered_set>

#include "cprlab/common.hpp"

namespace cprlab::nn {

namespace {

std::atomic<std::uint64_t> g_next_id{1};

NodePtr make_node(Tensor v, std::vector<NodePtr> parents) {
  auto n = std::make_shared<Node>();
  n->value = std::move(v);
  n->id = g_next_id.fetch_add(1, std::memory_order_relaxed);
  n->requires_grad = false;
  for (const auto& p : parents)
    if (p->requires_grad) n->requires_grad = true;
  n->parents = std::move(parents);
  return n;
}

void shape_error(const char* op, const Tensor& a, const Tensor& b) {
  throw InvalidInput(std::string(op) + ": incompatible shapes " + shape_str(a) +
                     " and " + shape_str(b));
}

}  // namespace

NodePtr constant(Tensor v) { return make_node(std::move(v), {}); }

NodePtr leaf(Tensor v) {
  auto n = make_node(std::move(v), {});
  n->requires_grad = true;
  return n;
}

NodePtr conv1d(const NodePtr& x, const NodePtr& w, const NodePtr& b) {
  const Tensor& xv = x->value;
  const Tensor& wv = w->value;
  const Tensor& bv = b->value;
  const std::size_t k = wv.length;
  const std::size_t in = xv.channels;
  const std::size_t out = bv.channels;
  if (k % 2 == 0) throw InvalidInput("conv1d: kernel length must be odd");
  if (bv.length != 1) shape_error("conv1d bias", bv, Tensor(1, out));
  if (wv.channels != in * out) shape_error("conv1d weight", wv, xv);

  const std::size_t L = xv.length;
  const std::size_t half = k / 2;
  Tensor y(L, out);
  for (std::size_t i = 0; i < L; ++i) {
    double* yi = &y.data[i * out];
    for (std::size_t co = 0; co < out; ++co) yi[co] = bv.data[co];
    for (std::size_t t = 0; t < k; ++t) {
      const std::size_t j = i + t;
      if (j < half || j - half >= L) continue;  // zero padding
      const double* xj = &xv.data[(j - half) * in];
      const double* wt = &wv.data[t * in * out];
      for (std::size_t ci = 0; ci < in; ++ci) {
        const double xvv = xj[ci];
        const double* wrow = wt + ci * out;
        for (std::size_t co = 0; co < out; ++co) yi[co] += xvv * wrow[co];
      }
    }
  }

  auto n = make_node(std::move(y), {x, w, b});
  Node* self = n.get();
  Node* xn = x.get();
  Node* wn = w.get();
  Node* bn = b.get();
  n->backprop = [self, xn, wn, bn, k, in, out, L, half]() {
    if (!self->has_grad()) return;
    const Tensor& dy = self->grad;
    if (xn->requires_grad) {
      xn->ensure_grad();
      for (std::size_t i = 0; i < L; ++i) {
        const double* dyi = &dy.data[i * out];
        for (std::size_t t = 0; t < k; ++t) {
          const std::size_t j = i + t;
          if (j < half || j - half >= L) continue;
          double* dxj = &xn->grad.data[(j - half) * in];
          const double* wt = &wn->value.data[t * in * out];
          for (std::size_t ci = 0; ci < in; ++ci) {
            const double* wrow = wt + ci * out;
            double acc = 0.0;
            for (std::size_t co = 0; co < out; ++co) acc += dyi[co] * wrow[co];
            dxj[ci] += acc;
          }
        }
      }
    }
    if (wn->requires_grad) {
      wn->ensure_grad();
      for (std::size_t i = 0; i < L; ++i) {
        const double* dyi = &dy.data[i * out];
        for (std::size_t t = 0; t < k; ++t) {
          const std::size_t j = i + t;
          if (j < half || j - half >= L) continue;
          const double* xj = &xn->value.data[(j - half) * in];
          double* dwt = &wn->grad.data[t * in * out];
          for (std::size_t ci = 0; ci < in; ++ci) {
            const double xvv = xj[ci];
            double* dwrow = dwt + ci * out;
            for (std::size_t co = 0; co < out; ++co) dwrow[co] += xvv * dyi[co];
          }
        }
      }
    }
    if (bn->requires_grad) {
      bn->ensure_grad();
      for (std::size_t i = 0; i < L; ++i) {
        const double* dyi = &dy.data[i * out];
        for (std::size_t co = 0; co < out; ++co) bn->grad.data[co] += dyi[co];
      }
    }
  };
  return n;
}

NodePtr dense(const NodePtr& x, const NodePtr& w, const NodePtr& b) {
  const Tensor& xv = x->value;
  const Tensor& wv = w->value;
  const Tensor& bv = b->value;
  if (wv.length != xv.channels) shape_error("dense weight", wv, xv);
  if (bv.length != 1 || bv.channels != wv.channels)
    shape_error("dense bias", bv, wv);
  const std::size_t L = xv.length;
  const std::size_t in = xv.channels;
  const std::size_t out = wv.channels;

  Tensor y(L, out);
  for (std::size_t i = 0; i < L; ++i) {
    double* yi = &y.data[i * out];
    const double* xi = &xv.data[i * in];
    for (std::size_t co = 0; co < out; ++co) yi[co] = bv.data[co];
    for (std::size_t ci = 0; ci < in; ++ci) {
      const double xvv = xi[ci];
      const double* wrow = &wv.data[ci * out];
      for (std::size_t co = 0; co < out; ++co) yi[co] += xvv * wrow[co];
    }
  }

  auto n = make_node(std::move(y), {x, w, b});
  Node* self = n.get();
  Node* xn = x.get();
  Node* wn = w.get();
  Node* bn = b.get();
  n->backprop = [self, xn, wn, bn, L, in, out]() {
    if (!self->has_grad()) return;
    const Tensor& dy = self->grad;
    if (xn->requires_grad) {
      xn->ensure_grad();
      for (std::size_t i = 0; i < L; ++i) {
        const double* dyi = &dy.data[i * out];
        double* dxi = &xn->grad.data[i * in];
        for (std::size_t ci = 0; ci < in; ++ci) {
          const double* wrow = &wn->value.data[ci * out];
          double acc = 0.0;
          for (std::size_t co = 0; co < out; ++co) acc += dyi[co] * wrow[co];
          dxi[ci] += acc;
        }
      }
    }
    if (wn->requires_grad) {
      wn->ensure_grad();
      for (std::size_t i = 0; i < L; ++i) {
        const double* dyi = &dy.data[i * out];
        const double* xi = &xn->value.data[i * in];
        for (std::size_t ci = 0; ci < in; ++ci) {
          double* dwrow = &wn->grad.data[ci * out];
          const double xvv = xi[ci];
          for (std::size_t co = 0; co < out; ++co) dwrow[co] += xvv * dyi[co];
        }
      }
    }
    if (bn->requires_grad) {
      bn->ensure_grad();
      for (std::size_t i = 0; i < L; ++i) {
        const double* dyi = &dy.data[i * out];
        for (std::size_t co = 0; co < out; ++co) bn->grad.data[co] += dyi[co];
      }
    }
  };
  return n;
}

NodePtr relu(const NodePtr& x) {
  Tensor y = x->value;
  for (double& v : y.data) v = v > 0.0 ? v : 0.0;
  auto n = make_node(std::move(y), {x});
  Node* self = n.get();
  Node* xn = x.get();
  n->backprop = [self, xn]() {
    if (!self->has_grad() || !xn->requires_grad) return;
    xn->ensure_grad();
    const std::size_t sz = self->grad.size();
    for (std::size_t i = 0; i < sz; ++i)
      if (xn->value.data[i] > 0.0) xn->grad.data[i] += self->grad.data[i];
  };
  return n;
}

NodePtr maxpool1d(const NodePtr& x, std::size_t pool) {
  const Tensor& xv = x->value;
  if (pool < 1) throw InvalidInput("maxpool1d: pool must be >= 1");
  if (pool == 0 || xv.length % pool != 0)
    throw InvalidInput("maxpool1d: length " + std::to_string(xv.length) +
                       " not divisible by pool " + std::to_string(pool));
  const std::size_t L = xv.length / pool;
  const std::size_t C = xv.channels;
  Tensor y(L, C);
  auto argmax = std::make_shared<std::vector<std::size_t>>(L * C);
  for (std::size_t i = 0; i < L; ++i) {
    for (std::size_t c = 0; c < C; ++c) {
      std::size_t best = i * pool;
      double bv = xv.at(best, c);
      for (std::size_t t = 1; t < pool; ++t) {
        const double v = xv.at(i * pool + t, c);
        if (v > bv) {  // strict: ties keep the earliest index
          bv = v;
          best = i * pool + t;
        }
      }
      y.at(i, c) = bv;
      (*argmax)[i * C + c] = best;
    }
  }
  auto n = make_node(std::move(y), {x});
  Node* self = n.get();
  Node* xn = x.get();
  n->backprop = [self, xn, argmax, L, C]() {
    if (!self->has_grad() || !xn->requires_grad) return;
    xn->ensure_grad();
    for (std::size_t i = 0; i < L; ++i)
      for (std::size_t c = 0; c < C; ++c)
        xn->grad.at((*argmax)[i * C + c], c) += self->grad.at(i, c);
  };
  return n;
}

NodePtr upsample1d(const NodePtr& x, std::size_t factor) {
  if (factor < 1) throw InvalidInput("upsample1d: factor must be >= 1");
  const Tensor& xv = x->value;
  const std::size_t C = xv.channels;
  Tensor y(xv.length * factor, C);
  for (std::size_t i = 0; i < y.length; ++i)
    for (std::size_t c = 0; c < C; ++c) y.at(i, c) = xv.at(i / factor, c);
  auto n = make_node(std::move(y), {x});
  Node* self = n.get();
  Node* xn = x.get();
  n->backprop = [self, xn, factor, C]() {
    if (!self->has_grad() || !xn->requires_grad) return;
    xn->ensure_grad();
    for (std::size_t i = 0; i < self->grad.length; ++i)
      for (std::size_t c = 0; c < C; ++c)
        xn->grad.at(i / factor, c) += self->grad.at(i, c);
  };
  return n;
}

NodePtr concat_channels(const NodePtr& a, const NodePtr& b) {
  const Tensor& av = a->value;
  const Tensor& bv = b->value;
  if (av.length != bv.length) shape_error("concat_channels", av, bv);
  const std::size_t L = av.length;
  const std::size_t Ca = av.channels;
  const std::size_t Cb = bv.channels;
  Tensor y(L, Ca + Cb);
  for (std::size_t i = 0; i < L; ++i) {
    for (std::size_t c = 0; c < Ca; ++c) y.at(i, c) = av.at(i, c);
    for (std::size_t c = 0; c < Cb; ++c) y.at(i, Ca + c) = bv.at(i, c);
  }
  auto n = make_node(std::move(y), {a, b});
  Node* self = n.get();
  Node* an = a.get();
  Node* bn = b.get();
  n->backprop = [self, an, bn, L, Ca, Cb]() {
    if (!self->has_grad()) return;
    if (an->requires_grad) {
      an->ensure_grad();
      for (std::size_t i = 0; i < L; ++i)
        for (std::size_t c = 0; c < Ca; ++c)
          an->grad.at(i, c) += self->grad.at(i, c);
    }
    if (bn->requires_grad) {
      bn->ensure_grad();
      for (std::size_t i = 0; i < L; ++i)
        for (std::size_t c = 0; c < Cb; ++c)
          bn->grad.at(i, c) += self->grad.at(i, Ca + c);
    }
  };
  return n;
}

NodePtr add(const NodePtr& a, const NodePtr& b) {
  const Tensor& av = a->value;
  const Tensor& bv = b->value;
  if (!av.same_shape(bv)) shape_error("add", av, bv);
  Tensor y = av;
  for (std::size_t i = 0; i < y.size(); ++i) y.data[i] += bv.data[i];
  auto n = make_node(std::move(y), {a, b});
  Node* self = n.get();
  Node* an = a.get();
  Node* bn = b.get();
  n->backprop = [self, an, bn]() {
    if (!self->has_grad()) return;
    const std::size_t sz = self->grad.size();
    if (an->requires_grad) {
      an->ensure_grad();
      for (std::size_t i = 0; i < sz; ++i)
        an->grad.data[i] += self->grad.data[i];
    }
    if (bn->requires_grad) {
      bn->ensure_grad();
      for (std::size_t i = 0; i < sz; ++i)
        bn->grad.data[i] += self->grad.data[i];
    }
  };
  return n;
}

NodePtr scale(const NodePtr& x, double k) {
  Tensor y = x->value;
  for (double& v : y.data) v *= k;
  auto n = make_node(std::move(y), {x});
  Node* self = n.get();
  Node* xn = x.get();
  n->backprop = [self, xn, k]() {
    if (!self->has_grad() || !xn->requires_grad) return;
    xn->ensure_grad();
    const std::size_t sz = self->grad.size();
    for (std::size_t i = 0; i < sz; ++i)
      xn->grad.data[i] += k * self->grad.data[i];
  };
  return n;
}

NodePtr reshape(const NodePtr& x, std::size_t length, std::size_t channels) {
  const Tensor& xv = x->value;
  if (length * channels != xv.size())
    throw InvalidInput("reshape: size mismatch " + shape_str(xv) + " -> (" +
                       std::to_string(length) + "," + std::to_string(channels) +
                       ")");
  Tensor y(length, channels);
  y.data = xv.data;
  auto n = make_node(std::move(y), {x});
  Node* self = n.get();
  Node* xn = x.get();
  n->backprop = [self, xn]() {
    if (!self->has_grad() || !xn->requires_grad) return;
    xn->ensure_grad();
    const std::size_t sz = self->grad.size();
    for (std::size_t i = 0; i < sz; ++i)
      xn->grad.data[i] += self->grad.data[i];
  };
  return n;
}

NodePtr masked_abs_sum(const NodePtr& pred, Tensor target, Tensor mask) {
  const Tensor& pv = pred->value;
  if (!pv.same_shape(target)) shape_error("masked_abs_sum target", pv, target);
  if (!pv.same_shape(mask)) shape_error("masked_abs_sum mask", pv, mask);
  double sum = 0.0;
  for (std::size_t i = 0; i < pv.size(); ++i)
    if (mask.data[i] != 0.0) sum += std::abs(pv.data[i] - target.data[i]);
  auto t = std::make_shared<Tensor>(std::move(target));
  auto m = std::make_shared<Tensor>(std::move(mask));
  auto n = make_node(Tensor::scalar(sum), {pred});
  Node* self = n.get();
  Node* xn = pred.get();
  n->backprop = [self, xn, t, m]() {
    if (!self->has_grad() || !xn->requires_grad) return;
    xn->ensure_grad();
    const double g = self->grad.data[0];
    const std::size_t sz = xn->value.size();
    for (std::size_t i = 0; i < sz; ++i) {
      if (m->data[i] == 0.0) continue;
      const double d = xn->value.data[i] - t->data[i];
      if (d > 0.0)
        xn->grad.data[i] += g;
      else if (d < 0.0)
        xn->grad.data[i] -= g;
    }
  };
  return n;
}

NodePtr mae_loss(const NodePtr& pred, const Tensor& target, const Tensor* mask) {
  Tensor m(target.length, target.channels);
  if (mask) {
    if (!target.same_shape(*mask))
      shape_error("mae_loss mask", target, *mask);
    m = *mask;
  } else {
    for (std::size_t i = 0; i < target.size(); ++i)
      m.data[i] = std::isnan(target.data[i]) ? 0.0 : 1.0;
  }
  Tensor t = target;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (m.data[i] == 0.0) t.data[i] = 0.0;  // neutralize masked NaNs
  const std::size_t n_unmasked = count_unmasked(m);
  if (n_unmasked == 0) throw InvalidInput("mae_loss: every position is masked");
  return scale(masked_abs_sum(pred, std::move(t), std::move(m)),
               1.0 / static_cast<double>(n_unmasked));
}

NodePtr dot_const(const NodePtr& x, Tensor w) {
  const Tensor& xv = x->value;
  if (!xv.same_shape(w)) shape_error("dot_const", xv, w);
  double sum = 0.0;
  for (std::size_t i = 0; i < xv.size(); ++i) sum += xv.data[i] * w.data[i];
  auto wp = std::make_shared<Tensor>(std::move(w));
  auto n = make_node(Tensor::scalar(sum), {x});
  Node* self = n.get();
  Node* xn = x.get();
  n->backprop = [self, xn, wp]() {
    if (!self->has_grad() || !xn->requires_grad) return;
    xn->ensure_grad();
    const double g = self->grad.data[0];
    const std::size_t sz = xn->value.size();
    for (std::size_t i = 0; i < sz; ++i)
      xn->grad.data[i] += g * wp->data[i];
  };
  return n;
}

void backward(const NodePtr& root, double seed_grad) {
  if (root->value.size() != 1)
    throw InvalidInput("backward: root must be a scalar");
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<Node*> stack{root.get()};
  seen.insert(root.get());
  while (!stack.empty()) {
    Node* n = stack.back();
    stack.pop_back();
    order.push_back(n);
    for (const auto& p : n->parents)
      if (seen.insert(p.get()).second) stack.push_back(p.get());
  }
  std::sort(order.begin(), order.end(),
            [](const Node* a, const Node* b) { return a->id > b->id; });
  root->ensure_grad();
  root->grad.data[0] += seed_grad;
  for (Node* n : order)
    if (n->backprop) n->backprop();
}

void zero_grad(const std::vector<NodePtr>& params) {
  for (const auto& p : params) {
    p->grad = Tensor();
  }
}

std::size_t count_unmasked(const Tensor& mask) {
  std::size_t n = 0;
  for (double v : mask.data)
    if (v != 0.0) ++n;
  return n;
}

void glorot_fill(Tensor& w, std::size_t fan_in, std::size_t fan_out,
                 SeededRng& rng) {
  if (fan_in + fan_out == 0) throw InvalidInput("glorot_fill: zero fans");
  const double limit =
      std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (double& v : w.data) v = (2.0 * rng.uniform() - 1.0) * limit;
}

}  // namespace cprlab::nn
