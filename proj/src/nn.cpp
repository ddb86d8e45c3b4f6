#include "traj/nn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace traj::nn {

namespace {

Var make_node(Mat val, std::vector<Var> parents,
              std::function<void(Node&)> backward_fn) {
  auto n = std::make_shared<Node>();
  n->val = std::move(val);
  n->parents = std::move(parents);
  n->backward_fn = std::move(backward_fn);
  for (const auto& p : n->parents)
    if (p->requires_grad) n->requires_grad = true;
  return n;
}

void accumulate(Node& dst, const Mat& g) {
  dst.ensure_grad();
  kernels::axpy(1.0, g.data(), dst.grad.data(), g.size());
}

}  // namespace

Var constant(Mat v) {
  auto n = std::make_shared<Node>();
  n->val = std::move(v);
  return n;
}

Var parameter(Mat v) {
  auto n = std::make_shared<Node>();
  n->val = std::move(v);
  n->requires_grad = true;
  n->is_param = true;
  n->ensure_grad();
  return n;
}

Var detach(const Var& a) { return constant(a->val); }

Var matmul(const Var& a, const Var& b) {
  return make_node(traj::matmul(a->val, b->val), {a, b}, [](Node& n) {
    Node& a = *n.parents[0];
    Node& b = *n.parents[1];
    if (a.requires_grad) accumulate(a, matmul_nt(n.grad, b.val));
    if (b.requires_grad) accumulate(b, matmul_tn(a.val, n.grad));
  });
}

Var add(const Var& a, const Var& b) {
  if (!a->val.same_shape(b->val)) throw std::invalid_argument("add: shape");
  Mat out = a->val;
  kernels::axpy(1.0, b->val.data(), out.data(), out.size());
  return make_node(std::move(out), {a, b}, [](Node& n) {
    for (auto& p : n.parents)
      if (p->requires_grad) accumulate(*p, n.grad);
  });
}

Var sub(const Var& a, const Var& b) {
  if (!a->val.same_shape(b->val)) throw std::invalid_argument("sub: shape");
  Mat out = a->val;
  kernels::axpy(-1.0, b->val.data(), out.data(), out.size());
  return make_node(std::move(out), {a, b}, [](Node& n) {
    if (n.parents[0]->requires_grad) accumulate(*n.parents[0], n.grad);
    if (n.parents[1]->requires_grad) {
      Node& b = *n.parents[1];
      b.ensure_grad();
      kernels::axpy(-1.0, n.grad.data(), b.grad.data(), n.grad.size());
    }
  });
}

Var mul(const Var& a, const Var& b) {
  if (!a->val.same_shape(b->val)) throw std::invalid_argument("mul: shape");
  Mat out(a->val.rows(), a->val.cols());
  kernels::mul(a->val.data(), b->val.data(), out.data(), out.size());
  return make_node(std::move(out), {a, b}, [](Node& n) {
    Node& a = *n.parents[0];
    Node& b = *n.parents[1];
    if (a.requires_grad) {
      a.ensure_grad();
      kernels::mul_acc(n.grad.data(), b.val.data(), a.grad.data(),
                       n.grad.size());
    }
    if (b.requires_grad) {
      b.ensure_grad();
      kernels::mul_acc(n.grad.data(), a.val.data(), b.grad.data(),
                       n.grad.size());
    }
  });
}

Var scale(const Var& a, double s) {
  Mat out = a->val;
  for (double& x : out.values()) x *= s;
  return make_node(std::move(out), {a}, [s](Node& n) {
    if (n.parents[0]->requires_grad) {
      Node& a = *n.parents[0];
      a.ensure_grad();
      kernels::axpy(s, n.grad.data(), a.grad.data(), n.grad.size());
    }
  });
}

Var add_const(const Var& a, double c) {
  Mat out = a->val;
  for (double& x : out.values()) x += c;
  return make_node(std::move(out), {a}, [](Node& n) {
    if (n.parents[0]->requires_grad) accumulate(*n.parents[0], n.grad);
  });
}

Var add_rowvec(const Var& a, const Var& bias) {
  if (bias->val.rows() != 1 || bias->val.cols() != a->val.cols())
    throw std::invalid_argument("add_rowvec: shape");
  Mat out = a->val;
  for (std::size_t r = 0; r < out.rows(); ++r)
    kernels::axpy(1.0, bias->val.data(), out.row(r), out.cols());
  return make_node(std::move(out), {a, bias}, [](Node& n) {
    Node& a = *n.parents[0];
    Node& b = *n.parents[1];
    if (a.requires_grad) accumulate(a, n.grad);
    if (b.requires_grad) {
      b.ensure_grad();
      for (std::size_t r = 0; r < n.grad.rows(); ++r)
        kernels::axpy(1.0, n.grad.row(r), b.grad.data(), n.grad.cols());
    }
  });
}

Var sigmoid(const Var& a) {
  Mat out = a->val;
  for (double& x : out.values()) x = 1.0 / (1.0 + std::exp(-x));
  return make_node(std::move(out), {a}, [](Node& n) {
    if (!n.parents[0]->requires_grad) return;
    Node& a = *n.parents[0];
    a.ensure_grad();
    for (std::size_t i = 0; i < n.grad.size(); ++i) {
      const double y = n.val.data()[i];
      a.grad.data()[i] += n.grad.data()[i] * y * (1.0 - y);
    }
  });
}

Var tanh_(const Var& a) {
  Mat out = a->val;
  for (double& x : out.values()) x = std::tanh(x);
  return make_node(std::move(out), {a}, [](Node& n) {
    if (!n.parents[0]->requires_grad) return;
    Node& a = *n.parents[0];
    a.ensure_grad();
    for (std::size_t i = 0; i < n.grad.size(); ++i) {
      const double y = n.val.data()[i];
      a.grad.data()[i] += n.grad.data()[i] * (1.0 - y * y);
    }
  });
}

Var relu(const Var& a) {
  Mat out = a->val;
  for (double& x : out.values()) x = std::max(0.0, x);
  return make_node(std::move(out), {a}, [](Node& n) {
    if (!n.parents[0]->requires_grad) return;
    Node& a = *n.parents[0];
    a.ensure_grad();
    for (std::size_t i = 0; i < n.grad.size(); ++i)
      if (a.val.data()[i] > 0.0) a.grad.data()[i] += n.grad.data()[i];
  });
}

Var slice_cols(const Var& a, std::size_t c0, std::size_t c1) {
  if (c0 >= c1 || c1 > a->val.cols())
    throw std::invalid_argument("slice_cols: range");
  Mat out(a->val.rows(), c1 - c0);
  for (std::size_t r = 0; r < out.rows(); ++r)
    std::copy(a->val.row(r) + c0, a->val.row(r) + c1, out.row(r));
  return make_node(std::move(out), {a}, [c0](Node& n) {
    if (!n.parents[0]->requires_grad) return;
    Node& a = *n.parents[0];
    a.ensure_grad();
    for (std::size_t r = 0; r < n.grad.rows(); ++r)
      kernels::axpy(1.0, n.grad.row(r), a.grad.row(r) + c0, n.grad.cols());
  });
}

Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols: empty");
  const std::size_t rows = parts[0]->val.rows();
  std::size_t cols = 0;
  for (const auto& p : parts) {
    if (p->val.rows() != rows) throw std::invalid_argument("concat_cols: rows");
    cols += p->val.cols();
  }
  Mat out(rows, cols);
  std::size_t off = 0;
  for (const auto& p : parts) {
    for (std::size_t r = 0; r < rows; ++r)
      std::copy(p->val.row(r), p->val.row(r) + p->val.cols(),
                out.row(r) + off);
    off += p->val.cols();
  }
  return make_node(std::move(out), parts, [](Node& n) {
    std::size_t off = 0;
    for (auto& p : n.parents) {
      if (p->requires_grad) {
        p->ensure_grad();
        for (std::size_t r = 0; r < n.grad.rows(); ++r)
          kernels::axpy(1.0, n.grad.row(r) + off, p->grad.row(r),
                        p->val.cols());
      }
      off += p->val.cols();
    }
  });
}

Var masked_sq_err_sum(const Var& pred, const Mat& target, const Mat& mask) {
  if (!pred->val.same_shape(target) || !pred->val.same_shape(mask))
    throw std::invalid_argument("masked_sq_err_sum: shape");
  double s = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    const double d = pred->val.data()[i] - target.data()[i];
    s += mask.data()[i] * d * d;
  }
  Mat out(1, 1);
  out(0, 0) = s;
  return make_node(std::move(out), {pred},
                   [target, mask](Node& n) {
                     if (!n.parents[0]->requires_grad) return;
                     Node& p = *n.parents[0];
                     p.ensure_grad();
                     const double g = 2.0 * n.grad(0, 0);
                     for (std::size_t i = 0; i < target.size(); ++i)
                       p.grad.data()[i] += g * mask.data()[i] *
                                           (p.val.data()[i] - target.data()[i]);
                   });
}

Var min_const(const Var& x, double cap) {
  if (x->val.size() != 1) throw std::invalid_argument("min_const: scalar");
  const bool below = x->val(0, 0) < cap;
  Mat out(1, 1);
  out(0, 0) = below ? x->val(0, 0) : cap;
  return make_node(std::move(out), {x}, [below](Node& n) {
    if (below && n.parents[0]->requires_grad)
      accumulate(*n.parents[0], n.grad);
  });
}

void backward(const Var& loss) {
  if (loss->val.size() != 1) throw std::invalid_argument("backward: loss must be scalar");
  if (!std::isfinite(loss->val(0, 0)))
    throw std::runtime_error("backward: non-finite loss");

  // iterative post-order DFS
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack{{loss.get(), 0}};
  seen.insert(loss.get());
  while (!stack.empty()) {
    auto& [node, idx] = stack.back();
    if (idx < node->parents.size()) {
      Node* p = node->parents[idx++].get();
      if (p->requires_grad && !p->is_param && seen.insert(p).second)
        stack.emplace_back(p, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  for (Node* n : order) {
    if (!n->is_param && n->backward_fn && n->consumed)
      throw std::runtime_error("backward: graph node reused after step");
  }

  loss->ensure_grad();
  loss->grad(0, 0) = 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward_fn && n->requires_grad) {
      n->ensure_grad();
      n->backward_fn(*n);
      n->consumed = true;
    }
  }
}

void Adam::step(std::vector<Parameter*>& params) {
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (Parameter* p : params) {
    Mat& val = p->node->val;
    p->node->ensure_grad();
    Mat& g = p->node->grad;
    if (p->m.size() != val.size()) {
      p->m = Mat(val.rows(), val.cols());
      p->v = Mat(val.rows(), val.cols());
    }
    for (std::size_t i = 0; i < val.size(); ++i) {
      const double gi = g.data()[i];
      double& m = p->m.data()[i];
      double& v = p->v.data()[i];
      m = cfg_.beta1 * m + (1.0 - cfg_.beta1) * gi;
      v = cfg_.beta2 * v + (1.0 - cfg_.beta2) * gi * gi;
      double upd = (m / bc1) / (std::sqrt(v / bc2) + cfg_.eps);
      if (p->decay) upd += cfg_.weight_decay * val.data()[i];
      val.data()[i] -= cfg_.lr * upd;
    }
  }
}

void zero_grad(std::vector<Parameter*>& params) {
  for (Parameter* p : params) {
    p->node->ensure_grad();
    p->node->grad.fill(0.0);
  }
}

Mat glorot_uniform(std::size_t rows, std::size_t cols, Rng& rng) {
  Mat m(rows, cols);
  const double bound =
      std::sqrt(6.0 / static_cast<double>(rows + cols));
  for (double& x : m.values()) x = rng.uniform(-bound, bound);
  return m;
}

GruCell GruCell::create(const std::string& prefix, std::size_t d_in,
                        std::size_t d_h, Rng& rng) {
  GruCell c;
  c.hidden = d_h;
  c.w_x = {prefix + ".w_x", parameter(glorot_uniform(d_in, 3 * d_h, rng)),
           {}, {}, true};
  c.w_h = {prefix + ".w_h", parameter(glorot_uniform(d_h, 3 * d_h, rng)),
           {}, {}, true};
  c.b_x = {prefix + ".b_x", parameter(Mat(1, 3 * d_h)), {}, {}, false};
  c.b_h = {prefix + ".b_h", parameter(Mat(1, 3 * d_h)), {}, {}, false};
  return c;
}

Var GruCell::step(const Var& x, const Var& h) const {
  const std::size_t dh = hidden;
  Var gx;
  if (x) {
    gx = add_rowvec(matmul(x, w_x.node), b_x.node);
  } else {
    gx = add_rowvec(constant(Mat(h->val.rows(), 3 * dh)), b_x.node);
  }
  Var gh = add_rowvec(matmul(h, w_h.node), b_h.node);
  Var r = sigmoid(add(slice_cols(gx, 0, dh), slice_cols(gh, 0, dh)));
  Var z = sigmoid(add(slice_cols(gx, dh, 2 * dh), slice_cols(gh, dh, 2 * dh)));
  Var n = tanh_(add(slice_cols(gx, 2 * dh, 3 * dh),
                    mul(r, slice_cols(gh, 2 * dh, 3 * dh))));
  Var one_minus_z = add_const(scale(z, -1.0), 1.0);
  return add(mul(one_minus_z, n), mul(z, h));
}

void GruCell::collect(std::vector<Parameter*>& out) {
  out.push_back(&w_x);
  out.push_back(&w_h);
  out.push_back(&b_x);
  out.push_back(&b_h);
}

DenseLayer DenseLayer::create(const std::string& prefix, std::size_t d_in,
                              std::size_t d_out, Rng& rng) {
  DenseLayer l;
  l.w = {prefix + ".w", parameter(glorot_uniform(d_in, d_out, rng)), {}, {},
         true};
  l.b = {prefix + ".b", parameter(Mat(1, d_out)), {}, {}, false};
  return l;
}

Var DenseLayer::apply(const Var& x) const {
  return add_rowvec(matmul(x, w.node), b.node);
}

void DenseLayer::collect(std::vector<Parameter*>& out) {
  out.push_back(&w);
  out.push_back(&b);
}

}  // namespace traj::nn
