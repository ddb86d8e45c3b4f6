#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "traj/mat.hpp"
#include "traj/rng.hpp"

namespace traj::nn {

struct Node;
using Var = std::shared_ptr<Node>;

// One value in the recorded computation graph. Gradients are accumulated
// into `grad` during backward(); parents are kept alive via shared_ptr.
struct Node {
  Mat val;
  Mat grad;
  std::vector<Var> parents;
  std::function<void(Node&)> backward_fn;
  bool requires_grad = false;
  bool is_param = false;
  bool consumed = false;

  void ensure_grad() {
    if (grad.rows() != val.rows() || grad.cols() != val.cols())
      grad = Mat(val.rows(), val.cols());
  }
};

Var constant(Mat v);
Var parameter(Mat v);
// Constant view of another node's value (cuts the graph).
Var detach(const Var& a);

Var matmul(const Var& a, const Var& b);
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);  // elementwise
Var scale(const Var& a, double s);
Var add_const(const Var& a, double c);
// a: (n x c), bias: (1 x c) added to every row
Var add_rowvec(const Var& a, const Var& bias);
Var sigmoid(const Var& a);
Var tanh_(const Var& a);
Var relu(const Var& a);
Var slice_cols(const Var& a, std::size_t c0, std::size_t c1);
Var concat_cols(const std::vector<Var>& parts);
// Sum over all elements of mask * (pred - target)^2; result is 1x1.
Var masked_sq_err_sum(const Var& pred, const Mat& target, const Mat& mask);
// min(cap, x) for a 1x1 node; zero gradient on the capped branch.
Var min_const(const Var& x, double cap);

inline double scalar_value(const Var& v) { return v->val(0, 0); }

// Reverse pass from a 1x1 loss node. Throws on non-finite loss or when a
// non-parameter node is reused across backward passes.
void backward(const Var& loss);

// Trainable parameter with its Adam state.
struct Parameter {
  std::string name;
  Var node;
  Mat m, v;
  bool decay = true;  // weight decay applies to weights, not biases
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

class Adam {
 public:
  explicit Adam(AdamConfig cfg) : cfg_(cfg) {}
  void step(std::vector<Parameter*>& params);
  std::int64_t steps() const { return t_; }

 private:
  AdamConfig cfg_;
  std::int64_t t_ = 0;
};

void zero_grad(std::vector<Parameter*>& params);

// Glorot-style uniform init in +-sqrt(6 / (fan_in + fan_out)).
Mat glorot_uniform(std::size_t rows, std::size_t cols, Rng& rng);

// One GRU cell (fused gate weights). w_x: (d_in x 3h), w_h: (h x 3h),
// biases 1 x 3h. Gate order: reset, update, candidate.
struct GruCell {
  Parameter w_x, w_h, b_x, b_h;
  std::size_t hidden = 0;

  static GruCell create(const std::string& prefix, std::size_t d_in,
                        std::size_t d_h, Rng& rng);
  // x: (batch x d_in) or nullptr for a zero input, h: (batch x d_h)
  Var step(const Var& x, const Var& h) const;
  void collect(std::vector<Parameter*>& out);
};

struct DenseLayer {
  Parameter w, b;
  static DenseLayer create(const std::string& prefix, std::size_t d_in,
                           std::size_t d_out, Rng& rng);
  Var apply(const Var& x) const;
  void collect(std::vector<Parameter*>& out);
};

}  // namespace traj::nn
