#pragma once

// Minimal tape-free reverse-mode autodiff over dense float64 matrices.
// Each Var owns a node in a DAG built during the forward pass; backward()
// walks it in reverse topological order. Everything is 2-D: vectors are
// 1 x n rows or n x 1 columns.

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace disco::nn {

using Matrix = Eigen::MatrixXd;

struct Node {
  Matrix value;
  Matrix grad;  // empty until something flows into it
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;

  void accumulate(const Matrix& g);
};

class Var {
 public:
  Var() = default;
  explicit Var(Matrix value, bool requires_grad = false);

  static Var constant(Matrix value) { return Var(std::move(value), false); }
  static Var parameter(Matrix value) { return Var(std::move(value), true); }

  const Matrix& value() const { return node_->value; }
  // Direct access for optimizers and finite-difference probes.
  Matrix& mutable_value() { return node_->value; }
  // Zero-filled when no gradient has reached this node.
  Matrix grad() const;
  bool requires_grad() const { return node_ && node_->requires_grad; }
  void set_requires_grad(bool on) { node_->requires_grad = on; }
  void zero_grad() { node_->grad.resize(0, 0); }

  Eigen::Index rows() const { return node_->value.rows(); }
  Eigen::Index cols() const { return node_->value.cols(); }
  double scalar() const;

  bool defined() const { return node_ != nullptr; }
  const std::shared_ptr<Node>& node() const { return node_; }

  // Builds a derived node; backward_fn is dropped when no parent needs grad.
  static Var make(Matrix value, std::vector<Var> parents,
                  std::function<void(Node&)> backward_fn);

 private:
  std::shared_ptr<Node> node_;
};

// Seeds d(root)/d(root) = 1 on a 1x1 root and propagates to every ancestor
// that requires grad. Gradients accumulate; call zero_grad between passes.
void backward(const Var& root);

// Smallest |x| fed into a piecewise-linear activation since the last reset.
// Finite-difference checks use it to reject probes that straddle a kink.
void reset_kink_monitor();
double kink_margin();

Var matmul(const Var& a, const Var& b);
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);  // elementwise
Var scale(const Var& a, double s);
Var add_row(const Var& a, const Var& row);        // row: 1 x cols(a)
Var add_scalar(const Var& a, const Var& scalar);  // scalar: 1 x 1
Var transpose(const Var& a);

Var relu(const Var& a);
Var elu(const Var& a, double alpha = 1.0);
Var leaky_relu(const Var& a, double slope);
Var sigmoid(const Var& a);

// Softmax over every entry of a vector-shaped Var.
Var softmax(const Var& a);

// Per-row normalization to zero mean / unit variance, then gamma, beta.
Var layer_norm_rows(const Var& x, const Var& gamma, const Var& beta,
                    double eps);

// Inverted dropout with an explicit keep-mask (entries 0 or 1/keep).
Var apply_mask(const Var& x, const Matrix& mask);

Var concat_cols(std::span<const Var> parts);
Var concat_rows(std::span<const Var> parts);
Var slice_cols(const Var& a, Eigen::Index start, Eigen::Index count);
Var slice_rows(const Var& a, Eigen::Index start, Eigen::Index count);
Var gather_rows(const Var& a, std::span<const int> rows);

Var sum(const Var& a);        // 1 x 1
Var mean(const Var& a);       // 1 x 1
Var sum_rows(const Var& a);   // 1 x cols, zeros for a 0-row input
Var mean_rows(const Var& a);  // 1 x cols, zeros for a 0-row input

}  // namespace disco::nn
