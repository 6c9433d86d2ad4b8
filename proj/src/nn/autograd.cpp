#include "disco/nn/autograd.hpp"

#include <cmath>
#include <limits>
#include <unordered_set>

#include "disco/errors.hpp"

namespace disco::nn {

namespace {

thread_local double g_kink_margin = std::numeric_limits<double>::infinity();

void note_kinks(const Matrix& x) {
  if (x.size() > 0) g_kink_margin = std::min(g_kink_margin, x.cwiseAbs().minCoeff());
}

[[noreturn]] void shape_error(const char* op, const Matrix& a,
                              const Matrix& b) {
  throw Error(ErrorCode::ShapeMismatch,
              std::string(op) + ": " + std::to_string(a.rows()) + "x" +
                  std::to_string(a.cols()) + " vs " +
                  std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
}

void require_same_shape(const char* op, const Var& a, const Var& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    shape_error(op, a.value(), b.value());
  }
}

Node& parent(Node& n, std::size_t i) { return *n.parents[i]; }

}  // namespace

void Node::accumulate(const Matrix& g) {
  if (grad.size() == 0) {
    grad = g;
  } else {
    grad += g;
  }
}

Var::Var(Matrix value, bool requires_grad)
    : node_(std::make_shared<Node>()) {
  node_->value = std::move(value);
  node_->requires_grad = requires_grad;
}

Matrix Var::grad() const {
  if (node_->grad.size() == 0) {
    return Matrix::Zero(node_->value.rows(), node_->value.cols());
  }
  return node_->grad;
}

double Var::scalar() const {
  if (node_->value.size() != 1) {
    throw Error(ErrorCode::ShapeMismatch, "scalar() on a non-1x1 value");
  }
  return node_->value(0, 0);
}

Var Var::make(Matrix value, std::vector<Var> parents,
              std::function<void(Node&)> backward_fn) {
  Var out(std::move(value), false);
  for (const auto& p : parents) {
    if (p.requires_grad()) out.node_->requires_grad = true;
  }
  if (out.node_->requires_grad) {
    out.node_->parents.reserve(parents.size());
    for (auto& p : parents) out.node_->parents.push_back(p.node_);
    out.node_->backward_fn = std::move(backward_fn);
  }
  return out;
}

void backward(const Var& root) {
  if (root.rows() != 1 || root.cols() != 1) {
    throw Error(ErrorCode::ShapeMismatch, "backward() needs a 1x1 root");
  }
  if (!root.requires_grad()) return;

  // Iterative post-order DFS gives a topological order.
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(root.node().get(), 0);
  seen.insert(root.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* p = node->parents[next++].get();
      if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  // Interior nodes start from zero so repeated passes only accumulate into
  // the leaves.
  for (Node* n : order) {
    if (n->backward_fn) n->grad.resize(0, 0);
  }
  root.node()->accumulate(Matrix::Ones(1, 1));
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward_fn && n->grad.size() > 0) n->backward_fn(*n);
  }
}

void reset_kink_monitor() {
  g_kink_margin = std::numeric_limits<double>::infinity();
}

double kink_margin() { return g_kink_margin; }

Var matmul(const Var& a, const Var& b) {
  if (a.cols() != b.rows()) shape_error("matmul", a.value(), b.value());
  return Var::make(a.value() * b.value(), {a, b}, [](Node& n) {
    Node& pa = parent(n, 0);
    Node& pb = parent(n, 1);
    if (pa.requires_grad) pa.accumulate(n.grad * pb.value.transpose());
    if (pb.requires_grad) pb.accumulate(pa.value.transpose() * n.grad);
  });
}

Var add(const Var& a, const Var& b) {
  require_same_shape("add", a, b);
  return Var::make(a.value() + b.value(), {a, b}, [](Node& n) {
    for (auto& p : n.parents) {
      if (p->requires_grad) p->accumulate(n.grad);
    }
  });
}

Var sub(const Var& a, const Var& b) {
  require_same_shape("sub", a, b);
  return Var::make(a.value() - b.value(), {a, b}, [](Node& n) {
    if (parent(n, 0).requires_grad) parent(n, 0).accumulate(n.grad);
    if (parent(n, 1).requires_grad) parent(n, 1).accumulate(-n.grad);
  });
}

Var mul(const Var& a, const Var& b) {
  require_same_shape("mul", a, b);
  return Var::make(a.value().cwiseProduct(b.value()), {a, b}, [](Node& n) {
    Node& pa = parent(n, 0);
    Node& pb = parent(n, 1);
    if (pa.requires_grad) pa.accumulate(n.grad.cwiseProduct(pb.value));
    if (pb.requires_grad) pb.accumulate(n.grad.cwiseProduct(pa.value));
  });
}

Var scale(const Var& a, double s) {
  return Var::make(a.value() * s, {a},
                   [s](Node& n) { parent(n, 0).accumulate(n.grad * s); });
}

Var add_row(const Var& a, const Var& row) {
  if (row.rows() != 1 || row.cols() != a.cols()) {
    shape_error("add_row", a.value(), row.value());
  }
  Matrix out = a.value().rowwise() + row.value().row(0);
  return Var::make(std::move(out), {a, row}, [](Node& n) {
    if (parent(n, 0).requires_grad) parent(n, 0).accumulate(n.grad);
    if (parent(n, 1).requires_grad) {
      parent(n, 1).accumulate(n.grad.colwise().sum());
    }
  });
}

Var add_scalar(const Var& a, const Var& scalar) {
  if (scalar.rows() != 1 || scalar.cols() != 1) {
    shape_error("add_scalar", a.value(), scalar.value());
  }
  Matrix out = a.value().array() + scalar.value()(0, 0);
  return Var::make(std::move(out), {a, scalar}, [](Node& n) {
    if (parent(n, 0).requires_grad) parent(n, 0).accumulate(n.grad);
    if (parent(n, 1).requires_grad) {
      parent(n, 1).accumulate(Matrix::Constant(1, 1, n.grad.sum()));
    }
  });
}

Var transpose(const Var& a) {
  return Var::make(a.value().transpose(), {a}, [](Node& n) {
    parent(n, 0).accumulate(n.grad.transpose());
  });
}

Var relu(const Var& a) {
  note_kinks(a.value());
  return Var::make(a.value().cwiseMax(0.0), {a}, [](Node& n) {
    const Matrix& x = parent(n, 0).value;
    parent(n, 0).accumulate(
        (x.array() > 0.0).select(n.grad.array(), 0.0).matrix());
  });
}

Var elu(const Var& a, double alpha) {
  note_kinks(a.value());
  Matrix out = a.value().unaryExpr(
      [alpha](double x) { return x > 0.0 ? x : alpha * std::expm1(x); });
  return Var::make(std::move(out), {a}, [alpha](Node& n) {
    const Matrix& x = parent(n, 0).value;
    Matrix d = x.unaryExpr(
        [alpha](double v) { return v > 0.0 ? 1.0 : alpha * std::exp(v); });
    parent(n, 0).accumulate(n.grad.cwiseProduct(d));
  });
}

Var leaky_relu(const Var& a, double slope) {
  note_kinks(a.value());
  Matrix out =
      a.value().unaryExpr([slope](double x) { return x > 0.0 ? x : slope * x; });
  return Var::make(std::move(out), {a}, [slope](Node& n) {
    const Matrix& x = parent(n, 0).value;
    Matrix d = x.unaryExpr([slope](double v) { return v > 0.0 ? 1.0 : slope; });
    parent(n, 0).accumulate(n.grad.cwiseProduct(d));
  });
}

Var sigmoid(const Var& a) {
  Matrix out = a.value().unaryExpr([](double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
  });
  return Var::make(std::move(out), {a}, [](Node& n) {
    const Matrix& y = n.value;
    parent(n, 0).accumulate(
        n.grad.cwiseProduct(y.cwiseProduct((1.0 - y.array()).matrix())));
  });
}

Var softmax(const Var& a) {
  if (a.rows() != 1 && a.cols() != 1) {
    throw Error(ErrorCode::ShapeMismatch, "softmax expects a vector");
  }
  if (a.value().size() == 0) {
    throw Error(ErrorCode::ShapeMismatch, "softmax of an empty vector");
  }
  const double m = a.value().maxCoeff();
  Matrix e = (a.value().array() - m).exp().matrix();
  e /= e.sum();
  return Var::make(std::move(e), {a}, [](Node& n) {
    const Matrix& y = n.value;
    const double dot = n.grad.cwiseProduct(y).sum();
    parent(n, 0).accumulate(
        y.cwiseProduct((n.grad.array() - dot).matrix()));
  });
}

Var layer_norm_rows(const Var& x, const Var& gamma, const Var& beta,
                    double eps) {
  const Eigen::Index m = x.cols();
  if (gamma.rows() != 1 || gamma.cols() != m) {
    shape_error("layer_norm gamma", x.value(), gamma.value());
  }
  if (beta.rows() != 1 || beta.cols() != m) {
    shape_error("layer_norm beta", x.value(), beta.value());
  }
  const Matrix& xv = x.value();
  Eigen::VectorXd mu = xv.rowwise().mean();
  Matrix centered = xv.colwise() - mu;
  Eigen::VectorXd var =
      centered.array().square().rowwise().sum() / static_cast<double>(m);
  Eigen::VectorXd inv_std = (var.array() + eps).rsqrt();
  Matrix xhat = centered.array().colwise() * inv_std.array();
  Matrix out = (xhat.array().rowwise() * gamma.value().row(0).array())
                   .rowwise() +
               beta.value().row(0).array();
  return Var::make(
      std::move(out), {x, gamma, beta},
      [xhat = std::move(xhat), inv_std = std::move(inv_std), m](Node& n) {
        Node& px = parent(n, 0);
        Node& pg = parent(n, 1);
        Node& pb = parent(n, 2);
        if (pg.requires_grad) {
          pg.accumulate(n.grad.cwiseProduct(xhat).colwise().sum());
        }
        if (pb.requires_grad) pb.accumulate(n.grad.colwise().sum());
        if (px.requires_grad) {
          Matrix dxhat = n.grad.array().rowwise() * pg.value.row(0).array();
          Eigen::VectorXd sum_d = dxhat.rowwise().sum();
          Eigen::VectorXd sum_dx = dxhat.cwiseProduct(xhat).rowwise().sum();
          Matrix dx = (static_cast<double>(m) * dxhat.array()).matrix();
          dx.colwise() -= sum_d;
          dx -= (xhat.array().colwise() * sum_dx.array()).matrix();
          dx = (dx.array().colwise() *
                (inv_std.array() / static_cast<double>(m)))
                   .matrix();
          px.accumulate(dx);
        }
      });
}

Var apply_mask(const Var& x, const Matrix& mask) {
  if (mask.rows() != x.rows() || mask.cols() != x.cols()) {
    shape_error("apply_mask", x.value(), mask);
  }
  return Var::make(x.value().cwiseProduct(mask), {x}, [mask](Node& n) {
    parent(n, 0).accumulate(n.grad.cwiseProduct(mask));
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw Error(ErrorCode::ShapeMismatch, "concat_cols of nothing");
  const Eigen::Index rows = parts.front().rows();
  Eigen::Index cols = 0;
  for (const auto& p : parts) {
    if (p.rows() != rows) shape_error("concat_cols", parts.front().value(), p.value());
    cols += p.cols();
  }
  Matrix out(rows, cols);
  std::vector<Eigen::Index> offsets;
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    out.middleCols(at, p.cols()) = p.value();
    offsets.push_back(at);
    at += p.cols();
  }
  return Var::make(std::move(out), {parts.begin(), parts.end()},
                   [offsets](Node& n) {
                     for (std::size_t i = 0; i < n.parents.size(); ++i) {
                       Node& p = *n.parents[i];
                       if (!p.requires_grad) continue;
                       p.accumulate(n.grad.middleCols(offsets[i], p.value.cols()));
                     }
                   });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw Error(ErrorCode::ShapeMismatch, "concat_rows of nothing");
  const Eigen::Index cols = parts.front().cols();
  Eigen::Index rows = 0;
  for (const auto& p : parts) {
    if (p.cols() != cols) shape_error("concat_rows", parts.front().value(), p.value());
    rows += p.rows();
  }
  Matrix out(rows, cols);
  std::vector<Eigen::Index> offsets;
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    out.middleRows(at, p.rows()) = p.value();
    offsets.push_back(at);
    at += p.rows();
  }
  return Var::make(std::move(out), {parts.begin(), parts.end()},
                   [offsets](Node& n) {
                     for (std::size_t i = 0; i < n.parents.size(); ++i) {
                       Node& p = *n.parents[i];
                       if (!p.requires_grad) continue;
                       p.accumulate(n.grad.middleRows(offsets[i], p.value.rows()));
                     }
                   });
}

Var slice_cols(const Var& a, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || count < 0 || start + count > a.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "slice_cols out of range");
  }
  return Var::make(a.value().middleCols(start, count), {a},
                   [start, count](Node& n) {
                     Node& p = parent(n, 0);
                     Matrix g = Matrix::Zero(p.value.rows(), p.value.cols());
                     g.middleCols(start, count) = n.grad;
                     p.accumulate(g);
                   });
}

Var slice_rows(const Var& a, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || count < 0 || start + count > a.rows()) {
    throw Error(ErrorCode::ShapeMismatch, "slice_rows out of range");
  }
  return Var::make(a.value().middleRows(start, count), {a},
                   [start, count](Node& n) {
                     Node& p = parent(n, 0);
                     Matrix g = Matrix::Zero(p.value.rows(), p.value.cols());
                     g.middleRows(start, count) = n.grad;
                     p.accumulate(g);
                   });
}

Var gather_rows(const Var& a, std::span<const int> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), a.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= a.rows()) {
      throw Error(ErrorCode::IndexOutOfRange,
                  "gather row " + std::to_string(rows[i]));
    }
    out.row(static_cast<Eigen::Index>(i)) = a.value().row(rows[i]);
  }
  std::vector<int> idx(rows.begin(), rows.end());
  return Var::make(std::move(out), {a}, [idx = std::move(idx)](Node& n) {
    Node& p = parent(n, 0);
    Matrix g = Matrix::Zero(p.value.rows(), p.value.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) {
      g.row(idx[i]) += n.grad.row(static_cast<Eigen::Index>(i));
    }
    p.accumulate(g);
  });
}

Var sum(const Var& a) {
  return Var::make(Matrix::Constant(1, 1, a.value().sum()), {a}, [](Node& n) {
    Node& p = parent(n, 0);
    p.accumulate(Matrix::Constant(p.value.rows(), p.value.cols(), n.grad(0, 0)));
  });
}

Var mean(const Var& a) {
  const double count = static_cast<double>(a.value().size());
  if (count == 0) throw Error(ErrorCode::ShapeMismatch, "mean of empty");
  return scale(sum(a), 1.0 / count);
}

Var sum_rows(const Var& a) {
  Matrix out = a.rows() == 0 ? Matrix::Zero(1, a.cols())
                             : Matrix(a.value().colwise().sum());
  return Var::make(std::move(out), {a}, [](Node& n) {
    Node& p = parent(n, 0);
    p.accumulate(n.grad.replicate(p.value.rows(), 1));
  });
}

Var mean_rows(const Var& a) {
  if (a.rows() == 0) return sum_rows(a);
  return scale(sum_rows(a), 1.0 / static_cast<double>(a.rows()));
}

}  // namespace disco::nn
