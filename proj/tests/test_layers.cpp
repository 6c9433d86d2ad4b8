#include <doctest.h>

#include <cmath>
#include <numeric>

#include "disco/errors.hpp"
#include "disco/nn/grad_check.hpp"
#include "disco/nn/layers.hpp"
#include "support/grad_cases.hpp"

using namespace disco;
using namespace disco::nn;
using disco::testing::random_matrix;

namespace {

Matrix elu_ref(const Matrix& m) {
  return m.unaryExpr([](double v) { return v > 0 ? v : std::expm1(v); });
}

// Straight-line GAT evaluation over a dense adjacency matrix.
Matrix dense_gat(const GatLayer& layer, const Matrix& x, const EdgeIndex& g) {
  const Eigen::Index n = x.rows();
  Matrix adj = Matrix::Identity(n, n);  // adj(i, j): j feeds i
  for (auto [s, t] : g.edges) adj(t, s) = 1.0;
  const Matrix z_all = x * layer.weight.value();
  Matrix out(n, layer.out_dim());
  for (int h = 0; h < layer.heads; ++h) {
    const Matrix z = z_all.middleCols(h * layer.head_dim, layer.head_dim);
    const Eigen::VectorXd a_src = layer.att_src.value().col(h);
    const Eigen::VectorXd a_dst = layer.att_dst.value().col(h);
    for (Eigen::Index i = 0; i < n; ++i) {
      std::vector<double> e(static_cast<std::size_t>(n), 0.0);
      double mx = -1e300;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (adj(i, j) == 0.0) continue;
        double v = z.row(i).dot(a_dst) + z.row(j).dot(a_src);
        v = v > 0 ? v : 0.2 * v;
        e[static_cast<std::size_t>(j)] = v;
        mx = std::max(mx, v);
      }
      double denom = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (adj(i, j) != 0.0) denom += std::exp(e[static_cast<std::size_t>(j)] - mx);
      }
      Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(layer.head_dim);
      for (Eigen::Index j = 0; j < n; ++j) {
        if (adj(i, j) != 0.0) acc += std::exp(e[static_cast<std::size_t>(j)] - mx) / denom * z.row(j);
      }
      out.block(i, h * layer.head_dim, 1, layer.head_dim) = acc;
    }
  }
  return out.rowwise() + layer.bias.value().row(0);
}

}  // namespace

TEST_CASE("span extractor") {
  Rng rng(11);
  const SpanExtractor ext(4, rng);

  const Matrix one = random_matrix(1, 4, rng);
  const auto single = ext(Var::constant(one));
  CHECK(single.attention.value()(0, 0) == 1.0);
  CHECK(single.span.value() == one);

  Matrix twin(2, 4);
  twin.row(0) = one.row(0);
  twin.row(1) = one.row(0);
  const auto pair = ext(Var::constant(twin));
  CHECK(pair.attention.value()(0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(pair.attention.value()(1) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(pair.span.value().isApprox(one, 1e-15));

  // Independent re-evaluation of H, A, alpha, S on a random 3x4 input.
  const Matrix x = random_matrix(3, 4, rng);
  const auto res = ext(Var::constant(x));
  Matrix h = (x * ext.w1.value()).rowwise() + ext.b1.value().row(0);
  h = h.cwiseMax(0.0);
  const Eigen::VectorXd a = (h * ext.w2.value()).array() + ext.b2.value()(0, 0);
  const Eigen::VectorXd ea = (a.array() - a.maxCoeff()).exp();
  const Eigen::VectorXd alpha = ea / ea.sum();
  const Eigen::RowVectorXd s = alpha.transpose() * x;
  CHECK(res.attention.value().col(0).isApprox(alpha, 1e-12));
  CHECK(res.span.value().row(0).isApprox(s, 1e-12));
  CHECK(std::abs(res.attention.value().sum() - 1.0) < 1e-9);

  CHECK_THROWS_AS(ext(Var::constant(Matrix(0, 4))), Error);
  CHECK_THROWS_AS(ext(Var::constant(Matrix::Zero(2, 3))), Error);
}

TEST_CASE("GAT with only self-loops is the linear transform") {
  Rng rng(12);
  GatLayer layer(3, 2, 4, rng);
  layer.bias.mutable_value() = random_matrix(1, 8, rng);
  const Matrix x = random_matrix(5, 3, rng);
  EdgeIndex g;
  g.num_nodes = 5;
  g.edges = {{2, 2}};  // an explicit self-loop is not doubled
  const auto out = layer.forward(Var::constant(x), g);
  const Matrix expect = (x * layer.weight.value()).rowwise() + layer.bias.value().row(0);
  CHECK(out.features.value().isApprox(expect, 1e-12));
  for (const auto& head : out.attention) {
    for (const auto& w : head) {
      REQUIRE(w.size() == 1);
      CHECK(w(0) == 1.0);
    }
  }
}

TEST_CASE("GAT attention over identical neighbours") {
  Rng rng(13);
  const GatLayer layer(3, 3, 2, rng);
  Matrix x = random_matrix(3, 3, rng);
  x.row(2) = x.row(1);
  EdgeIndex g;
  g.num_nodes = 3;
  g.edges = {{1, 0}, {2, 0}};
  const auto out = layer.forward(Var::constant(x), g);
  for (const auto& head : out.attention) {
    // Node 0 attends to {1, 2, self}; the two copies get equal weight.
    CHECK(head[0](0) == doctest::Approx(head[0](1)).epsilon(1e-15));
    CHECK(std::abs(head[0].sum() - 1.0) < 1e-9);
  }
  EdgeIndex g2;
  g2.num_nodes = 3;
  g2.edges = {{1, 2}};
  Matrix y = random_matrix(3, 3, rng);
  y.row(2) = y.row(1);
  const auto out2 = layer.forward(Var::constant(y), g2);
  for (const auto& head : out2.attention) {
    CHECK(head[2](0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(head[2](1) == doctest::Approx(0.5).epsilon(1e-15));
  }
}

TEST_CASE("GAT matches a dense evaluation") {
  Rng rng(14);
  for (int trial = 0; trial < 20; ++trial) {
    const int heads = trial < 10 ? 1 : 1 + static_cast<int>(rng.below(4));
    GatLayer layer(5, heads, 3, rng);
    layer.bias.mutable_value() = random_matrix(1, heads * 3, rng);
    const EdgeIndex g = testing::random_graph(4, rng);
    const Matrix x = random_matrix(4, 5, rng);
    const auto out = layer.forward(Var::constant(x), g);
    CHECK(out.features.value().isApprox(dense_gat(layer, x, g), 1e-12));
    for (const auto& head : out.attention) {
      for (const auto& w : head) {
        CHECK((w.array() > 0).all());
        CHECK(std::abs(w.sum() - 1.0) < 1e-9);
      }
    }
  }
  GatLayer layer(2, 1, 2, rng);
  EdgeIndex bad;
  bad.num_nodes = 2;
  bad.edges = {{0, 5}};
  try {
    layer(Var::constant(Matrix::Zero(2, 2)), bad);
    FAIL("expected IndexOutOfRange");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IndexOutOfRange);
  }
  EdgeIndex ok;
  ok.num_nodes = 3;
  CHECK_THROWS_AS(layer(Var::constant(Matrix::Zero(2, 2)), ok), Error);
}

TEST_CASE("GAT through the message-passing interface") {
  Rng rng(15);
  GatLayer layer(4, 1, 3, rng);
  layer.bias.mutable_value() = random_matrix(1, 3, rng);
  EdgeIndex g;
  g.num_nodes = 4;
  g.edges = {{0, 1}, {2, 1}, {3, 0}, {1, 3}, {3, 2}};
  const Matrix x = random_matrix(4, 4, rng);
  const auto hood = g.neighborhoods_with_self_loops();
  const Var transformed = layer.transform(Var::constant(x));
  const AggregateFn aggregate = [&](int node, const Var&, const Var& states) {
    return layer.attend(states, node, hood[static_cast<std::size_t>(node)], 0);
  };
  const UpdateFn update = [&](const Var&, const Var& message) {
    return add_row(message, layer.bias);
  };
  const Var via_mp = message_passing_step(transformed, hood, aggregate, update);
  CHECK(via_mp.value().isApprox(layer(Var::constant(x), g).value(), 1e-14));
}

TEST_CASE("message passing contract") {
  Rng rng(16);
  const Matrix h = random_matrix(4, 3, rng);
  const std::vector<std::vector<int>> empty(4);
  const UpdateFn identity_plus = [](const Var& self, const Var& m) { return add(self, m); };
  CHECK(message_passing_step(Var::constant(h), empty, sum_aggregate(), identity_plus).value() == h);

  Matrix same(3, 3);
  for (int r = 0; r < 3; ++r) same.row(r) = h.row(0);
  const std::vector<std::vector<int>> clique = {{1, 2}, {0, 2}, {0, 1}};
  const UpdateFn take_message = [](const Var&, const Var& m) { return m; };
  const Matrix msg =
      message_passing_step(Var::constant(same), clique, mean_aggregate(), take_message).value();
  for (int r = 0; r < 3; ++r) CHECK(msg.row(r).isApprox(h.row(0), 1e-15));

  const std::vector<std::vector<int>> chain = {{}, {0}, {0, 1}, {2}};
  const Matrix sums =
      message_passing_step(Var::constant(h), chain, sum_aggregate(), take_message).value();
  CHECK(sums.row(0).isZero());
  CHECK(sums.row(2).isApprox(h.row(0) + h.row(1), 1e-15));

  try {
    message_passing_step(Var::constant(h), {{9}, {}, {}, {}}, sum_aggregate(), take_message);
    FAIL("expected IndexOutOfRange");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IndexOutOfRange);
  }
}

TEST_CASE("GNN block") {
  Rng rng(17);
  const GnnBlock block(5, 2, 3, 3, rng);
  CHECK(block.out_dim() == 6);
  const Matrix x = random_matrix(4, 5, rng);

  // No edges: each stage is ELU(Linear(h) + h W + bias).
  EdgeIndex none;
  none.num_nodes = 4;
  Matrix h = x;
  for (const auto& s : block.stages) {
    const Matrix lin = (h * s.linear.weight.value()).rowwise() + s.linear.bias.value().row(0);
    const Matrix gat = (h * s.gat.weight.value()).rowwise() + s.gat.bias.value().row(0);
    h = elu_ref(lin + gat);
  }
  CHECK(block(Var::constant(x), none).value().isApprox(h, 1e-12));

  EdgeIndex single;
  single.num_nodes = 1;
  const Var one = block(Var::constant(random_matrix(1, 5, rng)), single);
  CHECK(one.rows() == 1);
  CHECK(one.cols() == 6);
}

TEST_CASE("classifier") {
  Rng rng(18);
  Classifier toy(2, {2, 1}, 0.0, Activation::ReLU, rng);
  toy.hidden[0].linear.weight.mutable_value() = (Matrix(2, 2) << 1.0, -1.0, 2.0, 0.5).finished();
  toy.hidden[0].linear.bias.mutable_value() = (Matrix(1, 2) << 0.1, 0.2).finished();
  toy.output.weight.mutable_value() = (Matrix(2, 1) << 0.3, -0.7).finished();
  toy.output.bias.mutable_value() = Matrix::Constant(1, 1, 0.05);
  // x = [1, 2]: pre-activation [5.1, 0.2], mean 2.65, variance 2.45^2.
  const double s = 2.45 / std::sqrt(2.45 * 2.45 + 1e-9);
  const double logit = 0.3 * s + 0.7 * s + 0.05;
  const double p = 1.0 / (1.0 + std::exp(-logit));
  const Var out = toy(Var::constant((Matrix(1, 2) << 1.0, 2.0).finished()), false);
  CHECK(std::abs(out.value()(0, 0) - p) < 1e-10);

  const Classifier clf(6, {8, 8, 4, 1}, 0.3, Activation::ReLU, rng);
  CHECK(clf.stage_dims() == std::vector<int>{8, 8, 4, 1});
  CHECK(clf.in_dim() == 6);
  const Matrix x = random_matrix(7, 6, rng, 3.0);
  const Matrix a = clf(Var::constant(x), false).value();
  CHECK(clf(Var::constant(x), false).value() == a);
  CHECK((a.array() > 0.0).all());
  CHECK((a.array() < 1.0).all());

  std::vector<int> perm(7);
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
  Matrix px(7, 6);
  for (int i = 0; i < 7; ++i) px.row(i) = x.row(perm[static_cast<std::size_t>(i)]);
  const Matrix pa = clf(Var::constant(px), false).value();
  for (int i = 0; i < 7; ++i) CHECK(pa(i, 0) == a(perm[static_cast<std::size_t>(i)], 0));

  Rng drop(1);
  const Matrix noisy = clf(Var::constant(x), true, &drop).value();
  CHECK(noisy != a);
  CHECK_THROWS_AS(clf(Var::constant(x), true), Error);
  CHECK_THROWS_AS(clf(Var::constant(Matrix::Zero(2, 5)), false), Error);
  CHECK_THROWS_AS(Classifier(3, {4, 2}, 0.0, Activation::ReLU, rng), Error);
}

TEST_CASE("weighted MSE") {
  const Var probs = Var::constant((Matrix(2, 1) << 0.8, 0.1).finished());
  CHECK(weighted_mse_loss(probs, {1, 0}, 9.0).scalar() == doctest::Approx(0.185).epsilon(1e-14));
  CHECK(weighted_mse_loss(probs, {1, 0}, 1.0).scalar() ==
        doctest::Approx((0.04 + 0.01) / 2).epsilon(1e-14));
  const Var exact = Var::constant((Matrix(3, 1) << 1.0, 0.0, 1.0).finished());
  CHECK(weighted_mse_loss(exact, {1, 0, 1}, 5.0).scalar() == 0.0);
  try {
    weighted_mse_loss(probs, {1}, 1.0);
    FAIL("expected LengthMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::LengthMismatch);
  }
}

TEST_CASE("gradients of every component") {
  Rng rng(19);
  GradCheckOptions opt;
  for (int trial = 0; trial < 10; ++trial) {
    CHECK(testing::checked(testing::span_extractor_case, rng, opt).max_rel_error < 1e-4);
    CHECK(testing::checked(testing::gat_case, rng, opt).max_rel_error < 1e-4);
    CHECK(testing::checked(testing::gnn_block_case, rng, opt).max_rel_error < 1e-4);
    CHECK(testing::checked(testing::classifier_case, rng, opt).max_rel_error < 1e-4);
    CHECK(testing::checked(testing::weighted_mse_case, rng, opt).max_rel_error < 1e-4);
  }
}
