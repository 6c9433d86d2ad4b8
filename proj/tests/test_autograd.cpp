#include <doctest.h>

#include <cmath>

#include "disco/errors.hpp"
#include "disco/nn/autograd.hpp"
#include "disco/nn/grad_check.hpp"
#include "disco/nn/layers.hpp"
#include "support/grad_cases.hpp"

using namespace disco;
using namespace disco::nn;
using disco::testing::random_matrix;

TEST_CASE("backward of simple expressions") {
  Var a = Var::parameter((Matrix(1, 2) << 2.0, 3.0).finished());
  Var b = Var::parameter((Matrix(2, 1) << 5.0, 7.0).finished());
  const Var y = matmul(a, b);  // 2*5 + 3*7
  CHECK(y.scalar() == 31.0);
  backward(y);
  CHECK(a.grad() == (Matrix(1, 2) << 5.0, 7.0).finished());
  CHECK(b.grad() == (Matrix(2, 1) << 2.0, 3.0).finished());

  // Gradients accumulate until cleared.
  backward(y);
  CHECK(a.grad()(0, 0) == 10.0);
  a.zero_grad();
  CHECK(a.grad()(0, 0) == 0.0);

  // A shared subexpression contributes through both paths.
  Var x = Var::parameter(Matrix::Constant(1, 1, 3.0));
  backward(mul(x, x));
  CHECK(x.grad()(0, 0) == 6.0);

  Var c = Var::constant(Matrix::Ones(2, 2));
  CHECK_THROWS_AS(backward(c), Error);
  CHECK_THROWS_AS(matmul(a, a), Error);
}

TEST_CASE("softmax is a distribution") {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto n = static_cast<Eigen::Index>(1 + rng.below(10));
    const Var s = softmax(Var::constant(random_matrix(n, 1, rng, 20.0)));
    CHECK((s.value().array() > 0.0).all());
    CHECK(std::abs(s.value().sum() - 1.0) < 1e-9);
  }
  const Var big = softmax(Var::constant((Matrix(2, 1) << 1000.0, 1000.0).finished()));
  CHECK(big.value()(0) == doctest::Approx(0.5));
  CHECK_THROWS_AS(softmax(Var::constant(Matrix(0, 1))), Error);
}

TEST_CASE("layer norm standardizes rows before the affine map") {
  Rng rng(4);
  const Matrix x = random_matrix(6, 9, rng, 5.0);
  const Var ones = Var::constant(Matrix::Ones(1, 9));
  const Var zeros = Var::constant(Matrix::Zero(1, 9));
  const Matrix y = layer_norm_rows(Var::constant(x), ones, zeros, 1e-9).value();
  for (Eigen::Index r = 0; r < y.rows(); ++r) {
    const double mu = y.row(r).mean();
    const double var = (y.row(r).array() - mu).square().mean();
    CHECK(std::abs(mu) < 1e-6);
    CHECK(std::abs(var - 1.0) < 1e-6);
  }
  const Var g = Var::constant(Matrix::Constant(1, 9, 2.0));
  const Var b = Var::constant(Matrix::Constant(1, 9, 0.5));
  const Matrix z = layer_norm_rows(Var::constant(x), g, b, 1e-9).value();
  CHECK(z.isApprox((2.0 * y.array() + 0.5).matrix(), 1e-12));
}

TEST_CASE("dropout mask statistics") {
  Rng rng(5);
  const double rate = 0.3;
  const Eigen::Index n = 200000;
  const Matrix mask = dropout_mask(1, n, rate, rng);
  const double keep = 1.0 - rate;
  std::size_t zeros = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (mask(i) == 0.0) {
      ++zeros;
    } else {
      CHECK(mask(i) == doctest::Approx(1.0 / keep).epsilon(1e-15));
    }
  }
  // Mean of the inverted mask is 1 in expectation; its per-entry variance is
  // rate / keep.
  const double sigma = std::sqrt(rate / keep / static_cast<double>(n));
  CHECK(std::abs(mask.mean() - 1.0) < 3.0 * sigma);
  const double zero_sigma = std::sqrt(rate * keep / static_cast<double>(n));
  CHECK(std::abs(static_cast<double>(zeros) / static_cast<double>(n) - rate) < 3.0 * zero_sigma);

  // Applied to a constant input, the expected activation is the input.
  const Var x = Var::constant(Matrix::Constant(1, n, 2.5));
  const Matrix out = apply_mask(x, mask).value();
  CHECK(std::abs(out.mean() - 2.5) < 3.0 * 2.5 * sigma);

  const Matrix none = dropout_mask(3, 4, 0.0, rng);
  CHECK(none == Matrix::Ones(3, 4));
}

TEST_CASE("grad_check: linear layer below 1e-6") {
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const auto in = static_cast<Eigen::Index>(1 + rng.below(6));
    const auto out = static_cast<Eigen::Index>(1 + rng.below(6));
    const auto n = static_cast<Eigen::Index>(1 + rng.below(4));
    Rng init(rng.next());
    const Linear lin(in, out, init);
    Var x = Var::parameter(random_matrix(n, in, rng));
    const Matrix c = random_matrix(n, out, rng);
    const auto report = grad_check([&] { return testing::probe_loss(lin(x), c); },
                                   {lin.weight, lin.bias, x});
    CHECK(report.passed);
    CHECK(report.max_rel_error < 1e-6);
  }
}

TEST_CASE("grad_check: activations away from kinks") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix v = random_matrix(3, 4, rng);
    // Push every entry at least 0.1 from zero, far beyond 10 * epsilon.
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) += v(i) >= 0 ? 0.1 : -0.1;
    Var x = Var::parameter(v);
    const Matrix c = random_matrix(3, 4, rng);
    for (auto f : {+[](const Var& a) { return relu(a); }, +[](const Var& a) { return elu(a); },
                   +[](const Var& a) { return leaky_relu(a, 0.2); },
                   +[](const Var& a) { return sigmoid(a); }}) {
      const auto report = grad_check([&] { return testing::probe_loss(f(x), c); }, {x});
      CHECK(report.max_rel_error < 1e-6);
    }
  }
}

TEST_CASE("grad_check: structural ops") {
  Rng rng(8);
  Var a = Var::parameter(random_matrix(3, 4, rng));
  Var b = Var::parameter(random_matrix(3, 2, rng));
  Var row = Var::parameter(random_matrix(1, 4, rng));
  Var g = Var::parameter(random_matrix(1, 4, rng));
  Var be = Var::parameter(random_matrix(1, 4, rng));
  const std::vector<int> pick = {2, 0, 2};
  auto loss = [&] {
    const Var parts[] = {a, b};
    const Var cat = concat_cols(parts);                     // 3 x 6
    const Var sl = slice_cols(cat, 1, 4);                   // 3 x 4
    const Var gathered = gather_rows(add_row(sl, row), pick);  // 3 x 4
    const Var stacked[] = {gathered, slice_rows(a, 1, 2)};
    const Var tall = concat_rows(stacked);                  // 5 x 4
    const Var normed = layer_norm_rows(tall, g, be, 1e-9);
    const Var sm = softmax(transpose(slice_rows(normed, 0, 1)));
    return add(sum(mul(sm, sm)), add(mean(sum_rows(normed)), sum(mean_rows(scale(tall, 0.3)))));
  };
  const auto report = grad_check(loss, {a, b, row, g, be});
  CHECK(report.passed);
  CHECK(report.max_rel_error < 1e-6);
}

TEST_CASE("grad_check detects a wrong gradient and rejects bad options") {
  Var x = Var::parameter(Matrix::Constant(1, 1, 0.7));
  // Forward computes x^2 but the registered backward claims 3x.
  auto wrong = [&] {
    return Var::make(x.value().array().square().matrix(), {x}, [x](Node& self) mutable {
      x.node()->accumulate(3.0 * self.grad.cwiseProduct(x.value()));
    });
  };
  const auto report = grad_check(wrong, {x});
  CHECK_FALSE(report.passed);
  CHECK(report.max_rel_error > 0.1);

  GradCheckOptions bad;
  bad.epsilon = 0.1;
  CHECK_THROWS_AS(grad_check([&] { return sum(x); }, {x}, bad), Error);

  Var y = Var::parameter(Matrix::Constant(1, 1, 0.0));
  try {
    grad_check([&] { return sum(Var::constant(y.value().array().log().matrix())); }, {y});
    FAIL("expected NonFiniteGradient");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonFiniteGradient);
  }
}
