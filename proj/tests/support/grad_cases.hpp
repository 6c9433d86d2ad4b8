#pragma once

// Randomized finite-difference checks of the network components. Each case
// draws fresh shapes and values from `rng`, and redraws while a ReLU/ELU/
// LeakyReLU input sits within 10 * epsilon of its kink.

#include <string>
#include <vector>

#include "disco/nn/grad_check.hpp"
#include "disco/nn/layers.hpp"
#include "disco/random.hpp"

namespace disco::testing {

using nn::Matrix;
using nn::Var;

inline Matrix random_matrix(Eigen::Index r, Eigen::Index c, Rng& rng, double scale = 1.0) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = scale * (2.0 * rng.uniform() - 1.0);
  return m;
}

inline std::vector<Var> parameters_of(const nn::ParameterList& list) {
  std::vector<Var> out;
  for (const auto& p : list) out.push_back(p.var);
  return out;
}

// Weighted sum with fixed random coefficients, so every output entry
// contributes a distinct gradient.
inline Var probe_loss(const Var& out, const Matrix& coeffs) {
  return nn::sum(nn::mul(out, Var::constant(coeffs)));
}

inline nn::EdgeIndex random_graph(int n, Rng& rng) {
  nn::EdgeIndex g;
  g.num_nodes = n;
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      if (a != b && rng.bernoulli(0.35)) g.edges.emplace_back(a, b);
    }
  }
  return g;
}

// Runs the check, redrawing the case (up to 50 times) until the unperturbed
// pass keeps clear of every kink.
template <typename MakeCase>
nn::GradCheckReport checked(MakeCase make_case, Rng& rng, nn::GradCheckOptions opt = {}) {
  nn::GradCheckReport report;
  for (int attempt = 0; attempt < 50; ++attempt) {
    auto [loss, inputs] = make_case(rng);
    report = nn::grad_check(loss, inputs, opt);
    if (report.kink_margin > 10 * opt.epsilon) return report;
  }
  return report;
}

struct GradCase {
  std::function<Var()> loss;
  std::vector<Var> inputs;
};

inline GradCase span_extractor_case(Rng& rng) {
  const auto n = static_cast<Eigen::Index>(1 + rng.below(5));
  const auto d = static_cast<Eigen::Index>(2 + rng.below(5));
  Rng init(rng.next());
  auto ext = std::make_shared<nn::SpanExtractor>(d, init);
  Var x = Var::parameter(random_matrix(n, d, rng));
  const Matrix c = random_matrix(1, d, rng);
  nn::ParameterList params;
  ext->collect(params, "span");
  auto inputs = parameters_of(params);
  inputs.push_back(x);
  return {[ext, x, c] { return probe_loss((*ext)(x).span, c); }, inputs};
}

inline GradCase gat_case(Rng& rng) {
  const int n = 1 + static_cast<int>(rng.below(5));
  const auto in = static_cast<Eigen::Index>(2 + rng.below(4));
  const int heads = 1 + static_cast<int>(rng.below(3));
  const int hd = 1 + static_cast<int>(rng.below(3));
  Rng init(rng.next());
  auto layer = std::make_shared<nn::GatLayer>(in, heads, hd, init);
  layer->bias.mutable_value() = random_matrix(1, heads * hd, rng, 0.1);
  const nn::EdgeIndex g = random_graph(n, rng);
  Var x = Var::parameter(random_matrix(n, in, rng));
  const Matrix c = random_matrix(n, heads * hd, rng);
  nn::ParameterList params;
  layer->collect(params, "gat");
  auto inputs = parameters_of(params);
  inputs.push_back(x);
  return {[layer, g, x, c] { return probe_loss((*layer)(x, g), c); }, inputs};
}

inline GradCase gnn_block_case(Rng& rng) {
  const int n = 1 + static_cast<int>(rng.below(4));
  const auto in = static_cast<Eigen::Index>(2 + rng.below(3));
  const int heads = 1 + static_cast<int>(rng.below(2));
  const int hidden = 1 + static_cast<int>(rng.below(3));
  const int stages = 1 + static_cast<int>(rng.below(3));
  Rng init(rng.next());
  auto block = std::make_shared<nn::GnnBlock>(in, heads, hidden, stages, init);
  const nn::EdgeIndex g = random_graph(n, rng);
  Var x = Var::parameter(random_matrix(n, in, rng));
  const Matrix c = random_matrix(n, block->out_dim(), rng);
  nn::ParameterList params;
  block->collect(params, "gnn");
  auto inputs = parameters_of(params);
  inputs.push_back(x);
  return {[block, g, x, c] { return probe_loss((*block)(x, g), c); }, inputs};
}

inline GradCase classifier_case(Rng& rng) {
  const int n = 1 + static_cast<int>(rng.below(4));
  const auto in = static_cast<Eigen::Index>(2 + rng.below(4));
  std::vector<int> dims;
  const int hidden = 1 + static_cast<int>(rng.below(3));
  for (int s = 0; s < hidden; ++s) dims.push_back(3 + static_cast<int>(rng.below(4)));
  dims.push_back(1);
  Rng init(rng.next());
  const auto act = rng.bernoulli(0.5) ? nn::Activation::ReLU : nn::Activation::ELU;
  auto clf = std::make_shared<nn::Classifier>(in, dims, 0.0, act, init);
  for (auto& s : clf->hidden) {
    s.gamma.mutable_value() = Matrix::Ones(1, s.gamma.cols()) + random_matrix(1, s.gamma.cols(), rng, 0.3);
    s.beta.mutable_value() = random_matrix(1, s.beta.cols(), rng, 0.3);
  }
  Var x = Var::parameter(random_matrix(n, in, rng));
  const Matrix c = random_matrix(n, 1, rng);
  nn::ParameterList params;
  clf->collect(params, "clf");
  auto inputs = parameters_of(params);
  inputs.push_back(x);
  return {[clf, x, c] { return probe_loss((*clf)(x, false), c); }, inputs};
}

inline GradCase weighted_mse_case(Rng& rng) {
  const auto n = static_cast<Eigen::Index>(1 + rng.below(8));
  Matrix p(n, 1);
  std::vector<int> labels;
  for (Eigen::Index i = 0; i < n; ++i) {
    p(i) = 0.05 + 0.9 * rng.uniform();
    labels.push_back(rng.bernoulli(0.3) ? 1 : 0);
  }
  const double w = 1.0 + 9.0 * rng.uniform();
  Var probs = Var::parameter(p);
  return {[probs, labels, w] { return nn::weighted_mse_loss(probs, labels, w); }, {probs}};
}

}  // namespace disco::testing
