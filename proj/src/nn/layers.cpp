#include "disco/nn/layers.hpp"

#include <cmath>

#include "disco/errors.hpp"

namespace disco::nn {

Matrix fan_in_uniform(Eigen::Index rows, Eigen::Index cols,
                      Eigen::Index fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(std::max<Eigen::Index>(fan_in, 1)));
  Matrix m(rows, cols);
  // Column-major fill order is part of the determinism contract.
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.uniform(-bound, bound);
  }
  return m;
}

Linear::Linear(Eigen::Index in, Eigen::Index out, Rng& rng)
    : weight(Var::parameter(fan_in_uniform(in, out, in, rng))),
      bias(Var::parameter(fan_in_uniform(1, out, in, rng))) {}

Var Linear::operator()(const Var& x) const {
  return add_row(matmul(x, weight), bias);
}

void Linear::collect(ParameterList& out, const std::string& prefix) const {
  out.push_back({prefix + ".weight", weight});
  out.push_back({prefix + ".bias", bias});
}

SpanExtractor::SpanExtractor(Eigen::Index dim, Rng& rng)
    : w1(Var::parameter(fan_in_uniform(dim, dim, dim, rng))),
      b1(Var::parameter(fan_in_uniform(1, dim, dim, rng))),
      w2(Var::parameter(fan_in_uniform(dim, 1, dim, rng))),
      b2(Var::parameter(fan_in_uniform(1, 1, dim, rng))) {}

SpanExtractor::Output SpanExtractor::operator()(const Var& tokens) const {
  if (tokens.rows() < 1 || tokens.cols() != dim()) {
    throw Error(ErrorCode::ShapeMismatch,
                "span extractor expects n x " + std::to_string(dim()) +
                    " with n >= 1, got " + std::to_string(tokens.rows()) +
                    "x" + std::to_string(tokens.cols()));
  }
  const Var hidden = relu(add_row(matmul(tokens, w1), b1));
  const Var scores = add_scalar(matmul(hidden, w2), b2);
  const Var alpha = softmax(scores);
  return {matmul(transpose(alpha), tokens), alpha};
}

void SpanExtractor::collect(ParameterList& out,
                            const std::string& prefix) const {
  out.push_back({prefix + ".w1", w1});
  out.push_back({prefix + ".b1", b1});
  out.push_back({prefix + ".w2", w2});
  out.push_back({prefix + ".b2", b2});
}

std::vector<std::vector<int>> EdgeIndex::neighborhoods_with_self_loops()
    const {
  std::vector<std::vector<int>> hood(static_cast<std::size_t>(num_nodes));
  for (auto [src, dst] : edges) {
    if (src < 0 || src >= num_nodes || dst < 0 || dst >= num_nodes) {
      throw Error(ErrorCode::IndexOutOfRange,
                  "edge (" + std::to_string(src) + ", " + std::to_string(dst) +
                      ") with " + std::to_string(num_nodes) + " nodes");
    }
    if (src != dst) hood[static_cast<std::size_t>(dst)].push_back(src);
  }
  for (int i = 0; i < num_nodes; ++i) hood[static_cast<std::size_t>(i)].push_back(i);
  return hood;
}

GatLayer::GatLayer(Eigen::Index in, int heads_, int head_dim_, Rng& rng)
    : weight(Var::parameter(fan_in_uniform(in, heads_ * head_dim_, in, rng))),
      att_src(Var::parameter(fan_in_uniform(head_dim_, heads_, head_dim_, rng))),
      att_dst(Var::parameter(fan_in_uniform(head_dim_, heads_, head_dim_, rng))),
      bias(Var::parameter(Matrix::Zero(1, heads_ * head_dim_))),
      heads(heads_),
      head_dim(head_dim_) {}

namespace {

struct HeadScores {
  Var z;    // n x head_dim
  Var src;  // n x 1
  Var dst;  // n x 1
};

HeadScores head_scores(const GatLayer& layer, const Var& transformed,
                       int head) {
  HeadScores s;
  s.z = slice_cols(transformed, head * layer.head_dim, layer.head_dim);
  s.src = matmul(s.z, slice_cols(layer.att_src, head, 1));
  s.dst = matmul(s.z, slice_cols(layer.att_dst, head, 1));
  return s;
}

Var attend_with(const HeadScores& s, int node,
                const std::vector<int>& neighborhood, double slope,
                Eigen::VectorXd* weights_out) {
  const Var logits = leaky_relu(
      add_scalar(gather_rows(s.src, neighborhood), slice_rows(s.dst, node, 1)),
      slope);
  const Var alpha = softmax(logits);
  if (weights_out != nullptr) *weights_out = alpha.value().col(0);
  return matmul(transpose(alpha), gather_rows(s.z, neighborhood));
}

}  // namespace

Var GatLayer::attend(const Var& transformed, int node,
                     const std::vector<int>& neighborhood, int head) const {
  return attend_with(head_scores(*this, transformed, head), node, neighborhood,
                     negative_slope, nullptr);
}

GatLayer::Output GatLayer::forward(const Var& x, const EdgeIndex& graph) const {
  if (x.cols() != weight.rows() || x.rows() != graph.num_nodes) {
    throw Error(ErrorCode::ShapeMismatch,
                "GAT input " + std::to_string(x.rows()) + "x" +
                    std::to_string(x.cols()) + " for " +
                    std::to_string(graph.num_nodes) + " nodes and in_dim " +
                    std::to_string(weight.rows()));
  }
  const auto hood = graph.neighborhoods_with_self_loops();
  const Var transformed = transform(x);
  Output out;
  out.attention.resize(static_cast<std::size_t>(heads));
  std::vector<Var> head_outputs;
  for (int h = 0; h < heads; ++h) {
    const HeadScores s = head_scores(*this, transformed, h);
    auto& weights = out.attention[static_cast<std::size_t>(h)];
    weights.resize(hood.size());
    std::vector<Var> rows;
    rows.reserve(hood.size());
    for (int i = 0; i < graph.num_nodes; ++i) {
      rows.push_back(attend_with(s, i, hood[static_cast<std::size_t>(i)],
                                 negative_slope,
                                 &weights[static_cast<std::size_t>(i)]));
    }
    head_outputs.push_back(concat_rows(rows));
  }
  out.features = add_row(concat_cols(head_outputs), bias);
  return out;
}

void GatLayer::collect(ParameterList& out, const std::string& prefix) const {
  out.push_back({prefix + ".weight", weight});
  out.push_back({prefix + ".att_src", att_src});
  out.push_back({prefix + ".att_dst", att_dst});
  out.push_back({prefix + ".bias", bias});
}

GnnBlock::GnnBlock(Eigen::Index in, int heads, int hidden, int num_stages,
                   Rng& rng) {
  Eigen::Index width = in;
  for (int s = 0; s < num_stages; ++s) {
    Stage stage;
    stage.linear = Linear(width, heads * hidden, rng);
    stage.gat = GatLayer(width, heads, hidden, rng);
    width = heads * hidden;
    stages.push_back(std::move(stage));
  }
}

Eigen::Index GnnBlock::out_dim() const {
  return stages.empty() ? 0 : stages.back().gat.out_dim();
}

Var GnnBlock::operator()(const Var& x, const EdgeIndex& graph) const {
  Var h = x;
  for (const auto& stage : stages) {
    h = elu(add(stage.linear(h), stage.gat(h, graph)), elu_alpha);
  }
  return h;
}

void GnnBlock::collect(ParameterList& out, const std::string& prefix) const {
  for (std::size_t s = 0; s < stages.size(); ++s) {
    const std::string p = prefix + ".stage" + std::to_string(s);
    stages[s].linear.collect(out, p + ".linear");
    stages[s].gat.collect(out, p + ".gat");
  }
}

Classifier::Classifier(Eigen::Index in, const std::vector<int>& stage_dims,
                       double dropout_, Activation activation_, Rng& rng)
    : activation(activation_), dropout(dropout_) {
  if (stage_dims.empty() || stage_dims.back() != 1) {
    throw Error(ErrorCode::ShapeMismatch,
                "classifier stages must end with output width 1");
  }
  Eigen::Index width = in;
  for (std::size_t s = 0; s + 1 < stage_dims.size(); ++s) {
    Stage stage;
    stage.linear = Linear(width, stage_dims[s], rng);
    stage.gamma = Var::parameter(Matrix::Ones(1, stage_dims[s]));
    stage.beta = Var::parameter(Matrix::Zero(1, stage_dims[s]));
    width = stage_dims[s];
    hidden.push_back(std::move(stage));
  }
  output = Linear(width, 1, rng);
}

std::vector<int> Classifier::stage_dims() const {
  std::vector<int> dims;
  for (const auto& s : hidden) dims.push_back(static_cast<int>(s.linear.out_dim()));
  dims.push_back(static_cast<int>(output.out_dim()));
  return dims;
}

Eigen::Index Classifier::in_dim() const {
  return hidden.empty() ? output.in_dim() : hidden.front().linear.in_dim();
}

Var Classifier::operator()(const Var& features, bool dropout_active,
                           Rng* rng) const {
  if (features.cols() != in_dim()) {
    throw Error(ErrorCode::ShapeMismatch,
                "classifier expects " + std::to_string(in_dim()) +
                    " features, got " + std::to_string(features.cols()));
  }
  if (dropout_active && dropout > 0.0 && rng == nullptr) {
    throw Error(ErrorCode::InvalidConfig, "active dropout needs an RNG");
  }
  Var h = features;
  for (const auto& stage : hidden) {
    h = stage.linear(h);
    h = activation == Activation::ReLU ? relu(h) : elu(h);
    if (dropout_active && dropout > 0.0) {
      h = apply_mask(h, dropout_mask(h.rows(), h.cols(), dropout, *rng));
    }
    h = layer_norm_rows(h, stage.gamma, stage.beta, norm_eps);
  }
  return sigmoid(output(h));
}

void Classifier::collect(ParameterList& out, const std::string& prefix) const {
  for (std::size_t s = 0; s < hidden.size(); ++s) {
    const std::string p = prefix + ".stage" + std::to_string(s);
    hidden[s].linear.collect(out, p + ".linear");
    out.push_back({p + ".norm.gamma", hidden[s].gamma});
    out.push_back({p + ".norm.beta", hidden[s].beta});
  }
  output.collect(out, prefix + ".output");
}

Matrix dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate,
                    Rng& rng) {
  const double keep = 1.0 - rate;
  Matrix mask(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      mask(i, j) = rng.uniform() < keep ? 1.0 / keep : 0.0;
    }
  }
  return mask;
}

Var weighted_mse_loss(const Var& probs, const std::vector<int>& labels,
                      double pos_weight) {
  if (static_cast<std::size_t>(probs.value().size()) != labels.size()) {
    throw Error(ErrorCode::LengthMismatch,
                std::to_string(probs.value().size()) + " probabilities vs " +
                    std::to_string(labels.size()) + " labels");
  }
  if (labels.empty()) throw Error(ErrorCode::LengthMismatch, "no labels");
  Matrix target(probs.rows(), probs.cols());
  Matrix weight(probs.rows(), probs.cols());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    target(k) = labels[i] != 0 ? 1.0 : 0.0;
    weight(k) = labels[i] != 0 ? pos_weight : 1.0;
  }
  const Var diff = sub(probs, Var::constant(std::move(target)));
  return mean(mul(Var::constant(std::move(weight)), mul(diff, diff)));
}

Var message_passing_step(const Var& states,
                         const std::vector<std::vector<int>>& neighborhoods,
                         const AggregateFn& aggregate, const UpdateFn& update) {
  if (static_cast<Eigen::Index>(neighborhoods.size()) != states.rows()) {
    throw Error(ErrorCode::ShapeMismatch,
                std::to_string(neighborhoods.size()) + " neighbourhoods for " +
                    std::to_string(states.rows()) + " nodes");
  }
  std::vector<Var> rows;
  rows.reserve(neighborhoods.size());
  for (std::size_t u = 0; u < neighborhoods.size(); ++u) {
    const int node = static_cast<int>(u);
    const Var neighbors = gather_rows(states, neighborhoods[u]);
    const Var message = aggregate(node, neighbors, states);
    rows.push_back(update(slice_rows(states, node, 1), message));
  }
  return concat_rows(rows);
}

AggregateFn sum_aggregate() {
  return [](int, const Var& neighbors, const Var&) { return sum_rows(neighbors); };
}

AggregateFn mean_aggregate() {
  return [](int, const Var& neighbors, const Var&) { return mean_rows(neighbors); };
}

}  // namespace disco::nn
