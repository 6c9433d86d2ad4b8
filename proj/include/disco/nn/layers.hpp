#pragma once

// Differentiable building blocks of the EDU extraction encoder.

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "disco/nn/autograd.hpp"
#include "disco/random.hpp"

namespace disco::nn {

struct NamedParameter {
  std::string name;
  Var var;
};
using ParameterList = std::vector<NamedParameter>;

// U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
Matrix fan_in_uniform(Eigen::Index rows, Eigen::Index cols,
                      Eigen::Index fan_in, Rng& rng);

struct Linear {
  Var weight;  // in x out
  Var bias;    // 1 x out

  Linear() = default;
  Linear(Eigen::Index in, Eigen::Index out, Rng& rng);

  Eigen::Index in_dim() const { return weight.rows(); }
  Eigen::Index out_dim() const { return weight.cols(); }
  Var operator()(const Var& x) const;
  void collect(ParameterList& out, const std::string& prefix) const;
};

// Attention pooling of the token embeddings of one span:
//   H = ReLU(X W1 + b1), A = H W2 + b2, alpha = softmax(A), S = sum_i alpha_i X_i
struct SpanExtractor {
  Var w1;  // D x D
  Var b1;  // 1 x D
  Var w2;  // D x 1
  Var b2;  // 1 x 1

  struct Output {
    Var span;       // 1 x D
    Var attention;  // n x 1
  };

  SpanExtractor() = default;
  SpanExtractor(Eigen::Index dim, Rng& rng);

  Eigen::Index dim() const { return w1.rows(); }
  Output operator()(const Var& tokens) const;  // tokens: n x D, n >= 1
  void collect(ParameterList& out, const std::string& prefix) const;
};

// Directed edges (source -> target); messages flow along edge direction.
struct EdgeIndex {
  int num_nodes = 0;
  std::vector<std::pair<int, int>> edges;

  // In-neighbours of every node with self-loops: existing self-loops are
  // dropped and each node gets exactly one, placed last.
  std::vector<std::vector<int>> neighborhoods_with_self_loops() const;
};

// Single-layer GAT with concatenated heads:
//   z = x W (per head slice), e_ij = LeakyReLU(a_dst . z_i + a_src . z_j),
//   alpha_i. = softmax over j in N(i) + {i}, out_i = sum_j alpha_ij z_j + bias
struct GatLayer {
  Var weight;    // in x (heads * out)
  Var att_src;   // out x heads
  Var att_dst;   // out x heads
  Var bias;      // 1 x (heads * out)
  int heads = 1;
  int head_dim = 1;
  double negative_slope = 0.2;

  struct Output {
    Var features;  // n x (heads * out)
    // attention[h][i] holds node i's weights over its neighborhood, in the
    // order given by EdgeIndex::neighborhoods_with_self_loops().
    std::vector<std::vector<Eigen::VectorXd>> attention;
  };

  GatLayer() = default;
  GatLayer(Eigen::Index in, int heads, int head_dim, Rng& rng);

  Eigen::Index out_dim() const { return heads * head_dim; }
  Output forward(const Var& x, const EdgeIndex& graph) const;
  Var operator()(const Var& x, const EdgeIndex& graph) const {
    return forward(x, graph).features;
  }
  // Attention aggregation for one node given its transformed neighbourhood;
  // exposed so the layer can be re-expressed as a message-passing step.
  Var attend(const Var& transformed, int node,
             const std::vector<int>& neighborhood, int head) const;
  Var transform(const Var& x) const { return matmul(x, weight); }
  void collect(ParameterList& out, const std::string& prefix) const;
};

// Stack of stages, each ELU(Linear(x) + GAT(x)); the linear branch maps to
// the GAT output width so the two can be summed.
struct GnnBlock {
  struct Stage {
    Linear linear;
    GatLayer gat;
  };
  std::vector<Stage> stages;
  double elu_alpha = 1.0;

  GnnBlock() = default;
  GnnBlock(Eigen::Index in, int heads, int hidden, int num_stages, Rng& rng);

  Eigen::Index out_dim() const;
  Var operator()(const Var& x, const EdgeIndex& graph) const;
  void collect(ParameterList& out, const std::string& prefix) const;
};

enum class Activation { ReLU, ELU };

// Stages of linear -> activation -> dropout -> layer norm, with the last
// stage (output width 1) followed only by a sigmoid.
struct Classifier {
  struct Stage {
    Linear linear;
    Var gamma;  // 1 x out
    Var beta;   // 1 x out
  };
  std::vector<Stage> hidden;
  Linear output;
  Activation activation = Activation::ReLU;
  double dropout = 0.1;
  double norm_eps = 1e-9;

  Classifier() = default;
  // stage_dims lists every stage's output width, ending in 1.
  Classifier(Eigen::Index in, const std::vector<int>& stage_dims,
             double dropout, Activation activation, Rng& rng);

  std::vector<int> stage_dims() const;
  Eigen::Index in_dim() const;
  // Returns n x 1 probabilities. `rng` is required when dropout_active.
  Var operator()(const Var& features, bool dropout_active,
                 Rng* rng = nullptr) const;
  void collect(ParameterList& out, const std::string& prefix) const;
};

// Inverted dropout mask: each entry is 0 with probability `rate`, otherwise
// 1 / (1 - rate).
Matrix dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate,
                    Rng& rng);

// mean_i w_i (p_i - y_i)^2 with w_i = pos_weight for y_i = 1, else 1.
Var weighted_mse_loss(const Var& probs, const std::vector<int>& labels,
                      double pos_weight);

// One generic message-passing round:
//   m_u = AGGREGATE(u, {h_v : v in N(u)}), h_u' = UPDATE(h_u, m_u)
// `neighbor_states` is the |N(u)| x F gather of h (0 rows when N(u) is empty).
using AggregateFn =
    std::function<Var(int node, const Var& neighbor_states, const Var& states)>;
using UpdateFn = std::function<Var(const Var& self_state, const Var& message)>;

Var message_passing_step(const Var& states,
                         const std::vector<std::vector<int>>& neighborhoods,
                         const AggregateFn& aggregate, const UpdateFn& update);

AggregateFn sum_aggregate();
AggregateFn mean_aggregate();

}  // namespace disco::nn
