#include "disco/model.hpp"

#include "disco/errors.hpp"
#include "disco/graph_features.hpp"

namespace disco {

using nn::Matrix;
using nn::Var;

GraphMode parse_graph_mode(std::string_view s) {
  if (s == "none") return GraphMode::None;
  if (s == "gat") return GraphMode::Gat;
  if (s == "mlp") return GraphMode::Mlp;
  throw Error(ErrorCode::InvalidConfig, "unknown graph mode '" + std::string(s) + "'");
}

std::string_view graph_mode_name(GraphMode m) {
  switch (m) {
    case GraphMode::None: return "none";
    case GraphMode::Gat: return "gat";
    case GraphMode::Mlp: return "mlp";
  }
  return "none";
}

nn::EdgeIndex rst_edge_index(const RstGraph& g) {
  nn::EdgeIndex idx;
  idx.num_nodes = g.num_edus;
  for (const auto& e : g.edges) idx.edges.emplace_back(e.source, e.target);
  return idx;
}

nn::EdgeIndex coref_edge_index(const CorefGraph& g) {
  nn::EdgeIndex idx;
  idx.num_nodes = g.num_edus();
  for (auto [a, b] : g.pairs()) {
    idx.edges.emplace_back(a, b);
    idx.edges.emplace_back(b, a);
  }
  return idx;
}

namespace {

std::int64_t tower_input_dim(const ModelConfig& c) {
  switch (c.mode) {
    case GraphMode::None: return c.embed_dim;
    case GraphMode::Gat:
      return static_cast<std::int64_t>(c.use_rst + c.use_coref) *
             c.gat_heads * c.gat_hidden;
    case GraphMode::Mlp:
      return 2 * static_cast<std::int64_t>(c.embed_dim) +
             static_cast<std::int64_t>(kGraphFeatureDim);
  }
  return c.embed_dim;
}

}  // namespace

ExtractorModel::ExtractorModel(const ModelConfig& config) : config_(config) {
  if (config.embed_dim < 1) throw Error(ErrorCode::InvalidConfig, "embed_dim < 1");
  if (config.mode == GraphMode::Gat && !config.use_rst && !config.use_coref) {
    throw Error(ErrorCode::InvalidConfig, "GAT mode needs an RST or coref graph");
  }
  Rng rng(derive_seed(config.seed, stable_hash("model-init")));
  const Eigen::Index d = config.embed_dim;
  adapter_.weight = Var::parameter(Matrix::Identity(d, d));
  adapter_.bias = Var::parameter(Matrix::Zero(1, d));
  span_ = nn::SpanExtractor(d, rng);
  merge_ = nn::Linear(2 * d, d, rng);
  if (config.mode == GraphMode::Gat) {
    if (config.use_rst) {
      rst_block_.emplace(d, config.gat_heads, config.gat_hidden,
                         config.gat_stages, rng);
    }
    if (config.use_coref) {
      coref_block_.emplace(d, config.gat_heads, config.gat_hidden,
                           config.gat_stages, rng);
    }
  }
  classifier_ = nn::Classifier(tower_input_dim(config), config.tower,
                               config.dropout, config.activation, rng);
}

std::int64_t ExtractorModel::classifier_input_dim() const {
  return classifier_.in_dim();
}

Var ExtractorModel::forward(const ModelInput& input, bool training,
                            Rng* dropout_rng) const {
  const auto n = static_cast<Eigen::Index>(input.edus.size());
  if (n == 0) throw Error(ErrorCode::ShapeMismatch, "document has no EDUs");
  const Eigen::Index d = config_.embed_dim;

  // All tokens go through the adapter in one product, then split per EDU.
  Eigen::Index total = 0;
  for (const auto& e : input.edus) {
    if (e.tokens.cols() != d || e.cls.cols() != d || e.tokens.rows() < 1) {
      throw Error(ErrorCode::ShapeMismatch,
                  "embedding width " + std::to_string(e.tokens.cols()) +
                      " for model dim " + std::to_string(d));
    }
    total += e.tokens.rows();
  }
  Matrix stacked(total + n, d);
  Eigen::Index at = 0;
  for (const auto& e : input.edus) {
    stacked.middleRows(at, e.tokens.rows()) = e.tokens;
    at += e.tokens.rows();
  }
  for (const auto& e : input.edus) stacked.row(at++) = e.cls.row(0);
  const Var adapted = adapter_(Var::constant(std::move(stacked)));

  std::vector<Var> spans;
  spans.reserve(input.edus.size());
  at = 0;
  for (const auto& e : input.edus) {
    spans.push_back(span_(nn::slice_rows(adapted, at, e.tokens.rows())).span);
    at += e.tokens.rows();
  }
  const Var cls = nn::slice_rows(adapted, total, n);
  const Var span_matrix = nn::concat_rows(spans);

  Var features;
  switch (config_.mode) {
    case GraphMode::None: {
      const Var parts[] = {cls, span_matrix};
      features = merge_(nn::concat_cols(parts));
      break;
    }
    case GraphMode::Gat: {
      const Var parts[] = {cls, span_matrix};
      const Var merged = merge_(nn::concat_cols(parts));
      std::vector<Var> blocks;
      if (rst_block_) {
        nn::EdgeIndex idx{static_cast<int>(n), {}};
        if (input.rst != nullptr) {
          if (input.rst->num_edus != n) {
            throw Error(ErrorCode::GraphSizeMismatch, "RST graph size");
          }
          idx = rst_edge_index(*input.rst);
        }
        blocks.push_back((*rst_block_)(merged, idx));
      }
      if (coref_block_) {
        nn::EdgeIndex idx{static_cast<int>(n), {}};
        if (input.coref != nullptr) {
          if (input.coref->num_edus() != n) {
            throw Error(ErrorCode::GraphSizeMismatch, "coref graph size");
          }
          idx = coref_edge_index(*input.coref);
        }
        blocks.push_back((*coref_block_)(merged, idx));
      }
      features = nn::concat_cols(blocks);
      break;
    }
    case GraphMode::Mlp: {
      RstGraph empty;
      empty.num_edus = static_cast<int>(n);
      const RstGraph& rst = input.rst != nullptr ? *input.rst : empty;
      if (rst.num_edus != n) {
        throw Error(ErrorCode::GraphSizeMismatch, "RST graph size");
      }
      const CorefGraph* coref = config_.use_coref ? input.coref : nullptr;
      const FeatureMatrix fm = encode_document(config_.use_rst ? rst : empty, coref);
      Matrix g(n, static_cast<Eigen::Index>(kGraphFeatureDim));
      for (Eigen::Index i = 0; i < n; ++i) {
        const auto row = fm.row(static_cast<std::size_t>(i));
        for (std::size_t j = 0; j < kGraphFeatureDim; ++j) {
          g(i, static_cast<Eigen::Index>(j)) = row[j];
        }
      }
      const Var parts[] = {cls, span_matrix, Var::constant(std::move(g))};
      features = nn::concat_cols(parts);
      break;
    }
  }
  return classifier_(features, training, dropout_rng);
}

nn::ParameterList ExtractorModel::parameters() const {
  nn::ParameterList out = encoder_parameters();
  span_.collect(out, "span_extractor");
  if (config_.mode != GraphMode::Mlp) merge_.collect(out, "merge");
  if (rst_block_) rst_block_->collect(out, "gnn_rst");
  if (coref_block_) coref_block_->collect(out, "gnn_coref");
  classifier_.collect(out, "classifier");
  return out;
}

nn::ParameterList ExtractorModel::encoder_parameters() const {
  nn::ParameterList out;
  adapter_.collect(out, "encoder_adapter");
  return out;
}

}  // namespace disco
