#pragma once

// The EDU extraction encoder: token embeddings -> encoder adapter -> span
// extractor -> graph encoding (GAT blocks or one-hot graph vector) ->
// classification tower.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "disco/discourse_graphs.hpp"
#include "disco/embedding.hpp"
#include "disco/nn/layers.hpp"

namespace disco {

enum class GraphMode {
  None,  // classifier sees Linear(CLS ++ span)
  Gat,   // classifier sees the concatenated GNN block outputs
  Mlp,   // classifier sees CLS ++ span ++ 256-dim graph vector
};

GraphMode parse_graph_mode(std::string_view s);  // none|gat|mlp
std::string_view graph_mode_name(GraphMode m);

struct ModelConfig {
  int embed_dim = kDefaultEmbeddingDim;
  GraphMode mode = GraphMode::Mlp;
  bool use_rst = true;
  bool use_coref = false;
  int gat_heads = 4;
  int gat_hidden = 256;
  int gat_stages = 3;
  std::vector<int> tower = {1024, 1024, 1024, 64, 1};
  double dropout = 0.1;
  nn::Activation activation = nn::Activation::ReLU;
  std::uint64_t seed = 0;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct ModelInput {
  std::vector<EduEmbedding> edus;
  const RstGraph* rst = nullptr;
  const CorefGraph* coref = nullptr;
};

class ExtractorModel {
 public:
  explicit ExtractorModel(const ModelConfig& config);

  const ModelConfig& config() const { return config_; }

  // n x 1 importance probabilities, one per EDU.
  nn::Var forward(const ModelInput& input, bool training,
                  Rng* dropout_rng = nullptr) const;

  // Every trainable parameter, in a fixed order with stable names.
  nn::ParameterList parameters() const;
  // The parameters that play the role of the pre-trained encoder; held
  // fixed during the frozen phase.
  nn::ParameterList encoder_parameters() const;

  const nn::Linear& encoder_adapter() const { return adapter_; }
  const nn::SpanExtractor& span_extractor() const { return span_; }
  const std::optional<nn::GnnBlock>& rst_block() const { return rst_block_; }
  const std::optional<nn::GnnBlock>& coref_block() const { return coref_block_; }
  const nn::Classifier& classifier() const { return classifier_; }

  std::int64_t classifier_input_dim() const;

 private:
  ModelConfig config_;
  nn::Linear adapter_;  // identity-initialised stand-in for LM fine-tuning
  nn::SpanExtractor span_;
  nn::Linear merge_;
  std::optional<nn::GnnBlock> rst_block_;
  std::optional<nn::GnnBlock> coref_block_;
  nn::Classifier classifier_;
};

nn::EdgeIndex rst_edge_index(const RstGraph& g);
// Both directions of every undirected pair.
nn::EdgeIndex coref_edge_index(const CorefGraph& g);

}  // namespace disco
