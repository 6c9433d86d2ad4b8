#pragma once

// Synthetic corpora shared by unit and acceptance tests.

#include <string>
#include <vector>

#include "disco/random.hpp"
#include "disco/training.hpp"

namespace disco::testing {

// Documents of `edus_per_doc` three-token EDUs, exactly one of them positive
// (10% for ten EDUs per document). Positive EDUs draw from a vocabulary
// disjoint from the negatives, so the embeddings separate the classes.
inline std::vector<TrainingExample> separable_corpus(int num_docs,
                                                     int edus_per_doc,
                                                     std::uint64_t seed) {
  static const std::vector<std::string> negative = {
      "river", "stone", "paper", "cloud", "table", "green", "north", "slow",
      "bread", "glass", "metal", "quiet"};
  static const std::vector<std::string> positive = {"alpha", "beta"};
  Rng rng(seed);
  std::vector<TrainingExample> corpus;
  for (int d = 0; d < num_docs; ++d) {
    TrainingExample ex;
    ex.doc_id = "synthetic-" + std::to_string(d);
    ex.rst.num_edus = edus_per_doc;
    const int positive_at = static_cast<int>(rng.below(static_cast<std::uint64_t>(edus_per_doc)));
    for (int e = 0; e < edus_per_doc; ++e) {
      const int label = e == positive_at ? 1 : 0;
      const auto& vocab = label ? positive : negative;
      Tokens edu;
      for (int t = 0; t < 3; ++t) edu.push_back(vocab[rng.below(vocab.size())]);
      ex.edus.push_back(edu);
      ex.labels.push_back(label);
    }
    corpus.push_back(std::move(ex));
  }
  return corpus;
}

// Desk-scale model and schedule used by the trainability checks.
inline TrainConfig small_train_config(std::uint64_t seed) {
  TrainConfig c;
  c.seed = seed;
  c.epochs_frozen = 3;
  c.epochs_full = 197;
  c.lr.kind = LrSchedule::Kind::Constant;
  c.lr.initial = 1e-4;
  c.pos_weight = 9.0;
  c.stop_at_perfect_validation = true;
  c.model.seed = seed;
  c.model.embed_dim = 16;
  c.model.mode = GraphMode::Mlp;
  c.model.tower = {32, 32, 32, 16, 1};
  c.model.dropout = 0.0;
  c.embedding.seed = seed;
  return c;
}

}  // namespace disco::testing
