#pragma once

// Token embedding providers standing in for a pre-trained language model.
// Providers are frozen: nothing in training writes to them.

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "disco/nn/autograd.hpp"
#include "disco/rouge.hpp"

namespace disco {

inline constexpr int kDefaultEmbeddingDim = 768;

struct EduEmbedding {
  nn::Matrix tokens;  // n x dim, n >= 1
  nn::Matrix cls;     // 1 x dim
};

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual int dim() const = 0;
  virtual std::vector<EduEmbedding> embed(
      const std::string& doc_id, const std::vector<Tokens>& edus) const = 0;
  // Digest of everything the provider's output depends on.
  virtual std::uint64_t parameter_hash() const = 0;
};

// Token vector = unit-variance Gaussian keyed by the lowercased token, plus a
// 0.1-scaled Gaussian keyed by its position within the EDU. The CLS vector of
// an EDU is a fixed [CLS] vector plus the mean of its token vectors. Empty
// EDUs embed as a single [PAD] token.
class DeterministicRandomProvider final : public EmbeddingProvider {
 public:
  explicit DeterministicRandomProvider(int dim = kDefaultEmbeddingDim,
                                       std::uint64_t seed = 0);

  int dim() const override { return dim_; }
  std::vector<EduEmbedding> embed(
      const std::string& doc_id,
      const std::vector<Tokens>& edus) const override;
  std::uint64_t parameter_hash() const override;

  nn::Matrix token_vector(const std::string& token) const;

 private:
  nn::Matrix keyed_vector(std::uint64_t key, double scale) const;

  int dim_;
  std::uint64_t seed_;
};

// Precomputed embeddings, one JSONL record per document:
// {"doc_id", "dim", "edus": [{"tokens": [[...], ...], "cls": [...]}]}
class FileEmbeddingProvider final : public EmbeddingProvider {
 public:
  explicit FileEmbeddingProvider(const std::string& path);

  int dim() const override { return dim_; }
  std::vector<EduEmbedding> embed(
      const std::string& doc_id,
      const std::vector<Tokens>& edus) const override;
  std::uint64_t parameter_hash() const override { return hash_; }

 private:
  int dim_ = 0;
  std::uint64_t hash_ = 0;
  std::map<std::string, std::vector<EduEmbedding>> docs_;
};

struct EmbeddingConfig {
  std::string kind = "deterministic-random";  // or "file"
  std::string path;                           // for kind == "file"
  std::uint64_t seed = 0;

  friend bool operator==(const EmbeddingConfig&, const EmbeddingConfig&) = default;
};

std::unique_ptr<EmbeddingProvider> make_provider(const EmbeddingConfig& config,
                                                 int dim);

}  // namespace disco
