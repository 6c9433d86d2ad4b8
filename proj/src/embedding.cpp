#include "disco/embedding.hpp"

#include <fstream>

#include <json.hpp>

#include "disco/errors.hpp"
#include "disco/random.hpp"
#include "disco/text.hpp"

namespace disco {

DeterministicRandomProvider::DeterministicRandomProvider(int dim,
                                                         std::uint64_t seed)
    : dim_(dim), seed_(seed) {
  if (dim < 1) throw Error(ErrorCode::InvalidConfig, "embedding dim < 1");
}

nn::Matrix DeterministicRandomProvider::keyed_vector(std::uint64_t key,
                                                     double scale) const {
  Rng rng(derive_seed(seed_, key));
  nn::Matrix v(1, dim_);
  for (int j = 0; j < dim_; ++j) v(0, j) = scale * rng.normal();
  return v;
}

nn::Matrix DeterministicRandomProvider::token_vector(
    const std::string& token) const {
  return keyed_vector(stable_hash("tok:" + to_lower(token)), 1.0);
}

std::vector<EduEmbedding> DeterministicRandomProvider::embed(
    const std::string&, const std::vector<Tokens>& edus) const {
  const nn::Matrix cls_base = keyed_vector(stable_hash("[CLS]"), 1.0);
  std::vector<EduEmbedding> out;
  out.reserve(edus.size());
  for (const auto& edu : edus) {
    const Tokens toks = edu.empty() ? Tokens{"[PAD]"} : edu;
    EduEmbedding e;
    e.tokens.resize(static_cast<Eigen::Index>(toks.size()), dim_);
    for (std::size_t i = 0; i < toks.size(); ++i) {
      e.tokens.row(static_cast<Eigen::Index>(i)) =
          token_vector(toks[i]) +
          keyed_vector(stable_hash("pos:" + std::to_string(i)), 0.1);
    }
    e.cls = cls_base + e.tokens.colwise().mean();
    out.push_back(std::move(e));
  }
  return out;
}

std::uint64_t DeterministicRandomProvider::parameter_hash() const {
  return derive_seed(seed_, static_cast<std::uint64_t>(dim_));
}

FileEmbeddingProvider::FileEmbeddingProvider(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read embeddings " + path);
  std::string line;
  std::size_t line_no = 0;
  std::uint64_t h = stable_hash(path);
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    h = derive_seed(h, stable_hash(line));
    try {
      const auto record = nlohmann::json::parse(line);
      const int dim = record.at("dim").get<int>();
      if (dim_ == 0) dim_ = dim;
      if (dim != dim_) {
        throw Error(ErrorCode::ShapeMismatch, "mixed embedding dims", line_no);
      }
      std::vector<EduEmbedding> edus;
      for (const auto& je : record.at("edus")) {
        EduEmbedding e;
        const auto& rows = je.at("tokens");
        e.tokens.resize(static_cast<Eigen::Index>(rows.size()), dim);
        for (std::size_t i = 0; i < rows.size(); ++i) {
          if (static_cast<int>(rows[i].size()) != dim) {
            throw Error(ErrorCode::ShapeMismatch, "token row width", line_no);
          }
          for (int j = 0; j < dim; ++j) {
            e.tokens(static_cast<Eigen::Index>(i), j) = rows[i][static_cast<std::size_t>(j)].get<double>();
          }
        }
        const auto& cls = je.at("cls");
        if (static_cast<int>(cls.size()) != dim || rows.empty()) {
          throw Error(ErrorCode::ShapeMismatch, "cls width or empty EDU", line_no);
        }
        e.cls.resize(1, dim);
        for (int j = 0; j < dim; ++j) e.cls(0, j) = cls[static_cast<std::size_t>(j)].get<double>();
        edus.push_back(std::move(e));
      }
      docs_[record.at("doc_id").get<std::string>()] = std::move(edus);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::MalformedRecord, e.what(), line_no);
    }
  }
  hash_ = h;
}

std::vector<EduEmbedding> FileEmbeddingProvider::embed(
    const std::string& doc_id, const std::vector<Tokens>& edus) const {
  const auto it = docs_.find(doc_id);
  if (it == docs_.end()) {
    throw Error(ErrorCode::MalformedRecord,
                "no precomputed embeddings for " + doc_id);
  }
  if (it->second.size() != edus.size()) {
    throw Error(ErrorCode::LengthMismatch,
                doc_id + ": " + std::to_string(it->second.size()) +
                    " embedded EDUs vs " + std::to_string(edus.size()));
  }
  return it->second;
}

std::unique_ptr<EmbeddingProvider> make_provider(const EmbeddingConfig& config,
                                                 int dim) {
  if (config.kind == "deterministic-random") {
    return std::make_unique<DeterministicRandomProvider>(dim, config.seed);
  }
  if (config.kind == "file") {
    auto provider = std::make_unique<FileEmbeddingProvider>(config.path);
    if (provider->dim() != dim) {
      throw Error(ErrorCode::ShapeMismatch,
                  "embedding file dim " + std::to_string(provider->dim()) +
                      " vs model dim " + std::to_string(dim));
    }
    return provider;
  }
  throw Error(ErrorCode::InvalidConfig,
              "unknown embedding provider '" + config.kind + "'");
}

}  // namespace disco
