#include "disco/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "disco/corpus_formats.hpp"
#include "disco/errors.hpp"

namespace disco {

static_assert(std::endian::native == std::endian::little,
              "checkpoint blobs are written in host byte order");

using json = nlohmann::ordered_json;

namespace {

json config_to_json(const ModelConfig& c) {
  return json{{"embed_dim", c.embed_dim},
              {"mode", graph_mode_name(c.mode)},
              {"use_rst", c.use_rst},
              {"use_coref", c.use_coref},
              {"gat_heads", c.gat_heads},
              {"gat_hidden", c.gat_hidden},
              {"gat_stages", c.gat_stages},
              {"tower", c.tower},
              {"dropout", c.dropout},
              {"activation", c.activation == nn::Activation::ELU ? "elu" : "relu"},
              {"seed", c.seed}};
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  c.embed_dim = j.at("embed_dim").get<int>();
  c.mode = parse_graph_mode(j.at("mode").get<std::string>());
  c.use_rst = j.at("use_rst").get<bool>();
  c.use_coref = j.at("use_coref").get<bool>();
  c.gat_heads = j.at("gat_heads").get<int>();
  c.gat_hidden = j.at("gat_hidden").get<int>();
  c.gat_stages = j.at("gat_stages").get<int>();
  c.tower = j.at("tower").get<std::vector<int>>();
  c.dropout = j.at("dropout").get<double>();
  c.activation = j.at("activation").get<std::string>() == "elu"
                     ? nn::Activation::ELU
                     : nn::Activation::ReLU;
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + p.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

std::string model_config_json(const ModelConfig& config) {
  return config_to_json(config).dump();
}

ModelConfig parse_model_config_json(const std::string& json_text) {
  try {
    return config_from_json(json::parse(json_text));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedRecord, e.what());
  }
}

void save_checkpoint(const std::string& dir, const ExtractorModel& model,
                     const EmbeddingConfig& embedding) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + dir);

  json params = json::array();
  std::string blob;
  for (const auto& p : model.parameters()) {
    const nn::Matrix& m = p.var.value();
    params.push_back({{"name", p.name},
                      {"shape", {m.rows(), m.cols()}},
                      {"offset", blob.size()}});
    // Row-major on disk regardless of Eigen's storage order.
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        char bytes[sizeof(double)];
        const double v = m(r, c);
        std::memcpy(bytes, &v, sizeof v);
        blob.append(bytes, sizeof bytes);
      }
    }
  }
  json manifest{{"version", std::string(kFormatVersion)},
                {"dtype", "float64"},
                {"byte_order", "little"},
                {"model_config", config_to_json(model.config())},
                {"embedding",
                 {{"kind", embedding.kind},
                  {"path", embedding.path},
                  {"seed", embedding.seed}}},
                {"total_bytes", blob.size()},
                {"params", params}};

  std::ofstream m(fs::path(dir) / kManifestFile, std::ios::binary);
  std::ofstream b(fs::path(dir) / kParamsFile, std::ios::binary);
  if (!m || !b) throw Error(ErrorCode::Io, "cannot write checkpoint in " + dir);
  m << manifest.dump(2) << '\n';
  b.write(blob.data(), static_cast<std::streamsize>(blob.size()));
}

Checkpoint load_checkpoint(const std::string& dir) {
  namespace fs = std::filesystem;
  const std::string manifest_text = read_file(fs::path(dir) / kManifestFile);
  const std::string blob = read_file(fs::path(dir) / kParamsFile);
  json manifest;
  try {
    manifest = json::parse(manifest_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedRecord, e.what());
  }
  const std::string version = manifest.value("version", "");
  if (version != kFormatVersion) {
    throw Error(ErrorCode::VersionMismatch,
                "checkpoint version '" + version + "', expected '" +
                    std::string(kFormatVersion) + "'");
  }
  try {
    if (manifest.at("dtype").get<std::string>() != "float64") {
      throw Error(ErrorCode::MalformedRecord, "unsupported dtype");
    }
    EmbeddingConfig emb;
    emb.kind = manifest.at("embedding").at("kind").get<std::string>();
    emb.path = manifest.at("embedding").at("path").get<std::string>();
    emb.seed = manifest.at("embedding").at("seed").get<std::uint64_t>();
    Checkpoint ck{ExtractorModel(config_from_json(manifest.at("model_config"))), emb};

    std::map<std::string, const json*> entries;
    for (const auto& e : manifest.at("params")) {
      entries[e.at("name").get<std::string>()] = &e;
    }
    const nn::ParameterList params = ck.model.parameters();
    if (entries.size() != params.size()) {
      throw Error(ErrorCode::ShapeMismatch, "parameter count differs from model");
    }
    for (const auto& p : params) {
      const auto it = entries.find(p.name);
      if (it == entries.end()) {
        throw Error(ErrorCode::ShapeMismatch, "missing parameter " + p.name);
      }
      const json& e = *it->second;
      nn::Var v = p.var;
      const auto rows = e.at("shape")[0].get<Eigen::Index>();
      const auto cols = e.at("shape")[1].get<Eigen::Index>();
      if (rows != v.rows() || cols != v.cols()) {
        throw Error(ErrorCode::ShapeMismatch, "shape of " + p.name);
      }
      const auto offset = e.at("offset").get<std::size_t>();
      const std::size_t bytes = static_cast<std::size_t>(rows * cols) * sizeof(double);
      if (offset + bytes > blob.size()) {
        throw Error(ErrorCode::MalformedRecord, "blob too short for " + p.name);
      }
      nn::Matrix& m = v.mutable_value();
      std::size_t at = offset;
      for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
          std::memcpy(&m(r, c), blob.data() + at, sizeof(double));
          at += sizeof(double);
        }
      }
    }
    return ck;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedRecord, e.what());
  }
}

}  // namespace disco
