#include "disco/graph_features.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>

#include <json.hpp>

#include "disco/corpus_formats.hpp"
#include "disco/errors.hpp"

namespace disco {

namespace {

using json = nlohmann::json;

constexpr char kMagic[4] = {'D', 'G', 'F', 'V'};
constexpr std::uint32_t kBinaryVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "binary feature blocks assume a little-endian host");

void put_u32(std::string& out, std::uint32_t v) {
  char buf[4];
  std::memcpy(buf, &v, 4);
  out.append(buf, 4);
}

std::uint32_t get_u32(std::string_view bytes, std::size_t offset) {
  std::uint32_t v = 0;
  std::memcpy(&v, bytes.data() + offset, 4);
  return v;
}

}  // namespace

std::array<float, kGraphFeatureDim> GraphFeatureVector::packed() const {
  std::array<float, kGraphFeatureDim> out{};
  std::copy(rst_in.begin(), rst_in.end(), out.begin() + kRstInOffset);
  std::copy(rst_out.begin(), rst_out.end(), out.begin() + kRstOutOffset);
  out[kCorefOffset] = coref_share;
  std::copy(position.begin(), position.end(), out.begin() + kPositionOffset);
  return out;
}

double coref_share(int edu, const CorefGraph& coref) {
  const Degree d = degree_profile(coref, edu);
  if (coref.num_edges() == 0) return 0.0;
  return static_cast<double>(d.in) / static_cast<double>(coref.num_edges());
}

GraphFeatureVector encode_edu(int edu, const RstGraph& rst,
                              const CorefGraph* coref) {
  if (edu < 0 || edu >= rst.num_edus) {
    throw Error(ErrorCode::IndexOutOfRange,
                "EDU " + std::to_string(edu) + " of " +
                    std::to_string(rst.num_edus));
  }
  GraphFeatureVector v;
  for (const auto& e : rst.edges) {
    if (e.target == edu) v.rst_in[static_cast<std::size_t>(e.relation)] = 1.0f;
    if (e.source == edu) v.rst_out[static_cast<std::size_t>(e.relation)] = 1.0f;
  }
  if (coref != nullptr) v.coref_share = static_cast<float>(coref_share(edu, *coref));
  const std::size_t slot =
      std::min(static_cast<std::size_t>(edu), kPositionSlots - 1);
  v.position[slot] = 1.0f;
  return v;
}

FeatureMatrix encode_document(const RstGraph& rst, const CorefGraph* coref) {
  if (coref != nullptr && coref->num_edus() != rst.num_edus) {
    throw Error(ErrorCode::GraphSizeMismatch,
                "RST graph has " + std::to_string(rst.num_edus) +
                    " EDUs, coref graph " + std::to_string(coref->num_edus()));
  }
  FeatureMatrix m;
  m.num_edus = static_cast<std::size_t>(rst.num_edus);
  m.data.reserve(m.num_edus * kGraphFeatureDim);
  for (int i = 0; i < rst.num_edus; ++i) {
    const auto row = encode_edu(i, rst, coref).packed();
    m.data.insert(m.data.end(), row.begin(), row.end());
  }
  return m;
}

std::string serialize_features_binary(const FeatureMatrix& m) {
  std::string out(kMagic, 4);
  put_u32(out, kBinaryVersion);
  put_u32(out, static_cast<std::uint32_t>(m.num_edus));
  put_u32(out, static_cast<std::uint32_t>(kGraphFeatureDim));
  out.append(reinterpret_cast<const char*>(m.data.data()),
             m.data.size() * sizeof(float));
  return out;
}

FeatureMatrix parse_features_binary(std::string_view bytes) {
  if (bytes.size() < 16 || bytes.substr(0, 4) != std::string_view(kMagic, 4)) {
    throw Error(ErrorCode::MalformedRecord, "not a feature block");
  }
  if (get_u32(bytes, 4) != kBinaryVersion) {
    throw Error(ErrorCode::VersionMismatch,
                "feature block version " + std::to_string(get_u32(bytes, 4)));
  }
  FeatureMatrix m;
  m.num_edus = get_u32(bytes, 8);
  const std::uint32_t dim = get_u32(bytes, 12);
  if (dim != kGraphFeatureDim ||
      bytes.size() != 16 + m.num_edus * dim * sizeof(float)) {
    throw Error(ErrorCode::MalformedRecord, "feature block size mismatch");
  }
  m.data.resize(m.num_edus * dim);
  std::memcpy(m.data.data(), bytes.data() + 16, m.data.size() * sizeof(float));
  return m;
}

std::string serialize_features_jsonl(const std::string& doc_id,
                                     const FeatureMatrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.num_edus; ++i) {
    const auto r = m.row(i);
    rows.push_back(std::vector<float>(r.begin(), r.end()));
  }
  const json record = {{"version", kFormatVersion},
                       {"doc_id", doc_id},
                       {"num_edus", m.num_edus},
                       {"dim", kGraphFeatureDim},
                       {"rows", std::move(rows)}};
  return record.dump();
}

std::pair<std::string, FeatureMatrix> parse_features_jsonl(
    std::string_view line) {
  try {
    const json record = json::parse(line);
    if (record.at("version").get<std::string>() != kFormatVersion) {
      throw Error(ErrorCode::VersionMismatch, "feature record version");
    }
    if (record.at("dim").get<std::size_t>() != kGraphFeatureDim) {
      throw Error(ErrorCode::MalformedRecord, "feature dim");
    }
    FeatureMatrix m;
    m.num_edus = record.at("num_edus").get<std::size_t>();
    for (const auto& row : record.at("rows")) {
      if (row.size() != kGraphFeatureDim) {
        throw Error(ErrorCode::MalformedRecord, "feature row width");
      }
      for (const auto& v : row) m.data.push_back(v.get<float>());
    }
    if (m.data.size() != m.num_edus * kGraphFeatureDim) {
      throw Error(ErrorCode::MalformedRecord, "feature row count");
    }
    return {record.at("doc_id").get<std::string>(), std::move(m)};
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedRecord, e.what());
  }
}

}  // namespace disco
