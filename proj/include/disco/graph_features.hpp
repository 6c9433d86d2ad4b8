#pragma once

// Fixed-width graph-context encoding of an EDU, fed to the MLP variant of the
// extraction classifier.
//
// Layout of the packed vector (256 slots):
//   [0, 43)     rst_in     1 if the EDU has >= 1 incoming edge of relation t
//   [43, 86)    rst_out    1 if the EDU has >= 1 outgoing edge of relation t
//   [86]        coref_share
//   [87, 256)   position   one-hot EDU position, positions >= 168 share slot 168

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "disco/discourse_graphs.hpp"
#include "disco/relations.hpp"

namespace disco {

inline constexpr std::size_t kPositionSlots = 169;
inline constexpr std::size_t kRstInOffset = 0;
inline constexpr std::size_t kRstOutOffset = kRstInOffset + kNumRelations;
inline constexpr std::size_t kCorefOffset = kRstOutOffset + kNumRelations;
inline constexpr std::size_t kPositionOffset = kCorefOffset + 1;
inline constexpr std::size_t kGraphFeatureDim = kPositionOffset + kPositionSlots;
static_assert(kGraphFeatureDim == 256);

struct GraphFeatureVector {
  std::array<float, kNumRelations> rst_in{};
  std::array<float, kNumRelations> rst_out{};
  float coref_share = 0.0f;
  std::array<float, kPositionSlots> position{};

  std::array<float, kGraphFeatureDim> packed() const;
};

// Incident coreference edges of `edu` over all edges of the document; 0 for
// an edgeless graph.
double coref_share(int edu, const CorefGraph& coref);

GraphFeatureVector encode_edu(int edu, const RstGraph& rst,
                              const CorefGraph* coref = nullptr);

// Row-major num_edus x 256.
struct FeatureMatrix {
  std::size_t num_edus = 0;
  std::vector<float> data;

  std::span<const float> row(std::size_t i) const {
    return {data.data() + i * kGraphFeatureDim, kGraphFeatureDim};
  }
  friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;
};

FeatureMatrix encode_document(const RstGraph& rst,
                              const CorefGraph* coref = nullptr);

// Flat binary block: magic "DGFV", u32 version, u32 num_edus, u32 dim, then
// num_edus * dim little-endian float32 values, row-major.
std::string serialize_features_binary(const FeatureMatrix& m);
FeatureMatrix parse_features_binary(std::string_view bytes);

// {"version", "doc_id", "num_edus", "dim", "rows": [[...], ...]}
std::string serialize_features_jsonl(const std::string& doc_id,
                                     const FeatureMatrix& m);
std::pair<std::string, FeatureMatrix> parse_features_jsonl(
    std::string_view line);

}  // namespace disco
