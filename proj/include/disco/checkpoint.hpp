#pragma once

// Parameter checkpoints: a flat little-endian float64 blob plus a JSON
// manifest listing every parameter's name, shape and byte offset.

#include <string>

#include "disco/embedding.hpp"
#include "disco/model.hpp"

namespace disco {

inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr const char* kParamsFile = "params.bin";

struct Checkpoint {
  ExtractorModel model;
  EmbeddingConfig embedding;
};

std::string model_config_json(const ModelConfig& config);
ModelConfig parse_model_config_json(const std::string& json_text);

// Writes <dir>/manifest.json and <dir>/params.bin, creating dir if needed.
void save_checkpoint(const std::string& dir, const ExtractorModel& model,
                     const EmbeddingConfig& embedding);
Checkpoint load_checkpoint(const std::string& dir);

}  // namespace disco
