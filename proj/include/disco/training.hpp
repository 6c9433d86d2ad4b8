#pragma once

// Two-phase fine-tuning: the encoder stand-in is frozen while the rest of the
// network trains, then everything is trained for the remaining epochs.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "disco/discourse_graphs.hpp"
#include "disco/embedding.hpp"
#include "disco/model.hpp"
#include "disco/oracle.hpp"
#include "disco/rouge.hpp"

namespace disco {

struct LrSchedule {
  enum class Kind { Constant, Linear, Step, Exponential };
  Kind kind = Kind::Linear;
  double initial = 1e-3;
  int total_steps = 1000;  // Linear: lr reaches 0 at this step
  int step_size = 100;     // Step: decay interval
  double gamma = 0.5;      // Step / Exponential decay factor

  friend bool operator==(const LrSchedule&, const LrSchedule&) = default;
};

LrSchedule::Kind parse_schedule_kind(std::string_view s);
std::string_view schedule_kind_name(LrSchedule::Kind k);

// Non-increasing in step; equals `initial` at step 0.
double lr_at_step(const LrSchedule& schedule, int step);

enum class OptimizerKind { SgdMomentum, Adam };

struct TrainConfig {
  int epochs_frozen = 4;
  int epochs_full = 4;
  LrSchedule lr;
  // Stretch a Linear schedule over the whole run instead of lr.total_steps.
  bool schedule_spans_run = true;
  OptimizerKind optimizer = OptimizerKind::SgdMomentum;
  double momentum = 0.9;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double pos_weight = 9.0;
  int batch_size = 1;           // documents per optimizer step
  double threshold = 0.5;       // selection threshold for P/R/F1
  double validation_fraction = 0.1;
  bool stop_at_perfect_validation = false;
  int budget = 5;
  OracleMetric metric = OracleMetric::MeanR1R2;
  std::uint64_t seed = 0;
  ModelConfig model;
  EmbeddingConfig embedding;
};

// Reads a TOML config; absent keys keep their defaults.
TrainConfig load_train_config(const std::string& path);
TrainConfig parse_train_config(std::string_view toml_text);

struct TrainingExample {
  std::string doc_id;
  std::vector<Tokens> edus;
  RstGraph rst;
  std::optional<CorefGraph> coref;
  std::vector<int> labels;
};

struct EpochMetrics {
  int epoch = 0;  // 1-based over both phases
  std::string split;  // "train" or "validation"
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double loss = 0.0;

  friend bool operator==(const EpochMetrics&, const EpochMetrics&) = default;
};

struct TrainResult {
  ExtractorModel model;
  std::vector<EpochMetrics> history;
  std::vector<std::string> train_ids;
  std::vector<std::string> validation_ids;
  // First epoch with validation F1 == 1, if any.
  std::optional<int> perfect_validation_epoch;
};

// Validation documents: mixed stable hash of doc_id falls in the lowest
// `fraction` of the hash range. When that selects nothing (or everything)
// from a corpus of >= 2 documents, the single lowest-hash document is used.
std::vector<bool> validation_split(const std::vector<std::string>& doc_ids,
                                   double fraction);

TrainResult train(const std::vector<TrainingExample>& corpus,
                  const TrainConfig& config, const EmbeddingProvider& provider);

// Metrics of a model over a set of examples at a given threshold.
EpochMetrics evaluate_selection(const ExtractorModel& model,
                                const std::vector<TrainingExample>& examples,
                                const EmbeddingProvider& provider,
                                double threshold, double pos_weight);

struct Selection {
  std::optional<int> top_k;
  double threshold = 0.5;  // used when top_k is absent; keeps p > threshold
};

struct Extraction {
  std::vector<int> selected;  // ascending document order
  std::vector<double> probabilities;
  std::string text;  // selected EDUs joined in document order
};

Extraction predict_and_extract(const ExtractorModel& model,
                               const EmbeddingProvider& provider,
                               const std::string& doc_id,
                               const std::vector<Tokens>& edus,
                               const RstGraph* rst, const CorefGraph* coref,
                               const Selection& selection);

}  // namespace disco
