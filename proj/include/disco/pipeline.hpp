#pragma once

// Pipeline stages behind the command-line tool. Each stage reads the files
// written by the previous one from --input and writes its own into --output
// (the two may be the same directory). Records are ordered by doc_id.
//
//   parse         *.merge, *.bracket, summaries.jsonl, coref.jsonl
//                   -> documents.jsonl, trees.jsonl
//   graph         trees.jsonl -> graphs.jsonl
//   oracle-label  documents.jsonl, graphs.jsonl -> labels.jsonl, oracle_stats.json
//   features      graphs.jsonl -> features.jsonl
//   train         documents.jsonl, graphs.jsonl, labels.jsonl
//                   -> checkpoint/, metrics.csv
//   extract       documents.jsonl, graphs.jsonl, checkpoint/ -> extractions.jsonl
//   evaluate      extractions.jsonl -> evaluation.json
//   stats         documents.jsonl, graphs.jsonl -> stats.json

#include <cstdint>
#include <optional>
#include <string>

namespace disco {

enum ExitCode : int {
  kExitOk = 0,
  kExitIo = 2,
  kExitVersion = 3,
  kExitValidation = 4,
};

struct PipelineOptions {
  std::string input;
  std::string output;
  std::string config;      // TOML train config
  std::string checkpoint;  // extract: defaults to <input>/checkpoint
  std::optional<std::uint64_t> seed;
  int budget = 5;
  std::string metric = "mean-r1r2";
  std::optional<int> top_k;
  double threshold = 0.5;
  int replicates = 1000;
  double confidence = 0.95;
};

int cmd_parse(const PipelineOptions& o);
int cmd_graph(const PipelineOptions& o);
int cmd_oracle(const PipelineOptions& o);
int cmd_features(const PipelineOptions& o);
int cmd_train(const PipelineOptions& o);
int cmd_extract(const PipelineOptions& o);
int cmd_evaluate(const PipelineOptions& o);
int cmd_stats(const PipelineOptions& o);

// Runs a stage by name, mapping library errors to exit codes and logging
// them to stderr. Unknown names give kExitValidation.
int run_stage(const std::string& name, const PipelineOptions& o);

// Reads DISCO_LOG (trace|debug|info|warn|error|off) and routes all logging
// to stderr.
void configure_logging();

}  // namespace disco
