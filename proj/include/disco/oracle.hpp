#pragma once

// Oracle importance labels: greedy ROUGE-maximizing EDU selection, plus an
// exhaustive search used to verify it on small instances.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "disco/corpus_formats.hpp"
#include "disco/discourse_graphs.hpp"
#include "disco/rouge.hpp"

namespace disco {

enum class OracleMetric { Rouge1, Rouge2, RougeL, MeanR1R2 };

OracleMetric parse_oracle_metric(std::string_view name);  // r1|r2|rl|mean-r1r2
std::string_view oracle_metric_name(OracleMetric m);

// F1-based score of `candidate` against `reference` under `metric`.
double oracle_score(const Tokens& candidate, const Tokens& reference,
                    OracleMetric metric);

struct OracleLabels {
  std::vector<int> labels;          // one 0/1 per EDU
  std::vector<int> selected_order;  // pick order (greedy) or ascending (exhaustive)
  double final_score = 0.0;

  friend bool operator==(const OracleLabels&, const OracleLabels&) = default;
};

// Selected EDUs concatenated in document order.
Tokens concat_selection(const std::vector<Tokens>& edus,
                        const std::vector<int>& selected);

// Repeatedly adds the EDU with the largest strictly positive gain (smallest
// index on ties) until `budget` EDUs are chosen or nothing improves.
OracleLabels greedy_select(const std::vector<Tokens>& edus,
                           const Tokens& reference, int budget,
                           OracleMetric metric = OracleMetric::MeanR1R2);

inline constexpr std::size_t kMaxExhaustiveEdus = 15;
inline constexpr int kMaxExhaustiveBudget = 5;

// Best subset of size <= budget; ties go to the lexicographically smallest
// ascending index list (the empty set wins a tie at score 0).
OracleLabels brute_force_select(const std::vector<Tokens>& edus,
                                const Tokens& reference, int budget,
                                OracleMetric metric = OracleMetric::MeanR1R2);

struct CorpusStats {
  std::size_t total_records = 0;
  double avg_edus = 0.0;
  double avg_summary_words = 0.0;
  std::size_t empty_rst_graph = 0;
  std::size_t empty_oracle_labels = 0;
  std::size_t empty_both = 0;
  std::size_t missing_reference = 0;

  friend bool operator==(const CorpusStats&, const CorpusStats&) = default;
};

struct LabelInput {
  const Document* doc = nullptr;
  const RstGraph* rst = nullptr;  // null counts as an empty RST graph
};

struct LabeledDocument {
  std::string doc_id;
  OracleLabels labels;
};

struct CorpusLabels {
  std::vector<LabeledDocument> documents;
  CorpusStats stats;
};

// Documents without a reference summary are skipped and counted in
// stats.missing_reference; every other statistic covers labeled documents.
CorpusLabels label_corpus(const std::vector<LabelInput>& docs, int budget,
                          OracleMetric metric = OracleMetric::MeanR1R2);

}  // namespace disco
