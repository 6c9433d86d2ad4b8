#include "disco/oracle.hpp"

#include <algorithm>

#include "disco/errors.hpp"
#include "disco/text.hpp"

namespace disco {

OracleMetric parse_oracle_metric(std::string_view name) {
  if (name == "r1") return OracleMetric::Rouge1;
  if (name == "r2") return OracleMetric::Rouge2;
  if (name == "rl") return OracleMetric::RougeL;
  if (name == "mean-r1r2") return OracleMetric::MeanR1R2;
  throw Error(ErrorCode::InvalidConfig,
              "unknown oracle metric '" + std::string(name) + "'");
}

std::string_view oracle_metric_name(OracleMetric m) {
  switch (m) {
    case OracleMetric::Rouge1: return "r1";
    case OracleMetric::Rouge2: return "r2";
    case OracleMetric::RougeL: return "rl";
    case OracleMetric::MeanR1R2: return "mean-r1r2";
  }
  return "mean-r1r2";
}

double oracle_score(const Tokens& candidate, const Tokens& reference,
                    OracleMetric metric) {
  switch (metric) {
    case OracleMetric::Rouge1: return rouge_n(candidate, reference, 1).f1;
    case OracleMetric::Rouge2: return rouge_n(candidate, reference, 2).f1;
    case OracleMetric::RougeL: return rouge_l(candidate, reference).f1;
    case OracleMetric::MeanR1R2:
      return 0.5 * (rouge_n(candidate, reference, 1).f1 +
                    rouge_n(candidate, reference, 2).f1);
  }
  return 0.0;
}

Tokens concat_selection(const std::vector<Tokens>& edus,
                        const std::vector<int>& selected) {
  std::vector<int> order = selected;
  std::sort(order.begin(), order.end());
  Tokens out;
  for (int e : order) {
    const auto& toks = edus.at(static_cast<std::size_t>(e));
    out.insert(out.end(), toks.begin(), toks.end());
  }
  return out;
}

namespace {

void check_reference(const Tokens& reference) {
  if (reference.empty()) {
    throw Error(ErrorCode::EmptyReference, "reference summary has no tokens");
  }
}

OracleLabels finish(std::size_t num_edus, std::vector<int> selected,
                    double score) {
  OracleLabels out;
  out.labels.assign(num_edus, 0);
  for (int e : selected) out.labels[static_cast<std::size_t>(e)] = 1;
  out.selected_order = std::move(selected);
  out.final_score = score;
  return out;
}

}  // namespace

OracleLabels greedy_select(const std::vector<Tokens>& edus,
                           const Tokens& reference, int budget,
                           OracleMetric metric) {
  check_reference(reference);
  std::vector<int> selected;
  std::vector<bool> taken(edus.size(), false);
  double current = 0.0;
  while (static_cast<int>(selected.size()) < budget) {
    int best = -1;
    double best_score = current;
    for (std::size_t e = 0; e < edus.size(); ++e) {
      if (taken[e]) continue;
      std::vector<int> trial = selected;
      trial.push_back(static_cast<int>(e));
      const double s =
          oracle_score(concat_selection(edus, trial), reference, metric);
      if (s > best_score) {
        best_score = s;
        best = static_cast<int>(e);
      }
    }
    if (best < 0) break;
    taken[static_cast<std::size_t>(best)] = true;
    selected.push_back(best);
    current = best_score;
  }
  return finish(edus.size(), std::move(selected), current);
}

OracleLabels brute_force_select(const std::vector<Tokens>& edus,
                                const Tokens& reference, int budget,
                                OracleMetric metric) {
  check_reference(reference);
  if (edus.size() > kMaxExhaustiveEdus || budget > kMaxExhaustiveBudget) {
    throw Error(ErrorCode::TooLargeForExhaustive,
                std::to_string(edus.size()) + " EDUs, budget " +
                    std::to_string(budget));
  }
  const int n = static_cast<int>(edus.size());
  const int k_max = std::clamp(budget, 0, n);
  std::vector<int> best;
  double best_score = 0.0;

  // Enumerate ascending index lists of every size up to k_max.
  std::vector<int> current;
  auto visit = [&](auto&& self, int start) -> void {
    if (!current.empty()) {
      const double s =
          oracle_score(concat_selection(edus, current), reference, metric);
      if (s > best_score || (s == best_score && current < best)) {
        best_score = s;
        best = current;
      }
    }
    if (static_cast<int>(current.size()) == k_max) return;
    for (int e = start; e < n; ++e) {
      current.push_back(e);
      self(self, e + 1);
      current.pop_back();
    }
  };
  visit(visit, 0);
  return finish(edus.size(), std::move(best), best_score);
}

CorpusLabels label_corpus(const std::vector<LabelInput>& docs, int budget,
                          OracleMetric metric) {
  CorpusLabels out;
  double edu_sum = 0.0;
  double word_sum = 0.0;
  for (const auto& input : docs) {
    const Document& doc = *input.doc;
    const auto& summary = doc.reference_summary();
    const Tokens reference = summary ? tokenize(*summary) : Tokens{};
    if (reference.empty()) {
      ++out.stats.missing_reference;
      continue;
    }
    OracleLabels labels =
        greedy_select(doc.all_edu_tokens(), reference, budget, metric);
    const bool empty_labels = labels.selected_order.empty();
    const bool empty_rst = input.rst == nullptr || input.rst->empty();
    out.stats.empty_oracle_labels += empty_labels;
    out.stats.empty_rst_graph += empty_rst;
    out.stats.empty_both += empty_labels && empty_rst;
    ++out.stats.total_records;
    edu_sum += static_cast<double>(doc.num_edus());
    word_sum += static_cast<double>(count_words(*summary));
    out.documents.push_back({doc.doc_id(), std::move(labels)});
  }
  if (out.stats.total_records > 0) {
    const auto n = static_cast<double>(out.stats.total_records);
    out.stats.avg_edus = edu_sum / n;
    out.stats.avg_summary_words = word_sum / n;
  }
  return out;
}

}  // namespace disco
