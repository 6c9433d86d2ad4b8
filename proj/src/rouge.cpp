#include "disco/rouge.hpp"

#include <algorithm>
#include <set>

#include "disco/errors.hpp"
#include "disco/text.hpp"

namespace disco {

double f1_score(double precision, double recall) {
  const double denom = precision + recall;
  return denom > 0.0 ? 2.0 * precision * recall / denom : 0.0;
}

RougeScore make_score(double precision, double recall) {
  return {precision, recall, f1_score(precision, recall)};
}

NgramCounts ngrams(const Tokens& tokens, int n) {
  if (n < 1) {
    throw Error(ErrorCode::InvalidN, "n = " + std::to_string(n));
  }
  NgramCounts counts;
  const std::size_t len = static_cast<std::size_t>(n);
  for (std::size_t i = 0; i + len <= tokens.size(); ++i) {
    ++counts[Ngram(tokens.begin() + i, tokens.begin() + i + len)];
  }
  return counts;
}

std::size_t total_count(const NgramCounts& counts) {
  std::size_t total = 0;
  for (const auto& [gram, c] : counts) total += c;
  return total;
}

RougeScore rouge_n(const Tokens& candidate, const Tokens& reference, int n) {
  const NgramCounts cand = ngrams(to_lower(candidate), n);
  const NgramCounts ref = ngrams(to_lower(reference), n);
  std::size_t overlap = 0;
  for (const auto& [gram, c] : cand) {
    if (auto it = ref.find(gram); it != ref.end()) {
      overlap += std::min(c, it->second);
    }
  }
  const std::size_t cand_total = total_count(cand);
  const std::size_t ref_total = total_count(ref);
  const double p = cand_total ? static_cast<double>(overlap) / cand_total : 0.0;
  const double r = ref_total ? static_cast<double>(overlap) / ref_total : 0.0;
  return make_score(p, r);
}

std::size_t lcs_length(const Tokens& a, const Tokens& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0);
  std::vector<std::size_t> cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1
                                     : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

RougeScore rouge_l(const Tokens& candidate, const Tokens& reference) {
  if (candidate.empty() || reference.empty()) return {};
  const double lcs = static_cast<double>(
      lcs_length(to_lower(candidate), to_lower(reference)));
  return make_score(lcs / static_cast<double>(candidate.size()),
                    lcs / static_cast<double>(reference.size()));
}

SelectionScore selection_prf(const std::vector<int>& predicted,
                             const std::vector<int>& oracle) {
  if (predicted.size() != oracle.size()) {
    throw Error(ErrorCode::LengthMismatch,
                std::to_string(predicted.size()) + " predictions vs " +
                    std::to_string(oracle.size()) + " oracle labels");
  }
  SelectionScore s;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const bool p = predicted[i] != 0;
    const bool o = oracle[i] != 0;
    s.true_positives += p && o;
    s.predicted_positives += p;
    s.actual_positives += o;
  }
  s.precision = s.predicted_positives
                    ? static_cast<double>(s.true_positives) /
                          static_cast<double>(s.predicted_positives)
                    : 0.0;
  s.recall = s.actual_positives ? static_cast<double>(s.true_positives) /
                                      static_cast<double>(s.actual_positives)
                                : 0.0;
  s.f1 = f1_score(s.precision, s.recall);
  return s;
}

double novel_ngram_proportion(const Tokens& summary, const Tokens& source,
                              int n) {
  const NgramCounts summary_grams = ngrams(to_lower(summary), n);
  if (summary_grams.empty()) return 0.0;
  const NgramCounts source_grams = ngrams(to_lower(source), n);
  std::size_t novel = 0;
  for (const auto& [gram, c] : summary_grams) {
    novel += !source_grams.contains(gram);
  }
  return static_cast<double>(novel) /
         static_cast<double>(summary_grams.size());
}

}  // namespace disco
