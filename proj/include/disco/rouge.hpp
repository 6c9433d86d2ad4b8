#pragma once

// ROUGE-N / ROUGE-L, selection precision/recall/F1 and novel n-gram
// proportions. All token comparisons are on lowercased tokens; punctuation
// tokens count like words; no stemming or stopword removal.

#include <map>
#include <string>
#include <vector>

namespace disco {

using Tokens = std::vector<std::string>;
using Ngram = std::vector<std::string>;
using NgramCounts = std::map<Ngram, std::size_t>;

struct RougeScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  friend bool operator==(const RougeScore&, const RougeScore&) = default;
};

// Harmonic mean with the 0/0 -> 0 convention.
double f1_score(double precision, double recall);
RougeScore make_score(double precision, double recall);

// Multiset of n-grams; tokens are used verbatim (no case folding).
NgramCounts ngrams(const Tokens& tokens, int n);
std::size_t total_count(const NgramCounts& counts);

RougeScore rouge_n(const Tokens& candidate, const Tokens& reference, int n);

std::size_t lcs_length(const Tokens& a, const Tokens& b);
RougeScore rouge_l(const Tokens& candidate, const Tokens& reference);

struct SelectionScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t true_positives = 0;
  std::size_t predicted_positives = 0;
  std::size_t actual_positives = 0;
};

SelectionScore selection_prf(const std::vector<int>& predicted,
                             const std::vector<int>& oracle);

// Fraction of the summary's distinct n-grams that never occur in the source.
// Returns 0 when the summary has no n-grams.
double novel_ngram_proportion(const Tokens& summary, const Tokens& source,
                              int n);

}  // namespace disco
