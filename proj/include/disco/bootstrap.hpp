#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace disco {

struct BootstrapResult {
  double point_estimate = 0.0;  // sample mean
  double lower = 0.0;
  double upper = 0.0;
  double margin_of_error = 0.0;  // (upper - lower) / 2
  double full_width = 0.0;       // upper - lower
  int replicates = 0;
  double confidence = 0.0;

  friend bool operator==(const BootstrapResult&,
                         const BootstrapResult&) = default;
};

// Percentile bootstrap of the mean over per-document scores. Replicate r
// draws from its own RNG stream derived from (seed, r), so the result does
// not depend on evaluation order.
BootstrapResult bootstrap_ci(std::span<const double> per_doc_scores,
                             int replicates = 1000, double confidence = 0.95,
                             std::uint64_t seed = 0);

// The replicate means (unsorted, in replicate order).
std::vector<double> bootstrap_replicate_means(std::span<const double> scores,
                                              int replicates,
                                              std::uint64_t seed);

// Linear-interpolated quantile of an ascending-sorted sample.
double sorted_quantile(std::span<const double> sorted, double q);

}  // namespace disco
