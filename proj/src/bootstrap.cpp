#include "disco/bootstrap.hpp"

#include <algorithm>
#include <cmath>

#include "disco/errors.hpp"
#include "disco/random.hpp"

namespace disco {

namespace {

double mean_of(std::span<const double> xs) {
  double sum = 0.0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

}  // namespace

double sorted_quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw Error(ErrorCode::EmptySample, "quantile");
  const double pos = std::clamp(q, 0.0, 1.0) *
                     static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0) return sorted[lo];
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

std::vector<double> bootstrap_replicate_means(std::span<const double> scores,
                                              int replicates,
                                              std::uint64_t seed) {
  if (scores.empty()) throw Error(ErrorCode::EmptySample, "no scores");
  if (replicates < 1) {
    throw Error(ErrorCode::EmptySample,
                "replicates = " + std::to_string(replicates));
  }
  const std::size_t n = scores.size();
  std::vector<double> means(static_cast<std::size_t>(replicates));
  for (int r = 0; r < replicates; ++r) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += scores[rng.below(n)];
    means[static_cast<std::size_t>(r)] = sum / static_cast<double>(n);
  }
  return means;
}

BootstrapResult bootstrap_ci(std::span<const double> per_doc_scores,
                             int replicates, double confidence,
                             std::uint64_t seed) {
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw Error(ErrorCode::InvalidConfig,
                "confidence must lie in (0, 1), got " +
                    std::to_string(confidence));
  }
  std::vector<double> means =
      bootstrap_replicate_means(per_doc_scores, replicates, seed);
  std::sort(means.begin(), means.end());

  BootstrapResult out;
  out.point_estimate = mean_of(per_doc_scores);
  const double alpha = 1.0 - confidence;
  // The percentile interval is widened to the point estimate when a skewed
  // sample would otherwise leave the mean outside it.
  out.lower = std::min(sorted_quantile(means, alpha / 2.0), out.point_estimate);
  out.upper =
      std::max(sorted_quantile(means, 1.0 - alpha / 2.0), out.point_estimate);
  out.full_width = out.upper - out.lower;
  out.margin_of_error = out.full_width / 2.0;
  out.replicates = replicates;
  out.confidence = confidence;
  return out;
}

}  // namespace disco
