#include "disco/nn/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "disco/errors.hpp"
#include "disco/random.hpp"

namespace disco::nn {

GradCheckReport grad_check(const std::function<Var()>& loss,
                           const std::vector<Var>& inputs,
                           const GradCheckOptions& options) {
  if (!(options.epsilon > 0.0 && options.epsilon <= 1e-2)) {
    throw Error(ErrorCode::InvalidConfig, "epsilon must lie in (0, 1e-2]");
  }
  std::vector<Var> probes = inputs;
  for (auto& v : probes) {
    v.set_requires_grad(true);
    v.zero_grad();
  }
  reset_kink_monitor();
  const Var root = loss();
  GradCheckReport report;
  report.kink_margin = kink_margin();
  if (root.rows() != 1 || root.cols() != 1) {
    throw Error(ErrorCode::ShapeMismatch, "grad_check needs a scalar loss");
  }
  backward(root);

  Rng rng(options.seed);
  for (std::size_t k = 0; k < probes.size(); ++k) {
    Var& v = probes[k];
    const Matrix analytic = v.grad();
    const Eigen::Index size = v.value().size();
    std::vector<Eigen::Index> coords(static_cast<std::size_t>(size));
    std::iota(coords.begin(), coords.end(), Eigen::Index{0});
    if (options.max_coords_per_input > 0 &&
        coords.size() > options.max_coords_per_input) {
      // Partial Fisher-Yates for a seeded subset.
      for (std::size_t i = 0; i < options.max_coords_per_input; ++i) {
        const std::size_t j = i + rng.below(coords.size() - i);
        std::swap(coords[i], coords[j]);
      }
      coords.resize(options.max_coords_per_input);
    }
    for (Eigen::Index c : coords) {
      double& x = v.mutable_value().data()[c];
      const double saved = x;
      x = saved + options.epsilon;
      const double up = loss().scalar();
      x = saved - options.epsilon;
      const double down = loss().scalar();
      x = saved;
      const double numeric = (up - down) / (2.0 * options.epsilon);
      const double a = analytic.data()[c];
      if (!std::isfinite(numeric) || !std::isfinite(a)) {
        throw Error(ErrorCode::NonFiniteGradient,
                    "input " + std::to_string(k) + " coordinate " +
                        std::to_string(c));
      }
      const double abs_err = std::abs(a - numeric);
      const double rel_err =
          abs_err / std::max({std::abs(a), std::abs(numeric),
                              options.denominator_floor});
      report.max_abs_error = std::max(report.max_abs_error, abs_err);
      if (rel_err > report.max_rel_error || report.coords_checked == 0) {
        report.max_rel_error = std::max(report.max_rel_error, rel_err);
        report.worst_input = k;
        report.worst_index = c;
      }
      ++report.coords_checked;
    }
  }
  report.passed = report.max_rel_error < options.tolerance;
  return report;
}

}  // namespace disco::nn
