#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "disco/nn/autograd.hpp"

namespace disco::nn {

struct GradCheckOptions {
  double epsilon = 1e-5;     // central-difference step, in (0, 1e-2]
  double tolerance = 1e-4;   // pass threshold on max relative error
  // Relative error is |analytic - numeric| / max(|analytic|, |numeric|, floor).
  double denominator_floor = 1e-4;
  // 0 checks every coordinate; otherwise a seeded random subset per input.
  std::size_t max_coords_per_input = 0;
  std::uint64_t seed = 0;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::size_t coords_checked = 0;
  std::size_t worst_input = 0;
  Eigen::Index worst_index = 0;
  // Smallest distance of any activation input from a kink during the
  // unperturbed forward pass; probes are only meaningful if this exceeds
  // the step size.
  double kink_margin = 0.0;
  bool passed = false;
};

// Compares reverse-mode gradients of a scalar-valued closure against central
// finite differences over the given inputs. The closure must rebuild its
// graph from the inputs' current values on every call.
GradCheckReport grad_check(const std::function<Var()>& loss,
                           const std::vector<Var>& inputs,
                           const GradCheckOptions& options = {});

}  // namespace disco::nn
