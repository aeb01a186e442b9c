#pragma once

#include <cstddef>

#include "drnet/dataset.hpp"
#include "drnet/network.hpp"

namespace drnet {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t params_checked = 0;
  std::size_t params_skipped = 0;  // perturbation crossed a ReLU kink
};

/// Compares analytic parameter gradients against central finite differences
/// of the sample loss. Parameters whose ±epsilon perturbation flips a ReLU
/// activation sign are skipped (the difference quotient straddles a kink).
/// Epsilon must lie in [1e-7, 1e-3].
GradCheckResult gradient_check(Network& net, const BinaryPair& sample, double epsilon);

}  // namespace drnet
