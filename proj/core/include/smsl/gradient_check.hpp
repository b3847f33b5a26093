// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>

#include "smsl/core.hpp"
#include "smsl/losses.hpp"

namespace smsl {

struct GradientCheckReport {
  double max_relative_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;
};

/// Compares the analytic embedding gradient of `loss` (through normalization
/// and S = V * T^T) against central differences on every coordinate of the
/// bundle's raw video and text features.
///
/// A coordinate is skipped when the base or either perturbed evaluation has a
/// hinge argument within 10 * step of its kink. The relative error of a
/// coordinate is |analytic - numeric| / max(|analytic|, |numeric|, 1e-3).
/// Requires step in [1e-8, 1e-4].
GradientCheckReport finite_difference_check(const LossFunction &loss,
                                            const DatasetBundle &bundle,
                                            const LossConfig &cfg, double step);

}  // namespace smsl
