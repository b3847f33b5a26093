// SPDX-License-Identifier: Apache-2.0
#include "smsl/schedule.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "smsl/error.hpp"

namespace smsl {

double cosine_schedule(std::size_t step, std::size_t total_steps,
                       std::size_t warmup_steps, double lr, double lr_end) {
  if (warmup_steps >= total_steps) {
    throw Error(ErrorCode::InvalidSchedule,
                "warmup " + std::to_string(warmup_steps) +
                    " must be shorter than total " + std::to_string(total_steps));
  }
  if (step > total_steps) {
    throw Error(ErrorCode::InvalidSchedule,
                "step " + std::to_string(step) + " beyond total " +
                    std::to_string(total_steps));
  }
  if (!(lr_end >= 0.0 && lr_end <= lr)) {
    throw Error(ErrorCode::InvalidSchedule, "need 0 <= lr_end <= lr");
  }
  if (step < warmup_steps) {
    return lr * static_cast<double>(step) / static_cast<double>(warmup_steps);
  }
  if (step == total_steps) return lr_end;
  const double progress = static_cast<double>(step - warmup_steps) /
                          static_cast<double>(total_steps - warmup_steps);
  return lr_end +
         0.5 * (lr - lr_end) * (1.0 + std::cos(std::numbers::pi * progress));
}

}  // namespace smsl
