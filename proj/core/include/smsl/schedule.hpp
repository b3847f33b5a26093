// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>

namespace smsl {

/// Linear warmup from 0 to lr over warmup_steps, then cosine decay from lr to
/// lr_end at total_steps. Throws InvalidSchedule unless
/// warmup_steps < total_steps, step <= total_steps and 0 <= lr_end <= lr.
double cosine_schedule(std::size_t step, std::size_t total_steps,
                       std::size_t warmup_steps, double lr, double lr_end);

}  // namespace smsl
