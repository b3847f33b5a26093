// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "smsl/matrix.hpp"

namespace smsl {

enum class OptimizerKind { Sgd, AdamW };

std::string_view to_string(OptimizerKind kind);
OptimizerKind optimizer_from_string(std::string_view name);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::AdamW;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.01;

  friend bool operator==(const OptimizerConfig &,
                         const OptimizerConfig &) = default;
};

/// Plain SGD or AdamW with decoupled weight decay, over a fixed list of
/// parameter matrices. State is sized on the first step.
class Optimizer {
 public:
  explicit Optimizer(OptimizerConfig cfg) : cfg_(cfg) {}

  /// `params[i]` is updated in place from `grads[i]`.
  void step(std::span<Matrix *const> params, std::span<const Matrix *const> grads,
            double lr);

  std::size_t steps_taken() const noexcept { return t_; }

 private:
  OptimizerConfig cfg_;
  std::size_t t_ = 0;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
};

}  // namespace smsl
