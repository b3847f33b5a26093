// SPDX-License-Identifier: Apache-2.0
#include "smsl/optimizer.hpp"

#include <cmath>
#include <string>

#include "smsl/error.hpp"

namespace smsl {

std::string_view to_string(OptimizerKind kind) {
  return kind == OptimizerKind::Sgd ? "sgd" : "adamw";
}

OptimizerKind optimizer_from_string(std::string_view name) {
  if (name == "sgd") return OptimizerKind::Sgd;
  if (name == "adamw") return OptimizerKind::AdamW;
  throw Error(ErrorCode::InvalidConfig,
              "unknown optimizer '" + std::string(name) + "'");
}

void Optimizer::step(std::span<Matrix *const> params,
                     std::span<const Matrix *const> grads, double lr) {
  if (params.size() != grads.size()) {
    throw Error(ErrorCode::ShapeMismatch, "one gradient per parameter required");
  }
  if (m_.empty()) {
    for (const Matrix *p : params) {
      m_.emplace_back(p->rows(), p->cols());
      v_.emplace_back(p->rows(), p->cols());
    }
  }
  if (m_.size() != params.size()) {
    throw Error(ErrorCode::ShapeMismatch, "parameter list changed between steps");
  }
  ++t_;

  const double decay = lr * cfg_.weight_decay;
  const double bias1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bias2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));

  for (std::size_t n = 0; n < params.size(); ++n) {
    auto p = params[n]->data();
    auto g = grads[n]->data();
    if (p.size() != g.size() || p.size() != m_[n].size()) {
      throw Error(ErrorCode::ShapeMismatch, "gradient shape differs from parameter");
    }
    if (cfg_.kind == OptimizerKind::Sgd) {
      for (std::size_t i = 0; i < p.size(); ++i) {
        p[i] -= lr * g[i] + decay * p[i];
      }
      continue;
    }
    auto m = m_[n].data();
    auto v = v_[n].data();
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
      const double m_hat = m[i] / bias1;
      const double v_hat = v[i] / bias2;
      // Decoupled decay: applied to the weights, not folded into g.
      p[i] -= lr * m_hat / (std::sqrt(v_hat) + cfg_.epsilon) + decay * p[i];
    }
  }
}

}  // namespace smsl
