// Copyright 2026 The kggan Authors
// SPDX-License-Identifier: Apache-2.0

#include "kggan/optimizer.hpp"

#include <cmath>

#include "kggan/error.hpp"

namespace kggan {

OptimizerState::OptimizerState(AdamConfig cfg, std::span<Tensor* const> params) : config(cfg) {
  require(cfg.learning_rate > 0 && cfg.beta1 >= 0 && cfg.beta1 < 1 && cfg.beta2 > 0 && cfg.beta2 < 1 &&
              cfg.epsilon > 0,
          ErrorKind::kConfig, "optimizer: invalid hyper-parameters");
  for (const Tensor* p : params) {
    first_moment.emplace_back(p->size(), 0.0);
    second_moment.emplace_back(p->size(), 0.0);
  }
}

void optimizer_step(std::span<Tensor* const> params, std::span<const std::string> names,
                    OptimizerState& state) {
  require(params.size() == state.first_moment.size() && params.size() == state.second_moment.size(),
          ErrorKind::kContract, "optimizer_step: parameter count does not match optimizer state");
  for (std::size_t p = 0; p < params.size(); ++p) {
    require(params[p]->size() == state.first_moment[p].size(), ErrorKind::kContract,
            "optimizer_step: parameter size changed");
    for (double g : params[p]->grad()) {
      if (!std::isfinite(g)) {
        const std::string name = p < names.size() ? names[p] : "#" + std::to_string(p);
        fail(ErrorKind::kNumerical, "optimizer_step: non-finite gradient in parameter '" + name + "'");
      }
    }
  }

  const AdamConfig& c = state.config;
  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const double correction1 = 1.0 - std::pow(c.beta1, t);
  const double correction2 = 1.0 - std::pow(c.beta2, t);

  for (std::size_t p = 0; p < params.size(); ++p) {
    Tensor& param = *params[p];
    const bool has_grad = param.has_grad();
    auto g = param.grad();
    auto& m = state.first_moment[p];
    auto& v = state.second_moment[p];
    auto w = param.data();
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double gi = has_grad ? g[i] : 0.0;
      m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * gi;
      v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * gi * gi;
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      w[i] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
    }
  }
}

}  // namespace kggan
