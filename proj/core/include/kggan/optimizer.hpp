// Copyright 2026 The kggan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "kggan/tensor.hpp"

namespace kggan {

struct AdamConfig {
  double learning_rate = 2e-4;
  double beta1 = 0.0;
  double beta2 = 0.9;
  double epsilon = 1e-8;
};

/// Bias-corrected adaptive-moment state for a fixed list of parameters.
struct OptimizerState {
  AdamConfig config;
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;
  std::uint64_t step_count = 0;

  OptimizerState() = default;
  OptimizerState(AdamConfig cfg, std::span<Tensor* const> params);
};

/// Applies one update from each parameter's grad() (a missing grad counts as
/// zero) and increments step_count. A non-finite gradient throws a numerical
/// error naming the parameter before anything is modified.
void optimizer_step(std::span<Tensor* const> params, std::span<const std::string> names,
                    OptimizerState& state);

}  // namespace kggan
