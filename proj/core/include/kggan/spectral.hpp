// Copyright 2026 The kggan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "kggan/rng.hpp"
#include "kggan/tensor.hpp"

namespace kggan {

inline constexpr double kSigmaFloor = 1e-12;

/// Persistent power-iteration state for one weight matrix [m, n].
/// u has length m, v (the induced right vector) length n.
struct SpectralState {
  std::vector<double> u;
  std::vector<double> v;
  double sigma_estimate = 1.0;
  bool degenerate = false;

  /// Random unit u for a weight with `rows` rows and `cols` columns.
  static SpectralState random(std::size_t rows, std::size_t cols, Rng& rng);
};

/// One power-iteration step: v <- normalize(W^T u), u <- normalize(W v),
/// sigma <- u^T W v. A zero matrix leaves u as is and floors sigma at 1e-12
/// with the degenerate flag set.
void power_iteration_step(const Tensor& weight, SpectralState& state);

/// weight / sigma_estimate; the weight itself is not modified. A degenerate
/// state returns the weight unchanged.
Tensor spectral_normalize(const Tensor& weight, const SpectralState& state);

}  // namespace kggan
