// Copyright 2026 The kggan Authors
// SPDX-License-Identifier: Apache-2.0

#include "kggan/spectral.hpp"

#include <cmath>

#include "kggan/error.hpp"

namespace kggan {
namespace {

double normalize_in_place(std::vector<double>& x) {
  double norm = 0.0;
  for (double e : x) norm += e * e;
  norm = std::sqrt(norm);
  if (norm > 0.0)
    for (double& e : x) e /= norm;
  return norm;
}

}  // namespace

SpectralState SpectralState::random(std::size_t rows, std::size_t cols, Rng& rng) {
  SpectralState s;
  s.u.resize(rows);
  for (double& e : s.u) e = rng.normal();
  if (normalize_in_place(s.u) == 0.0) s.u[0] = 1.0;
  s.v.assign(cols, 0.0);
  return s;
}

void power_iteration_step(const Tensor& weight, SpectralState& state) {
  require(weight.rank() == 2, ErrorKind::kDimension,
          "power_iteration_step: weight must be 2-D, got " + shape_string(weight.shape()));
  const std::size_t m = weight.dim(0), n = weight.dim(1);
  require(state.u.size() == m, ErrorKind::kDimension,
          "power_iteration_step: u has length " + std::to_string(state.u.size()) + ", weight has " +
              std::to_string(m) + " rows");
  const auto w = weight.data();

  std::vector<double> v(n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) v[j] += w[i * n + j] * state.u[i];
  if (normalize_in_place(v) == 0.0) {
    state.v.assign(n, 0.0);
    state.sigma_estimate = kSigmaFloor;
    state.degenerate = true;
    return;
  }
  std::vector<double> u(m, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) u[i] += w[i * n + j] * v[j];
  // |W v| = u^T W v once u is the normalized W v.
  const double sigma = normalize_in_place(u);
  if (!(sigma > kSigmaFloor)) {
    state.v.assign(n, 0.0);
    state.sigma_estimate = kSigmaFloor;
    state.degenerate = true;
    return;
  }
  state.u = std::move(u);
  state.v = std::move(v);
  state.sigma_estimate = sigma;
  state.degenerate = false;
}

Tensor spectral_normalize(const Tensor& weight, const SpectralState& state) {
  Tensor out = weight;
  out.set_requires_grad(false);
  out.clear_grad();
  if (state.degenerate || !(state.sigma_estimate > kSigmaFloor)) return out;
  for (double& x : out.storage()) x /= state.sigma_estimate;
  return out;
}

}  // namespace kggan
