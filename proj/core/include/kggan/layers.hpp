// Copyright 2026 The kggan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "kggan/rng.hpp"
#include "kggan/tape.hpp"
#include "kggan/tensor.hpp"

namespace kggan {

inline constexpr double kLeakySlope = 0.2;

/// Uniform Glorot initialization in +-sqrt(6 / (fan_in + fan_out)).
Tensor glorot_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng);

struct DenseLayer {
  Tensor weight;  // [in, out]
  Tensor bias;    // [out]

  DenseLayer() = default;
  DenseLayer(std::size_t in, std::size_t out, Rng& rng);

  std::size_t in_dim() const { return weight.dim(0); }
  std::size_t out_dim() const { return weight.dim(1); }

  /// Affine map with parameters bound as tracked parameters (or as plain
  /// references when track is false).
  Var apply(Tape& tape, Var x, bool track = true);
};

/// Named, ordered view over parameter tensors, used by the optimizer,
/// hashing, and checkpoints.
struct ParameterList {
  std::vector<std::string> names;
  std::vector<Tensor*> tensors;

  void add(std::string name, Tensor& t) {
    names.push_back(std::move(name));
    tensors.push_back(&t);
  }
  void set_requires_grad(bool value);
  void zero_grad();
  std::uint64_t content_hash() const;
};

}  // namespace kggan
