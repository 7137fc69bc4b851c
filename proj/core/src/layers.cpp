// Copyright 2026 The kggan Authors
// SPDX-License-Identifier: Apache-2.0

#include "kggan/layers.hpp"

#include <cmath>

#include "kggan/hash.hpp"

namespace kggan {

Tensor glorot_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor w({fan_in, fan_out});
  for (double& x : w.storage()) x = rng.uniform(-limit, limit);
  return w;
}

DenseLayer::DenseLayer(std::size_t in, std::size_t out, Rng& rng)
    : weight(glorot_uniform(in, out, rng)), bias(Shape{out}, 0.0) {
  weight.set_requires_grad(true);
  bias.set_requires_grad(true);
}

Var DenseLayer::apply(Tape& tape, Var x, bool track) {
  if (track) return tape.affine(x, tape.parameter(weight), tape.parameter(bias));
  return tape.affine(x, tape.reference(weight), tape.reference(bias));
}

void ParameterList::set_requires_grad(bool value) {
  for (Tensor* t : tensors) t->set_requires_grad(value);
}

void ParameterList::zero_grad() {
  for (Tensor* t : tensors) t->zero_grad();
}

std::uint64_t ParameterList::content_hash() const {
  Fnv1a64 h;
  for (const Tensor* t : tensors) h.update(t->data());
  return h.digest();
}

}  // namespace kggan
