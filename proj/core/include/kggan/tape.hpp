// Copyright 2026 The kggan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "kggan/tensor.hpp"

namespace kggan {

/// Handle to a value recorded on a Tape. Only meaningful for the tape that
/// produced it, and only until that tape is cleared.
class Var {
 public:
  Var() = default;
  std::size_t index() const { return index_; }
  bool valid() const { return index_ != kInvalid; }

 private:
  friend class Tape;
  static constexpr std::size_t kInvalid = std::numeric_limits<std::size_t>::max();
  explicit Var(std::size_t index) : index_(index) {}
  std::size_t index_ = kInvalid;
};

/// Reverse-mode computation tape. Operations append nodes in evaluation
/// order, so node i only ever reads nodes < i; backward() walks the list in
/// reverse, visits each node once, and then clears the tape.
///
/// Leaves come in three flavours:
///   parameter(t)  references t; gradients accumulate into t.grad() when
///                 t.requires_grad() is set.
///   reference(t)  references t; never receives gradients.
///   constant(t)   copies t onto the tape; never receives gradients.
/// Referenced tensors must outlive the tape's use of them and must not be
/// modified until backward() or clear().
class Tape {
 public:
  Var parameter(Tensor& tensor);
  Var reference(const Tensor& tensor);
  Var constant(Tensor tensor);

  const Tensor& value(Var v) const;
  bool tracks_gradient(Var v) const { return nodes_.at(v.index()).needs_grad; }
  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }

  // x [batch, in] * w [in, out] + b [out]
  Var affine(Var x, Var w, Var b);
  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var scale(Var a, double factor);
  Var shift(Var a, double offset);
  Var tanh(Var a);
  Var sigmoid(Var a);
  Var relu(Var a);
  Var leaky_relu(Var a, double negative_slope);
  Var sum(Var a);
  Var mean(Var a);
  Var reshape(Var a, Shape shape);
  // [batch, n1] ++ [batch, n2] -> [batch, n1 + n2]
  Var concat_columns(Var a, Var b);
  // per-row inner product: [batch, n] x [batch, n] -> [batch]
  Var row_dot(Var a, Var b);
  // per-row squared Euclidean norm: [batch, n] -> [batch]
  Var row_squared_norm(Var a);
  // max(0, 1 - a), elementwise
  Var hinge(Var a);
  // w / (u^T w v), differentiating through the scale; u, v held constant.
  // A scale at or below 1e-12 passes w through unchanged.
  Var spectral_normalized(Var w, std::span<const double> u, std::span<const double> v);

  /// Back-propagates from a scalar loss (shape [] or [1]) into every bound
  /// parameter that requires grad, then clears the tape.
  void backward(Var loss);

  void clear() { nodes_.clear(); }

 private:
  using BackwardFn = std::function<void(Tape&, std::size_t)>;

  struct Node {
    Tensor owned;
    const Tensor* ref = nullptr;
    Tensor* sink = nullptr;
    std::vector<double> grad;
    bool needs_grad = false;
    BackwardFn backward;
  };

  Var push(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward);
  std::span<double> grad_of(std::size_t index);
  std::span<const double> upstream(std::size_t index) const { return nodes_[index].grad; }
  bool needs(std::size_t index) const { return nodes_[index].needs_grad; }
  const Node& node(Var v) const;

  std::vector<Node> nodes_;
};

}  // namespace kggan
