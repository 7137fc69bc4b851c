// Copyright 2026 The kggan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace kggan {

using Shape = std::vector<std::size_t>;

std::size_t element_count(const Shape& shape);
std::string shape_string(const Shape& shape);

/// Dense row-major array of doubles. A tensor with requires_grad set
/// accumulates gradients in grad() when it is bound to a Tape as a parameter.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  /// Builds a 2-D tensor from nested rows, e.g. Tensor::matrix({{1, 2}, {3, 4}}).
  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);
  static Tensor vector(std::initializer_list<double> values);
  static Tensor vector(std::vector<double> values);
  static Tensor scalar(double value);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const { return data_.size(); }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  std::vector<double>& storage() { return data_; }
  const std::vector<double>& storage() const { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& at(std::size_t row, std::size_t col) { return data_[row * shape_[1] + col]; }
  double at(std::size_t row, std::size_t col) const { return data_[row * shape_[1] + col]; }

  /// Same data, new shape; element counts must agree.
  Tensor reshaped(Shape shape) const;

  bool requires_grad() const { return requires_grad_; }
  void set_requires_grad(bool value) { requires_grad_ = value; }

  bool has_grad() const { return grad_.has_value(); }
  std::span<const double> grad() const;
  std::span<double> mutable_grad();  // allocates zeros on first use
  void zero_grad();
  void clear_grad() { grad_.reset(); }

  bool all_finite() const;

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  Shape shape_;
  std::vector<double> data_;
  bool requires_grad_ = false;
  std::optional<std::vector<double>> grad_;
};

/// Dense matrix product out[b, j] = sum_i a[b, i] * w[i, j], accumulating
/// into out when accumulate is set. Raw kernel shared by the tape ops.
void matmul_kernel(std::span<const double> a, std::span<const double> w, std::span<double> out,
                   std::size_t rows, std::size_t inner, std::size_t cols, bool accumulate);

/// out[b, i] (+)= sum_j g[b, j] * w[i, j]   (g times w-transpose)
void matmul_transposed_rhs_kernel(std::span<const double> g, std::span<const double> w,
                                  std::span<double> out, std::size_t rows, std::size_t inner,
                                  std::size_t cols);

/// out[i, j] (+)= sum_b a[b, i] * g[b, j]   (a-transpose times g)
void matmul_transposed_lhs_kernel(std::span<const double> a, std::span<const double> g,
                                  std::span<double> out, std::size_t rows, std::size_t inner,
                                  std::size_t cols);

}  // namespace kggan
