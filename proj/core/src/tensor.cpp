// Copyright 2026 The kggan Authors
// SPDX-License-Identifier: Apache-2.0

#include "kggan/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kggan/error.hpp"

namespace kggan {

std::size_t element_count(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << ", ";
    out << shape[i];
  }
  out << ']';
  return out.str();
}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
  for (std::size_t d : shape_) {
    require(d > 0, ErrorKind::kDimension, "tensor dimensions must be positive, got " + shape_string(shape_));
  }
  data_.assign(element_count(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
  for (std::size_t d : shape_) {
    require(d > 0, ErrorKind::kDimension, "tensor dimensions must be positive, got " + shape_string(shape_));
  }
  require(element_count(shape_) == data_.size(), ErrorKind::kDimension,
          "shape " + shape_string(shape_) + " does not hold " + std::to_string(data_.size()) + " values");
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows) {
  require(rows.size() > 0, ErrorKind::kDimension, "matrix needs at least one row");
  const std::size_t cols = rows.begin()->size();
  std::vector<double> data;
  data.reserve(rows.size() * cols);
  for (const auto& row : rows) {
    require(row.size() == cols, ErrorKind::kDimension, "ragged matrix rows");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Tensor({rows.size(), cols}, std::move(data));
}

Tensor Tensor::vector(std::initializer_list<double> values) { return vector(std::vector<double>(values)); }

Tensor Tensor::vector(std::vector<double> values) {
  const std::size_t n = values.size();
  return Tensor({n}, std::move(values));
}

Tensor Tensor::scalar(double value) { return Tensor(Shape{}, std::vector<double>{value}); }

Tensor Tensor::reshaped(Shape shape) const {
  require(element_count(shape) == data_.size(), ErrorKind::kDimension,
          "cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
  return Tensor(std::move(shape), data_);
}

std::span<const double> Tensor::grad() const {
  if (!grad_) return {};
  return *grad_;
}

std::span<double> Tensor::mutable_grad() {
  if (!grad_) grad_.emplace(data_.size(), 0.0);
  return *grad_;
}

void Tensor::zero_grad() {
  if (grad_) std::fill(grad_->begin(), grad_->end(), 0.0);
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

void matmul_kernel(std::span<const double> a, std::span<const double> w, std::span<double> out,
                   std::size_t rows, std::size_t inner, std::size_t cols, bool accumulate) {
  if (!accumulate) std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    double* __restrict dst = out.data() + r * cols;
    const double* src = a.data() + r * inner;
    for (std::size_t k = 0; k < inner; ++k) {
      const double x = src[k];
      if (x == 0.0) continue;
      const double* __restrict wrow = w.data() + k * cols;
      for (std::size_t c = 0; c < cols; ++c) dst[c] += x * wrow[c];
    }
  }
}

void matmul_transposed_rhs_kernel(std::span<const double> g, std::span<const double> w,
                                  std::span<double> out, std::size_t rows, std::size_t inner,
                                  std::size_t cols) {
  // Transpose w once so the inner loop is a contiguous axpy.
  thread_local std::vector<double> wt;
  wt.resize(inner * cols);
  for (std::size_t k = 0; k < inner; ++k)
    for (std::size_t c = 0; c < cols; ++c) wt[c * inner + k] = w[k * cols + c];
  for (std::size_t r = 0; r < rows; ++r) {
    const double* grow = g.data() + r * cols;
    double* __restrict dst = out.data() + r * inner;
    for (std::size_t c = 0; c < cols; ++c) {
      const double x = grow[c];
      if (x == 0.0) continue;
      const double* __restrict wrow = wt.data() + c * inner;
      for (std::size_t k = 0; k < inner; ++k) dst[k] += x * wrow[k];
    }
  }
}

void matmul_transposed_lhs_kernel(std::span<const double> a, std::span<const double> g,
                                  std::span<double> out, std::size_t rows, std::size_t inner,
                                  std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* arow = a.data() + r * inner;
    const double* grow = g.data() + r * cols;
    for (std::size_t k = 0; k < inner; ++k) {
      const double x = arow[k];
      if (x == 0.0) continue;
      double* __restrict dst = out.data() + k * cols;
      for (std::size_t c = 0; c < cols; ++c) dst[c] += x * grow[c];
    }
  }
}

}  // namespace kggan
