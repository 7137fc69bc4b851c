// Copyright 2026 The kggan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace kggan {

/// Square row-major matrix of doubles; just enough for covariance work.
struct SquareMatrix {
  std::size_t n = 0;
  std::vector<double> values;

  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t size, double fill = 0.0) : n(size), values(size * size, fill) {}

  static SquareMatrix identity(std::size_t size);

  double& operator()(std::size_t r, std::size_t c) { return values[r * n + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values[r * n + c]; }

  double trace() const;
  double max_asymmetry() const;
  friend bool operator==(const SquareMatrix&, const SquareMatrix&) = default;
};

SquareMatrix multiply(const SquareMatrix& a, const SquareMatrix& b);

struct SymmetricEigen {
  std::vector<double> values;  // descending
  SquareMatrix vectors;        // column k is the eigenvector of values[k]
};

/// Cyclic Jacobi rotations on a symmetric matrix. Only the upper triangle
/// is read after symmetrization (a + a^T) / 2.
SymmetricEigen symmetric_eigen(const SquareMatrix& a, double tolerance = 1e-14, int max_sweeps = 100);

/// Principal square root of a symmetric PSD matrix. Eigenvalues below zero
/// are clamped; the most negative eigenvalue seen is reported through
/// min_eigenvalue when provided.
SquareMatrix symmetric_sqrt(const SquareMatrix& a, double* min_eigenvalue = nullptr);

}  // namespace kggan
