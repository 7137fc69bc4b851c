// Copyright 2026 The kggan Authors
// SPDX-License-Identifier: Apache-2.0

#include "kggan/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "kggan/error.hpp"

namespace kggan {

SquareMatrix SquareMatrix::identity(std::size_t size) {
  SquareMatrix m(size);
  for (std::size_t i = 0; i < size; ++i) m(i, i) = 1.0;
  return m;
}

double SquareMatrix::trace() const {
  double t = 0.0;
  for (std::size_t i = 0; i < n; ++i) t += (*this)(i, i);
  return t;
}

double SquareMatrix::max_asymmetry() const {
  double worst = 0.0;
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = r + 1; c < n; ++c) worst = std::max(worst, std::abs((*this)(r, c) - (*this)(c, r)));
  return worst;
}

SquareMatrix multiply(const SquareMatrix& a, const SquareMatrix& b) {
  require(a.n == b.n, ErrorKind::kDimension, "multiply: size mismatch");
  SquareMatrix out(a.n);
  for (std::size_t r = 0; r < a.n; ++r)
    for (std::size_t k = 0; k < a.n; ++k) {
      const double x = a(r, k);
      for (std::size_t c = 0; c < a.n; ++c) out(r, c) += x * b(k, c);
    }
  return out;
}

SymmetricEigen symmetric_eigen(const SquareMatrix& input, double tolerance, int max_sweeps) {
  const std::size_t n = input.n;
  SquareMatrix a(n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) a(r, c) = 0.5 * (input(r, c) + input(c, r));
  SquareMatrix v = SquareMatrix::identity(n);

  double frobenius = 0.0;
  for (double x : a.values) frobenius += x * x;
  const double threshold = tolerance * tolerance * frobenius;

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off <= threshold || off == 0.0) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

  SymmetricEigen result;
  result.values.resize(n);
  result.vectors = SquareMatrix(n);
  for (std::size_t k = 0; k < n; ++k) {
    result.values[k] = a(order[k], order[k]);
    for (std::size_t r = 0; r < n; ++r) result.vectors(r, k) = v(r, order[k]);
  }
  return result;
}

SquareMatrix symmetric_sqrt(const SquareMatrix& a, double* min_eigenvalue) {
  const SymmetricEigen eig = symmetric_eigen(a);
  const std::size_t n = a.n;
  if (min_eigenvalue) *min_eigenvalue = n ? eig.values.back() : 0.0;
  SquareMatrix out(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double root = std::sqrt(std::max(eig.values[k], 0.0));
    if (root == 0.0) continue;
    for (std::size_t r = 0; r < n; ++r) {
      const double vr = eig.vectors(r, k) * root;
      for (std::size_t c = 0; c < n; ++c) out(r, c) += vr * eig.vectors(c, k);
    }
  }
  return out;
}

}  // namespace kggan
