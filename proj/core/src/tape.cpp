// Copyright 2026 The kggan Authors
// SPDX-License-Identifier: Apache-2.0

#include "kggan/tape.hpp"

#include <algorithm>
#include <cmath>

#include "kggan/error.hpp"

namespace kggan {
namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  require(a.shape() == b.shape(), ErrorKind::kDimension,
          std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
              shape_string(b.shape()));
}

Tensor detached(const Tensor& t) { return Tensor(t.shape(), t.storage()); }

void require_matrix(const Tensor& a, const char* op) {
  require(a.rank() == 2, ErrorKind::kDimension,
          std::string(op) + ": expected a 2-D tensor, got " + shape_string(a.shape()));
}

}  // namespace

Var Tape::parameter(Tensor& tensor) {
  Node n;
  n.ref = &tensor;
  if (tensor.requires_grad()) {
    n.sink = &tensor;
    n.needs_grad = true;
  }
  nodes_.push_back(std::move(n));
  return Var(nodes_.size() - 1);
}

Var Tape::reference(const Tensor& tensor) {
  Node n;
  n.ref = &tensor;
  nodes_.push_back(std::move(n));
  return Var(nodes_.size() - 1);
}

Var Tape::constant(Tensor tensor) {
  Node n;
  n.owned = std::move(tensor);
  nodes_.push_back(std::move(n));
  return Var(nodes_.size() - 1);
}

const Tape::Node& Tape::node(Var v) const {
  require(v.valid() && v.index() < nodes_.size(), ErrorKind::kContract, "variable not on this tape");
  return nodes_[v.index()];
}

const Tensor& Tape::value(Var v) const {
  const Node& n = node(v);
  return n.ref ? *n.ref : n.owned;
}

Var Tape::push(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward) {
  bool needs = false;
  for (Var in : inputs) needs = needs || node(in).needs_grad;
  Node n;
  n.owned = std::move(value);
  n.needs_grad = needs;
  if (needs) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var(nodes_.size() - 1);
}

std::span<double> Tape::grad_of(std::size_t index) {
  Node& n = nodes_[index];
  if (n.sink) return n.sink->mutable_grad();  // parameters accumulate in place
  if (n.grad.empty()) n.grad.assign(value(Var(index)).size(), 0.0);
  return n.grad;
}

Var Tape::affine(Var x, Var w, Var b) {
  const Tensor& xv = value(x);
  const Tensor& wv = value(w);
  const Tensor& bv = value(b);
  require(xv.rank() == 2 && wv.rank() == 2 && bv.rank() == 1 && xv.dim(1) == wv.dim(0) &&
              bv.dim(0) == wv.dim(1),
          ErrorKind::kDimension,
          "affine: input " + shape_string(xv.shape()) + " incompatible with weight " +
              shape_string(wv.shape()) + " and bias " + shape_string(bv.shape()));
  const std::size_t rows = xv.dim(0), inner = xv.dim(1), cols = wv.dim(1);
  Tensor out({rows, cols});
  auto o = out.data();
  for (std::size_t r = 0; r < rows; ++r) std::copy(bv.data().begin(), bv.data().end(), o.begin() + r * cols);
  matmul_kernel(xv.data(), wv.data(), o, rows, inner, cols, /*accumulate=*/true);
  const std::size_t xi = x.index(), wi = w.index(), bi = b.index();
  return push(std::move(out), {x, w, b}, [xi, wi, bi, rows, inner, cols](Tape& t, std::size_t self) {
    auto g = t.upstream(self);
    if (t.needs(xi)) {
      matmul_transposed_rhs_kernel(g, t.value(Var(wi)).data(), t.grad_of(xi), rows, inner, cols);
    }
    if (t.needs(wi)) {
      matmul_transposed_lhs_kernel(t.value(Var(xi)).data(), g, t.grad_of(wi), rows, inner, cols);
    }
    if (t.needs(bi)) {
      auto gb = t.grad_of(bi);
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) gb[c] += g[r * cols + c];
    }
  });
}

Var Tape::matmul(Var a, Var b) {
  const Tensor& av = value(a);
  const Tensor& bv = value(b);
  require(av.rank() == 2 && bv.rank() == 2 && av.dim(1) == bv.dim(0), ErrorKind::kDimension,
          "matmul: shape mismatch " + shape_string(av.shape()) + " x " + shape_string(bv.shape()));
  const std::size_t rows = av.dim(0), inner = av.dim(1), cols = bv.dim(1);
  Tensor out({rows, cols});
  matmul_kernel(av.data(), bv.data(), out.data(), rows, inner, cols, false);
  const std::size_t ai = a.index(), bi = b.index();
  return push(std::move(out), {a, b}, [ai, bi, rows, inner, cols](Tape& t, std::size_t self) {
    auto g = t.upstream(self);
    if (t.needs(ai)) matmul_transposed_rhs_kernel(g, t.value(Var(bi)).data(), t.grad_of(ai), rows, inner, cols);
    if (t.needs(bi)) matmul_transposed_lhs_kernel(t.value(Var(ai)).data(), g, t.grad_of(bi), rows, inner, cols);
  });
}

Var Tape::add(Var a, Var b) {
  require_same_shape(value(a), value(b), "add");
  Tensor out = detached(value(a));
  auto bv = value(b).data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  const std::size_t ai = a.index(), bi = b.index();
  return push(std::move(out), {a, b}, [ai, bi](Tape& t, std::size_t self) {
    auto g = t.upstream(self);
    if (t.needs(ai)) {
      auto ga = t.grad_of(ai);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    }
    if (t.needs(bi)) {
      auto gb = t.grad_of(bi);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
    }
  });
}

Var Tape::sub(Var a, Var b) {
  require_same_shape(value(a), value(b), "sub");
  Tensor out = detached(value(a));
  auto bv = value(b).data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
  const std::size_t ai = a.index(), bi = b.index();
  return push(std::move(out), {a, b}, [ai, bi](Tape& t, std::size_t self) {
    auto g = t.upstream(self);
    if (t.needs(ai)) {
      auto ga = t.grad_of(ai);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    }
    if (t.needs(bi)) {
      auto gb = t.grad_of(bi);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
    }
  });
}

Var Tape::mul(Var a, Var b) {
  require_same_shape(value(a), value(b), "mul");
  Tensor out = detached(value(a));
  auto bv = value(b).data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  const std::size_t ai = a.index(), bi = b.index();
  return push(std::move(out), {a, b}, [ai, bi](Tape& t, std::size_t self) {
    auto g = t.upstream(self);
    if (t.needs(ai)) {
      auto ga = t.grad_of(ai);
      auto bv = t.value(Var(bi)).data();
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
    }
    if (t.needs(bi)) {
      auto gb = t.grad_of(bi);
      auto av = t.value(Var(ai)).data();
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
    }
  });
}

Var Tape::scale(Var a, double factor) {
  Tensor out = detached(value(a));
  for (double& x : out.storage()) x *= factor;
  const std::size_t ai = a.index();
  return push(std::move(out), {a}, [ai, factor](Tape& t, std::size_t self) {
    auto g = t.upstream(self);
    auto ga = t.grad_of(ai);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += factor * g[i];
  });
}

Var Tape::shift(Var a, double offset) {
  Tensor out = detached(value(a));
  for (double& x : out.storage()) x += offset;
  const std::size_t ai = a.index();
  return push(std::move(out), {a}, [ai](Tape& t, std::size_t self) {
    auto g = t.upstream(self);
    auto ga = t.grad_of(ai);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
  });
}

Var Tape::tanh(Var a) {
  Tensor out = detached(value(a));
  for (double& x : out.storage()) x = std::tanh(x);
  const std::size_t ai = a.index();
  return push(std::move(out), {a}, [ai](Tape& t, std::size_t self) {
    auto g = t.upstream(self);
    auto y = t.value(Var(self)).data();
    auto ga = t.grad_of(ai);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * (1.0 - y[i] * y[i]);
  });
}

Var Tape::sigmoid(Var a) {
  Tensor out = detached(value(a));
  for (double& x : out.storage()) x = 1.0 / (1.0 + std::exp(-x));
  const std::size_t ai = a.index();
  return push(std::move(out), {a}, [ai](Tape& t, std::size_t self) {
    auto g = t.upstream(self);
    auto y = t.value(Var(self)).data();
    auto ga = t.grad_of(ai);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * y[i] * (1.0 - y[i]);
  });
}

Var Tape::relu(Var a) { return leaky_relu(a, 0.0); }

Var Tape::leaky_relu(Var a, double negative_slope) {
  Tensor out = detached(value(a));
  for (double& x : out.storage()) x = x > 0.0 ? x : negative_slope * x;
  const std::size_t ai = a.index();
  return push(std::move(out), {a}, [ai, negative_slope](Tape& t, std::size_t self) {
    auto g = t.upstream(self);
    auto x = t.value(Var(ai)).data();
    auto ga = t.grad_of(ai);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += x[i] > 0.0 ? g[i] : negative_slope * g[i];
  });
}

Var Tape::sum(Var a) {
  double total = 0.0;
  for (double x : value(a).data()) total += x;
  const std::size_t ai = a.index();
  return push(Tensor::scalar(total), {a}, [ai](Tape& t, std::size_t self) {
    const double g = t.upstream(self)[0];
    for (double& x : t.grad_of(ai)) x += g;
  });
}

Var Tape::mean(Var a) {
  const double n = static_cast<double>(value(a).size());
  double total = 0.0;
  for (double x : value(a).data()) total += x;
  const std::size_t ai = a.index();
  return push(Tensor::scalar(total / n), {a}, [ai, n](Tape& t, std::size_t self) {
    const double g = t.upstream(self)[0] / n;
    for (double& x : t.grad_of(ai)) x += g;
  });
}

Var Tape::reshape(Var a, Shape shape) {
  Tensor out = value(a).reshaped(std::move(shape));
  const std::size_t ai = a.index();
  return push(std::move(out), {a}, [ai](Tape& t, std::size_t self) {
    auto g = t.upstream(self);
    auto ga = t.grad_of(ai);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
  });
}

Var Tape::concat_columns(Var a, Var b) {
  const Tensor& av = value(a);
  const Tensor& bv = value(b);
  require_matrix(av, "concat_columns");
  require_matrix(bv, "concat_columns");
  require(av.dim(0) == bv.dim(0), ErrorKind::kDimension,
          "concat_columns: row mismatch " + shape_string(av.shape()) + " vs " + shape_string(bv.shape()));
  const std::size_t rows = av.dim(0), na = av.dim(1), nb = bv.dim(1);
  Tensor out({rows, na + nb});
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy_n(av.data().begin() + r * na, na, out.data().begin() + r * (na + nb));
    std::copy_n(bv.data().begin() + r * nb, nb, out.data().begin() + r * (na + nb) + na);
  }
  const std::size_t ai = a.index(), bi = b.index();
  return push(std::move(out), {a, b}, [ai, bi, rows, na, nb](Tape& t, std::size_t self) {
    auto g = t.upstream(self);
    if (t.needs(ai)) {
      auto ga = t.grad_of(ai);
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < na; ++c) ga[r * na + c] += g[r * (na + nb) + c];
    }
    if (t.needs(bi)) {
      auto gb = t.grad_of(bi);
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < nb; ++c) gb[r * nb + c] += g[r * (na + nb) + na + c];
    }
  });
}

Var Tape::row_dot(Var a, Var b) {
  const Tensor& av = value(a);
  const Tensor& bv = value(b);
  require_matrix(av, "row_dot");
  require_same_shape(av, bv, "row_dot");
  const std::size_t rows = av.dim(0), cols = av.dim(1);
  Tensor out({rows});
  for (std::size_t r = 0; r < rows; ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < cols; ++c) acc += av.data()[r * cols + c] * bv.data()[r * cols + c];
    out[r] = acc;
  }
  const std::size_t ai = a.index(), bi = b.index();
  return push(std::move(out), {a, b}, [ai, bi, rows, cols](Tape& t, std::size_t self) {
    auto g = t.upstream(self);
    if (t.needs(ai)) {
      auto ga = t.grad_of(ai);
      auto bv = t.value(Var(bi)).data();
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) ga[r * cols + c] += g[r] * bv[r * cols + c];
    }
    if (t.needs(bi)) {
      auto gb = t.grad_of(bi);
      auto av = t.value(Var(ai)).data();
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) gb[r * cols + c] += g[r] * av[r * cols + c];
    }
  });
}

Var Tape::row_squared_norm(Var a) {
  const Tensor& av = value(a);
  require_matrix(av, "row_squared_norm");
  const std::size_t rows = av.dim(0), cols = av.dim(1);
  Tensor out({rows});
  for (std::size_t r = 0; r < rows; ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      const double x = av.data()[r * cols + c];
      acc += x * x;
    }
    out[r] = acc;
  }
  const std::size_t ai = a.index();
  return push(std::move(out), {a}, [ai, rows, cols](Tape& t, std::size_t self) {
    auto g = t.upstream(self);
    auto ga = t.grad_of(ai);
    auto av = t.value(Var(ai)).data();
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) ga[r * cols + c] += 2.0 * g[r] * av[r * cols + c];
  });
}

Var Tape::hinge(Var a) {
  Tensor out = detached(value(a));
  for (double& x : out.storage()) x = std::max(0.0, 1.0 - x);
  const std::size_t ai = a.index();
  return push(std::move(out), {a}, [ai](Tape& t, std::size_t self) {
    auto g = t.upstream(self);
    auto x = t.value(Var(ai)).data();
    auto ga = t.grad_of(ai);
    for (std::size_t i = 0; i < g.size(); ++i)
      if (1.0 - x[i] > 0.0) ga[i] -= g[i];
  });
}

Var Tape::spectral_normalized(Var w, std::span<const double> u, std::span<const double> v) {
  const Tensor& wv = value(w);
  require_matrix(wv, "spectral_normalized");
  const std::size_t m = wv.dim(0), n = wv.dim(1);
  require(u.size() == m && v.size() == n, ErrorKind::kDimension,
          "spectral_normalized: singular vectors do not match weight " + shape_string(wv.shape()));
  double sigma = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += wv.data()[i * n + j] * v[j];
    sigma += u[i] * row;
  }
  const bool degenerate = !(sigma > 1e-12);
  Tensor out = detached(wv);
  if (!degenerate)
    for (double& x : out.storage()) x /= sigma;
  std::vector<double> uu(u.begin(), u.end()), vv(v.begin(), v.end());
  const std::size_t wi = w.index();
  return push(std::move(out), {w},
              [wi, m, n, sigma, degenerate, uu = std::move(uu), vv = std::move(vv)](Tape& t, std::size_t self) {
                auto g = t.upstream(self);
                auto gw = t.grad_of(wi);
                if (degenerate) {
                  for (std::size_t i = 0; i < g.size(); ++i) gw[i] += g[i];
                  return;
                }
                // d(W/s)/dW with s = u^T W v:  G/s - <G, W>/s^2 * u v^T
                auto wdata = t.value(Var(wi)).data();
                double inner = 0.0;
                for (std::size_t i = 0; i < g.size(); ++i) inner += g[i] * wdata[i];
                const double coeff = inner / (sigma * sigma);
                for (std::size_t i = 0; i < m; ++i)
                  for (std::size_t j = 0; j < n; ++j) gw[i * n + j] += g[i * n + j] / sigma - coeff * uu[i] * vv[j];
              });
}

void Tape::backward(Var loss) {
  const Tensor& lv = value(loss);
  require(lv.size() == 1 && lv.rank() <= 1, ErrorKind::kContract,
          "backward: loss must be a scalar, got shape " + shape_string(lv.shape()));
  require(!nodes_.empty(), ErrorKind::kContract, "backward: empty tape");
  if (nodes_[loss.index()].needs_grad) {
    grad_of(loss.index())[0] = 1.0;
    for (std::size_t i = loss.index() + 1; i-- > 0;) {
      Node& n = nodes_[i];
      if (!n.needs_grad || n.grad.empty() || !n.backward) continue;
      n.backward(*this, i);
    }
  }
  nodes_.clear();
}

}  // namespace kggan
