#pragma once

#include <cmath>
#include <type_traits>
#include <vector>

#include "curveseg/errors.hpp"
#include "curveseg/vec.hpp"

namespace curveseg {

struct CgResult {
  int iterations = 0;
  double rel_residual = 0.0;
  bool converged = false;
};

namespace detail {

template <class T>
double block_dot(const std::vector<T>& a, const std::vector<T>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    if constexpr (std::is_floating_point_v<T>)
      s += a[i] * b[i];
    else
      s += a[i].dot(b[i]);
  }
  return s;
}

template <class T>
T block_zero() {
  if constexpr (std::is_floating_point_v<T>)
    return T(0);
  else
    return T::Zero();  // Eigen types do not zero-initialize themselves
}

}  // namespace detail

// Preconditioned conjugate gradients for an SPD operator given as a
// callback. `apply(x, y)` writes A*x into y; `precond(r, z)` applies an SPD
// approximation of A^-1. Works on vectors of doubles or of fixed-size
// Eigen vectors. Throws SingularSystem when a search direction has
// non-positive curvature.
template <class T, class Op, class Prec>
CgResult conjugate_gradient(const Op& apply, const Prec& precond,
                            const std::vector<T>& b, std::vector<T>& x,
                            double rel_tol, int max_iter) {
  const size_t n = b.size();
  x.assign(n, detail::block_zero<T>());
  const double bnorm = std::sqrt(detail::block_dot(b, b));
  CgResult res;
  if (bnorm == 0.0) {
    res.converged = true;
    return res;
  }
  std::vector<T> r = b;
  std::vector<T> z(n), p(n), q(n);
  precond(r, z);
  p = z;
  double rz = detail::block_dot(r, z);
  for (int it = 0; it < max_iter; ++it) {
    apply(p, q);
    const double pq = detail::block_dot(p, q);
    if (pq <= 0.0)
      throw SingularSystem("conjugate gradient met a direction with p'Ap = " +
                           std::to_string(pq));
    const double alpha = rz / pq;
    for (size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * q[i];
    }
    res.iterations = it + 1;
    res.rel_residual = std::sqrt(detail::block_dot(r, r)) / bnorm;
    if (res.rel_residual <= rel_tol) {
      res.converged = true;
      return res;
    }
    precond(r, z);
    const double rz_new = detail::block_dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  return res;
}

// Compressed sparse row matrix, just enough for the denoiser's linear
// systems.
struct CsrMatrix {
  int n = 0;
  std::vector<int> row_ptr;  // size n+1
  std::vector<int> col;
  std::vector<double> val;

  void multiply(const std::vector<double>& x, std::vector<double>& y) const {
    y.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) s += val[k] * x[col[k]];
      y[i] = s;
    }
  }

  std::vector<double> diagonal() const {
    std::vector<double> d(n, 1.0);
    for (int i = 0; i < n; ++i)
      for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
        if (col[k] == i) d[i] = val[k];
    return d;
  }
};

// Row-by-row CSR builder; entries within a row are emitted in insertion
// order.
struct CsrBuilder {
  std::vector<std::vector<std::pair<int, double>>> rows;

  explicit CsrBuilder(int n) : rows(n) {}

  void add(int i, int j, double v) {
    for (auto& e : rows[i])
      if (e.first == j) {
        e.second += v;
        return;
      }
    rows[i].emplace_back(j, v);
  }

  CsrMatrix build() const {
    CsrMatrix m;
    m.n = static_cast<int>(rows.size());
    m.row_ptr.resize(m.n + 1, 0);
    for (int i = 0; i < m.n; ++i)
      m.row_ptr[i + 1] = m.row_ptr[i] + static_cast<int>(rows[i].size());
    m.col.reserve(m.row_ptr[m.n]);
    m.val.reserve(m.row_ptr[m.n]);
    for (const auto& row : rows)
      for (const auto& [j, v] : row) {
        m.col.push_back(j);
        m.val.push_back(v);
      }
    return m;
  }
};

}  // namespace curveseg
