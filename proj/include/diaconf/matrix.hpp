#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "diaconf/errors.hpp"

namespace diaconf {

// Dense square matrix, row-major. Only what the spectral pipeline needs.
class SymMatrix {
 public:
  explicit SymMatrix(std::size_t n) : n_(n), v_(n * n, 0.0) {}

  std::size_t size() const { return n_; }
  double& at(std::size_t i, std::size_t j) { return v_[i * n_ + j]; }
  double at(std::size_t i, std::size_t j) const { return v_[i * n_ + j]; }

  double frobenius_norm() const {
    double s = 0.0;
    for (double x : v_) s += x * x;
    return std::sqrt(s);
  }

  double max_symmetry_defect() const {
    double m = 0.0;
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = i + 1; j < n_; ++j)
        m = std::max(m, std::abs(at(i, j) - at(j, i)));
    return m;
  }

 private:
  std::size_t n_;
  std::vector<double> v_;
};

struct EigenDecomposition {
  std::vector<double> values;                 // sorted descending
  std::vector<std::vector<double>> vectors;   // vectors[k] pairs with values[k]
};

// Eigendecomposition of a real symmetric matrix by cyclic Jacobi rotations
// (Numerical Recipes scheme: thresholded sweeps, rotations applied two rows
// and columns at a time). Eigenvalues are returned in descending order with
// unit-norm eigenvectors; each eigenvector's largest-magnitude component is
// made positive so repeated runs produce identical output.
inline EigenDecomposition jacobi_eigendecompose(const SymMatrix& input,
                                                int max_sweeps = 64) {
  const std::size_t n = input.size();
  if (n == 0) throw Error("jacobi_eigendecompose: empty matrix");
  if (input.max_symmetry_defect() > 1e-9)
    throw Error("jacobi_eigendecompose: matrix is not symmetric");

  SymMatrix a = input;
  std::vector<double> v(n * n, 0.0);  // accumulated rotations, row-major
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
  std::vector<double> d(n), b(n), z(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) d[i] = b[i] = a.at(i, i);

  auto off_norm = [&]() {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) s += a.at(i, j) * a.at(i, j);
    return std::sqrt(2.0 * s);
  };

  bool converged = (n == 1);
  for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
    double sm = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) sm += std::abs(a.at(i, j));
    if (sm == 0.0) {
      converged = true;
      break;
    }
    const double thresh = sweep < 3 ? 0.2 * sm / double(n * n) : 0.0;

    for (std::size_t p = 0; p < n - 1; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a.at(p, q);
        const double g = 100.0 * std::abs(apq);
        // Skip rotations that can no longer change the diagonal.
        if (sweep > 3 && std::abs(d[p]) + g == std::abs(d[p]) &&
            std::abs(d[q]) + g == std::abs(d[q])) {
          a.at(p, q) = 0.0;
          continue;
        }
        if (std::abs(apq) <= thresh) continue;

        double h = d[q] - d[p];
        double t;
        if (std::abs(h) + g == std::abs(h)) {
          t = apq / h;
        } else {
          const double theta = 0.5 * h / apq;
          t = 1.0 / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
          if (theta < 0.0) t = -t;
        }
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        const double tau = s / (1.0 + c);
        h = t * apq;
        z[p] -= h;
        z[q] += h;
        d[p] -= h;
        d[q] += h;
        a.at(p, q) = 0.0;

        auto rotate = [&](std::size_t i, std::size_t j, std::size_t k,
                          std::size_t l) {
          const double gg = a.at(i, j);
          const double hh = a.at(k, l);
          a.at(i, j) = gg - s * (hh + gg * tau);
          a.at(k, l) = hh + s * (gg - hh * tau);
        };
        for (std::size_t j = 0; j < p; ++j) rotate(j, p, j, q);
        for (std::size_t j = p + 1; j < q; ++j) rotate(p, j, j, q);
        for (std::size_t j = q + 1; j < n; ++j) rotate(p, j, q, j);
        for (std::size_t i = 0; i < n; ++i) {
          const double gg = v[i * n + p];
          const double hh = v[i * n + q];
          v[i * n + p] = gg - s * (hh + gg * tau);
          v[i * n + q] = hh + s * (gg - hh * tau);
        }
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      b[i] += z[i];
      d[i] = b[i];
      z[i] = 0.0;
    }
    if (off_norm() <= 1e-13 * std::max(1.0, input.frobenius_norm()))
      converged = true;
  }

  if (!converged)
    throw ConvergenceError("jacobi_eigendecompose: no convergence after sweep cap",
                           off_norm());

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return d[x] > d[y]; });

  EigenDecomposition out;
  out.values.resize(n);
  out.vectors.assign(n, std::vector<double>(n));
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = d[order[k]];
    std::vector<double>& vec = out.vectors[k];
    for (std::size_t i = 0; i < n; ++i) vec[i] = v[i * n + order[k]];
    std::size_t imax = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (std::abs(vec[i]) > std::abs(vec[imax])) imax = i;
    if (vec[imax] < 0.0)
      for (double& x : vec) x = -x;
  }
  return out;
}

}  // namespace diaconf
