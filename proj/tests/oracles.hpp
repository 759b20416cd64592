// Copyright 2026 The sskl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Independent reference implementations used only by the tests. None of them
// share code with the library beyond the Matrix container.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include "sskl/matrix.hpp"
#include "sskl/rng.hpp"

namespace oracle {

using sskl::Matrix;
using sskl::Vector;

/// Gauss-Jordan elimination with partial pivoting.
inline Matrix inverse(const Matrix& a) {
  const std::size_t n = a.rows();
  Matrix m = a;
  Matrix inv = Matrix::identity(n);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(m(r, c)) > std::abs(m(piv, c))) piv = r;
    if (m(piv, c) == 0.0) throw std::runtime_error("oracle::inverse: singular");
    for (std::size_t k = 0; k < n; ++k) {
      std::swap(m(c, k), m(piv, k));
      std::swap(inv(c, k), inv(piv, k));
    }
    const double p = m(c, c);
    for (std::size_t k = 0; k < n; ++k) {
      m(c, k) /= p;
      inv(c, k) /= p;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = m(r, c);
      if (f == 0.0) continue;
      for (std::size_t k = 0; k < n; ++k) {
        m(r, k) -= f * m(c, k);
        inv(r, k) -= f * inv(c, k);
      }
    }
  }
  return inv;
}

/// Determinant by Gaussian elimination with partial pivoting.
inline double determinant(const Matrix& a) {
  const std::size_t n = a.rows();
  Matrix m = a;
  double det = 1.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(m(r, c)) > std::abs(m(piv, c))) piv = r;
    if (m(piv, c) == 0.0) return 0.0;
    if (piv != c) {
      for (std::size_t k = 0; k < n; ++k) std::swap(m(c, k), m(piv, k));
      det = -det;
    }
    det *= m(c, c);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = m(r, c) / m(c, c);
      for (std::size_t k = c; k < n; ++k) m(r, k) -= f * m(c, k);
    }
  }
  return det;
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
inline Vector jacobi_eigenvalues(Matrix a, int sweeps = 100) {
  const std::size_t n = a.rows();
  for (int s = 0; s < sweeps; ++s) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(k, q) = sn * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - sn * aqk;
          a(q, k) = sn * apk + c * aqk;
        }
      }
    }
  }
  return a.diag();
}

inline double min_eigenvalue(const Matrix& a) {
  const Vector e = jacobi_eigenvalues(a);
  double m = e[0];
  for (double v : e) m = std::min(m, v);
  return m;
}

inline Matrix random_matrix(std::size_t r, std::size_t c, sskl::Rng& rng) {
  Matrix m(r, c);
  for (double& v : m.values()) v = rng.normal();
  return m;
}

/// B^T B + I.
inline Matrix random_spd(std::size_t n, sskl::Rng& rng) {
  const Matrix b = random_matrix(n, n, rng);
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = i == j ? 1.0 : 0.0;
      for (std::size_t k = 0; k < n; ++k) s += b(k, i) * b(k, j);
      a(i, j) = s;
    }
  return a;
}

inline Matrix naive_matmul(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  return c;
}

/// -log N(y; 0, K) from the explicit inverse and determinant.
inline double gaussian_nlml(const Matrix& k, const Vector& y) {
  const Matrix inv = inverse(k);
  double quad = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i)
    for (std::size_t j = 0; j < y.size(); ++j) quad += y[i] * inv(i, j) * y[j];
  return 0.5 * quad + 0.5 * std::log(determinant(k)) +
         0.5 * static_cast<double>(y.size()) * std::log(2.0 * std::numbers::pi);
}

/// Posterior mean and latent variance by explicit inversion.
inline std::pair<Vector, Vector> gaussian_posterior(const Matrix& k_noisy, const Vector& y, const Matrix& k_cross,
                                                    const Vector& k_diag) {
  const Matrix inv = inverse(k_noisy);
  const std::size_t n = y.size();
  const std::size_t t = k_cross.cols();
  Vector mean(t, 0.0), var(t, 0.0);
  for (std::size_t j = 0; j < t; ++j) {
    double m = 0.0, q = 0.0;
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) {
        m += k_cross(a, j) * inv(a, b) * y[b];
        q += k_cross(a, j) * inv(a, b) * k_cross(b, j);
      }
    mean[j] = m;
    var[j] = k_diag[j] - q;
  }
  return {mean, var};
}

inline double rbf(std::span<const double> a, std::span<const double> b, double sf2, double ls2) {
  double d2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d2 += (a[i] - b[i]) * (a[i] - b[i]);
  return sf2 * std::exp(-d2 / (2.0 * ls2));
}

/// Central difference of f at x along coordinate i.
inline double central_diff(const std::function<double(const Vector&)>& f, Vector x, std::size_t i, double h) {
  const double x0 = x[i];
  x[i] = x0 + h;
  const double fp = f(x);
  x[i] = x0 - h;
  const double fm = f(x);
  return (fp - fm) / (2.0 * h);
}

inline double rel_err(double a, double b, double floor = 1e-8) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

inline double max_rel_diff(const Matrix& a, const Matrix& b) {
  double den = 0.0, num = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num = std::max(num, std::abs(a.values()[i] - b.values()[i]));
    den = std::max(den, std::abs(b.values()[i]));
  }
  return num / std::max(den, 1e-300);
}

}  // namespace oracle
