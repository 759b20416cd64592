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

#include "sskl/linalg.hpp"

#include <cmath>
#include <sstream>

#include "sskl/errors.hpp"

namespace sskl {

std::optional<Matrix> try_cholesky(const Matrix& a, double jitter) {
  const std::size_t n = a.rows();
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    const double* lj = l.row(j).data();
    double d = a(j, j) + jitter - dot({lj, j}, {lj, j});
    if (!(d > 0.0) || !std::isfinite(d)) return std::nullopt;
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      const double* li = l.row(i).data();
      l(i, j) = (a(i, j) - dot({li, j}, {lj, j})) / ljj;
    }
  }
  return l;
}

CholFactor cholesky(const Matrix& a, const JitterPolicy& policy) {
  if (!a.square()) throw NotSquare("cholesky: matrix is not square");
  if (!all_finite(a)) throw NonFinite("cholesky: non-finite entry");
  const std::size_t n = a.rows();
  const double scale = max_abs(a);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (std::abs(a(i, j) - a(j, i)) > policy.symmetry_tol * scale) {
        std::ostringstream msg;
        msg << "cholesky: asymmetric at (" << i << "," << j << ")";
        throw NotSymmetric(msg.str());
      }
    }
  }
  double tau = 0.0;
  for (std::size_t i = 0; i < n; ++i) tau += a(i, i);
  tau = n > 0 ? std::abs(tau / static_cast<double>(n)) : 1.0;
  if (tau == 0.0) tau = 1.0;

  for (double rel : policy.relative_ladder) {
    const double jitter = rel * tau;
    if (auto l = try_cholesky(a, jitter)) return CholFactor{std::move(*l), jitter};
  }
  std::ostringstream msg;
  msg << "cholesky: not positive definite (n=" << n << ", max jitter "
      << (policy.relative_ladder.empty() ? 0.0 : policy.relative_ladder.back() * tau) << ")";
  throw NotPositiveDefinite(msg.str());
}

Matrix solve_lower(const CholFactor& factor, const Matrix& b) {
  const Matrix& l = factor.lower;
  const std::size_t n = l.rows();
  if (b.rows() != n) throw DimensionMismatch("solve_lower: rhs rows != factor dim");
  Matrix x = b;
  const std::size_t m = b.cols();
  for (std::size_t i = 0; i < n; ++i) {
    double* xi = x.row(i).data();
    for (std::size_t k = 0; k < i; ++k) {
      const double lik = l(i, k);
      if (lik == 0.0) continue;
      const double* xk = x.row(k).data();
      for (std::size_t j = 0; j < m; ++j) xi[j] -= lik * xk[j];
    }
    const double inv = 1.0 / l(i, i);
    for (std::size_t j = 0; j < m; ++j) xi[j] *= inv;
  }
  return x;
}

Matrix solve_lower_transpose(const CholFactor& factor, const Matrix& b) {
  const Matrix& l = factor.lower;
  const std::size_t n = l.rows();
  if (b.rows() != n) throw DimensionMismatch("solve_lower_transpose: rhs rows != factor dim");
  Matrix x = b;
  const std::size_t m = b.cols();
  for (std::size_t ii = n; ii-- > 0;) {
    double* xi = x.row(ii).data();
    const double inv = 1.0 / l(ii, ii);
    for (std::size_t j = 0; j < m; ++j) xi[j] *= inv;
    // Row ii is final; eliminate it from the rows above.
    for (std::size_t k = 0; k < ii; ++k) {
      const double lik = l(ii, k);
      if (lik == 0.0) continue;
      double* xk = x.row(k).data();
      for (std::size_t j = 0; j < m; ++j) xk[j] -= lik * xi[j];
    }
  }
  return x;
}

Matrix solve_chol(const CholFactor& factor, const Matrix& b) {
  if (b.rows() != factor.dim()) throw DimensionMismatch("solve_chol: rhs rows != factor dim");
  return solve_lower_transpose(factor, solve_lower(factor, b));
}

Vector solve_chol(const CholFactor& factor, std::span<const double> b) {
  Matrix x = solve_chol(factor, Matrix::column(b));
  return Vector(x.values().begin(), x.values().end());
}

Matrix chol_inverse(const CholFactor& factor) {
  return solve_chol(factor, Matrix::identity(factor.dim()));
}

double logdet(const CholFactor& factor) {
  double s = 0.0;
  for (std::size_t i = 0; i < factor.dim(); ++i) s += std::log(factor.lower(i, i));
  return 2.0 * s;
}

}  // namespace sskl
