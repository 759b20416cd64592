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

#include <optional>
#include <vector>

#include "sskl/matrix.hpp"

namespace sskl {

/// Jitter values tried in order, each multiplied by the mean of the input diagonal.
struct JitterPolicy {
  std::vector<double> relative_ladder{0.0, 1e-8, 1e-6, 1e-4, 1e-2};
  double symmetry_tol = 1e-9;

  /// Single attempt with no jitter.
  static JitterPolicy exact() { return JitterPolicy{{0.0}, 1e-9}; }
};

/// Lower-triangular L with L L^T = A + jitter_used * I.
struct CholFactor {
  Matrix lower;
  double jitter_used = 0.0;

  std::size_t dim() const { return lower.rows(); }
};

/// Factors a symmetric positive-definite matrix, walking the jitter ladder on failure.
/// Throws NotSquare, NotSymmetric, NonFinite, or NotPositiveDefinite.
CholFactor cholesky(const Matrix& a, const JitterPolicy& policy = {});

/// Plain factorization of a + jitter*I; std::nullopt when a pivot is not positive.
std::optional<Matrix> try_cholesky(const Matrix& a, double jitter);

/// x with (L L^T) x = b.
Matrix solve_chol(const CholFactor& factor, const Matrix& b);
Vector solve_chol(const CholFactor& factor, std::span<const double> b);
/// L^{-1} b
Matrix solve_lower(const CholFactor& factor, const Matrix& b);
/// L^{-T} b
Matrix solve_lower_transpose(const CholFactor& factor, const Matrix& b);
/// (L L^T)^{-1}
Matrix chol_inverse(const CholFactor& factor);

/// 2 * sum(log(diag(L)))
double logdet(const CholFactor& factor);

}  // namespace sskl
