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

#include <span>

#include "sskl/linalg.hpp"
#include "sskl/matrix.hpp"

namespace sskl {

/// Exact GP conditioning on a labeled set.
struct GpPosterior {
  CholFactor chol;     // of K_LL + noise * I
  Vector alpha;        // (K_LL + noise * I)^{-1} y
  Vector pred_mean;
  Vector pred_var;     // latent f variance, observation noise excluded
};

struct NlmlResult {
  double value = 0.0;
  CholFactor chol;
  Vector alpha;
};

/// 0.5 y^T K^{-1} y + 0.5 log|K| + (n/2) log(2 pi) for the noisy covariance K.
NlmlResult neg_log_marginal_likelihood(const Matrix& k_noisy, std::span<const double> y,
                                       const JitterPolicy& policy = {});

struct Predictive {
  Vector mean;
  Vector var;
};

/// Means k_cross^T alpha and latent variances k_diag - |L^{-1} k_cross|^2.
/// Variances within -1e-10 (relative to the prior variance) are clamped to 0;
/// anything more negative throws NegativeVariance.
Predictive posterior_predict(const CholFactor& chol, std::span<const double> alpha, const Matrix& k_cross,
                             std::span<const double> k_test_diag);

/// Sum of latent predictive variances over the query columns of k_cross.
double variance_loss(const CholFactor& chol, const Matrix& k_cross, std::span<const double> k_test_diag);

/// d NLML / d K = 0.5 (K^{-1} - alpha alpha^T).
Matrix mll_adjoint(const CholFactor& chol, std::span<const double> alpha);

struct VarianceAdjoint {
  Matrix d_k_cross;      // -2 K^{-1} k_cross
  Vector d_k_test_diag;  // all ones
  Matrix d_k_train;      // K^{-1} k_cross k_cross^T K^{-1}
};

VarianceAdjoint variance_adjoint(const CholFactor& chol, const Matrix& k_cross, std::span<const double> k_test_diag);

/// Factor, solve, and predict in one call.
GpPosterior condition(const Matrix& k_noisy, std::span<const double> y, const Matrix& k_cross,
                      std::span<const double> k_test_diag, const JitterPolicy& policy = {});

}  // namespace sskl
