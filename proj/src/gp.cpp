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

#include "sskl/gp.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "sskl/errors.hpp"

namespace sskl {

namespace {

void check_query_shapes(const CholFactor& chol, const Matrix& k_cross, std::span<const double> k_test_diag) {
  if (k_cross.rows() != chol.dim()) throw DimensionMismatch("k_cross rows != number of labeled points");
  if (k_test_diag.size() != k_cross.cols()) throw DimensionMismatch("k_test_diag length != number of queries");
}

Vector latent_variances(const CholFactor& chol, const Matrix& k_cross, std::span<const double> k_test_diag) {
  const Matrix v = solve_lower(chol, k_cross);
  Vector var(k_cross.cols());
  for (std::size_t j = 0; j < var.size(); ++j) var[j] = k_test_diag[j];
  for (std::size_t i = 0; i < v.rows(); ++i) {
    auto row = v.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) var[j] -= row[j] * row[j];
  }
  for (std::size_t j = 0; j < var.size(); ++j) {
    if (var[j] < 0.0) {
      if (var[j] < -1e-10 * std::max(1.0, std::abs(k_test_diag[j]))) {
        std::ostringstream msg;
        msg << "predictive variance " << var[j] << " at query " << j;
        throw NegativeVariance(msg.str());
      }
      var[j] = 0.0;
    }
  }
  return var;
}

}  // namespace

NlmlResult neg_log_marginal_likelihood(const Matrix& k_noisy, std::span<const double> y, const JitterPolicy& policy) {
  if (k_noisy.rows() != y.size()) throw DimensionMismatch("nlml: covariance and target sizes differ");
  if (y.empty()) throw EmptyLabeledSet("nlml: no labeled points");
  NlmlResult r;
  r.chol = cholesky(k_noisy, policy);
  r.alpha = solve_chol(r.chol, y);
  const double n = static_cast<double>(y.size());
  r.value = 0.5 * dot(y, r.alpha) + 0.5 * logdet(r.chol) + 0.5 * n * std::log(2.0 * std::numbers::pi);
  return r;
}

Predictive posterior_predict(const CholFactor& chol, std::span<const double> alpha, const Matrix& k_cross,
                             std::span<const double> k_test_diag) {
  check_query_shapes(chol, k_cross, k_test_diag);
  if (alpha.size() != chol.dim()) throw DimensionMismatch("alpha length != number of labeled points");
  Predictive p;
  p.mean.assign(k_cross.cols(), 0.0);
  for (std::size_t i = 0; i < k_cross.rows(); ++i) {
    auto row = k_cross.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) p.mean[j] += row[j] * alpha[i];
  }
  p.var = latent_variances(chol, k_cross, k_test_diag);
  return p;
}

double variance_loss(const CholFactor& chol, const Matrix& k_cross, std::span<const double> k_test_diag) {
  check_query_shapes(chol, k_cross, k_test_diag);
  double s = 0.0;
  for (double v : latent_variances(chol, k_cross, k_test_diag)) s += v;
  return s;
}

Matrix mll_adjoint(const CholFactor& chol, std::span<const double> alpha) {
  if (alpha.size() != chol.dim()) throw DimensionMismatch("mll_adjoint: alpha length");
  Matrix d = chol_inverse(chol);
  const std::size_t n = d.rows();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) d(i, j) = 0.5 * (d(i, j) - alpha[i] * alpha[j]);
  return d;
}

VarianceAdjoint variance_adjoint(const CholFactor& chol, const Matrix& k_cross, std::span<const double> k_test_diag) {
  check_query_shapes(chol, k_cross, k_test_diag);
  VarianceAdjoint out;
  Matrix kinv_cross = solve_chol(chol, k_cross);
  out.d_k_train = matmul_nt(kinv_cross, kinv_cross);
  kinv_cross *= -2.0;
  out.d_k_cross = std::move(kinv_cross);
  out.d_k_test_diag.assign(k_test_diag.size(), 1.0);
  return out;
}

GpPosterior condition(const Matrix& k_noisy, std::span<const double> y, const Matrix& k_cross,
                      std::span<const double> k_test_diag, const JitterPolicy& policy) {
  GpPosterior post;
  post.chol = cholesky(k_noisy, policy);
  post.alpha = solve_chol(post.chol, y);
  Predictive p = posterior_predict(post.chol, post.alpha, k_cross, k_test_diag);
  post.pred_mean = std::move(p.mean);
  post.pred_var = std::move(p.var);
  return post;
}

}  // namespace sskl
