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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "sskl/errors.hpp"
#include "sskl/gp.hpp"
#include "sskl/kernels.hpp"

using namespace sskl;

namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

Vector random_vector(std::size_t n, Rng& rng) {
  Vector v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

}  // namespace

TEST(Nlml, Examples) {
  EXPECT_NEAR(neg_log_marginal_likelihood(Matrix{{2}}, Vector{0}).value, 0.5 * std::log(4 * std::numbers::pi), 1e-14);
  EXPECT_NEAR(neg_log_marginal_likelihood(Matrix{{2}}, Vector{0}).value, 1.26551, 1e-5);
  EXPECT_NEAR(neg_log_marginal_likelihood(Matrix{{1}}, Vector{1}).value, 0.5 + 0.5 * kLog2Pi, 1e-14);
  EXPECT_NEAR(neg_log_marginal_likelihood(Matrix{{1}}, Vector{1}).value, 1.41894, 1e-5);
  const double a = 0.7, b = -1.9;
  EXPECT_NEAR(neg_log_marginal_likelihood(Matrix::identity(2), Vector{a, b}).value,
              0.5 * (a * a + b * b) + kLog2Pi, 1e-14);
  EXPECT_THROW(neg_log_marginal_likelihood(Matrix{{1, 2}, {2, 1}}, Vector{0, 0}), NotPositiveDefinite);
  EXPECT_THROW(neg_log_marginal_likelihood(Matrix::identity(2), Vector{1}), DimensionMismatch);
}

TEST(Nlml, MatchesBruteForceDensity) {
  for (std::uint64_t s = 0; s < 100; ++s) {
    Rng rng(s);
    const std::size_t n = 1 + s % 6;
    const Matrix k = oracle::random_spd(n, rng);
    const Vector y = random_vector(n, rng);
    const double ref = oracle::gaussian_nlml(k, y);
    EXPECT_LE(oracle::rel_err(neg_log_marginal_likelihood(k, y).value, ref), 1e-8);
  }
}

TEST(Posterior, Examples) {
  const KernelParams kp = KernelParams::rbf();
  const Matrix xl{{0.4}};
  const Matrix k = kernel_matrix(kp, xl, xl);
  // Noiseless interpolation.
  GpPosterior p = condition(k, Vector{1.7}, k, Vector{1.0}, JitterPolicy::exact());
  EXPECT_NEAR(p.pred_mean[0], 1.7, 1e-14);
  EXPECT_NEAR(p.pred_var[0], 0.0, 1e-14);
  // Unit noise halves the mean.
  p = condition(add_noise_diag(k, kp), Vector{1.7}, k, Vector{1.0});
  EXPECT_NEAR(p.pred_mean[0], 0.85, 1e-14);
  EXPECT_NEAR(p.pred_var[0], 0.5, 1e-14);
  // Far away: prior.
  const Matrix far = kernel_matrix(kp, xl, Matrix{{1e6}});
  p = condition(add_noise_diag(k, kp), Vector{1.7}, far, Vector{1.0});
  EXPECT_EQ(p.pred_mean[0], 0.0);
  EXPECT_EQ(p.pred_var[0], 1.0);
}

TEST(Posterior, MatchesExplicitInverse) {
  for (std::uint64_t s = 0; s < 100; ++s) {
    Rng rng(1000 + s);
    const std::size_t n = 1 + s % 6;
    const std::size_t t = 1 + s % 4;
    const KernelParams kp = KernelParams::rbf(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-3, 0));
    const Matrix xl = oracle::random_matrix(n, 2, rng);
    const Matrix xt = oracle::random_matrix(t, 2, rng);
    const Vector y = random_vector(n, rng);
    const Matrix kn = add_noise_diag(kernel_matrix(kp, xl, xl), kp);
    const Matrix kc = kernel_matrix(kp, xl, xt);
    const Vector kd = kernel_diag(kp, xt);
    const GpPosterior p = condition(kn, y, kc, kd);
    const auto [mean, var] = oracle::gaussian_posterior(kn, y, kc, kd);
    for (std::size_t j = 0; j < t; ++j) {
      EXPECT_LE(oracle::rel_err(p.pred_mean[j], mean[j]), 1e-8);
      EXPECT_LE(std::abs(p.pred_var[j] - var[j]), 1e-8 * std::max(1.0, kd[j]));
      EXPECT_LE(p.pred_var[j], kd[j]);
      EXPECT_GE(p.pred_var[j], 0.0);
    }
  }
}

TEST(Posterior, NegativeVarianceIsAnError) {
  const CholFactor f = cholesky(Matrix{{1}});
  EXPECT_THROW(posterior_predict(f, Vector{0}, Matrix{{2}}, Vector{1}), NegativeVariance);
  EXPECT_THROW(posterior_predict(f, Vector{0}, Matrix{{1}, {2}}, Vector{1}), DimensionMismatch);
}

TEST(Posterior, VarianceGrowsWithDistance) {
  const KernelParams kp = KernelParams::rbf();
  const Matrix xl{{0}};
  const CholFactor f = cholesky(kernel_matrix(kp, xl, xl), JitterPolicy::exact());
  double prev = -1.0;
  for (double d = 0.05; d < 6.0; d += 0.05) {
    const Matrix xt{{d}};
    const Predictive p = posterior_predict(f, Vector{0}, kernel_matrix(kp, xl, xt), kernel_diag(kp, xt));
    EXPECT_GT(p.var[0], prev) << "distance " << d;
    prev = p.var[0];
  }
}

TEST(VarianceLoss, Examples) {
  const KernelParams kp = KernelParams::rbf(std::log(1.5));
  const Matrix xl{{0}, {1}};
  const CholFactor f = cholesky(add_noise_diag(kernel_matrix(kp, xl, xl), kp));
  const Matrix far{{1e6}, {2e6}, {-1e6}};
  EXPECT_DOUBLE_EQ(variance_loss(f, kernel_matrix(kp, xl, far), kernel_diag(kp, far)), 3 * 1.5);

  const CholFactor exact = cholesky(kernel_matrix(kp, xl, xl), JitterPolicy::exact());
  EXPECT_NEAR(variance_loss(exact, kernel_matrix(kp, xl, xl), kernel_diag(kp, xl)), 0.0, 1e-12);

  const KernelParams unit = KernelParams::rbf();
  const Matrix one{{0}};
  const Matrix u{{1}};
  const CholFactor f1 = cholesky(kernel_matrix(unit, one, one), JitterPolicy::exact());
  const double v = variance_loss(f1, kernel_matrix(unit, one, u), kernel_diag(unit, u));
  EXPECT_NEAR(v, 1.0 - std::exp(-1.0), 1e-15);
  EXPECT_NEAR(v, 0.63212, 1e-5);
}

TEST(MllAdjoint, Examples) {
  NlmlResult r = neg_log_marginal_likelihood(Matrix{{1}}, Vector{0});
  EXPECT_DOUBLE_EQ(mll_adjoint(r.chol, r.alpha)(0, 0), 0.5);
  r = neg_log_marginal_likelihood(Matrix{{1}}, Vector{1});
  EXPECT_DOUBLE_EQ(mll_adjoint(r.chol, r.alpha)(0, 0), 0.0);
}

TEST(MllAdjoint, FiniteDifferences) {
  for (std::uint64_t s = 0; s < 100; ++s) {
    Rng rng(2000 + s);
    const std::size_t n = 4;
    const Matrix k = oracle::random_spd(n, rng);
    const Vector y = random_vector(n, rng);
    const NlmlResult r = neg_log_marginal_likelihood(k, y);
    const Matrix adj = mll_adjoint(r.chol, r.alpha);
    // Perturb K symmetrically: d/dt NLML(K + t (E_ij + E_ji)) = adj_ij + adj_ji.
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) {
        auto f = [&](const Vector& t) {
          Matrix kk = k;
          kk(i, j) += t[0];
          if (i != j) kk(j, i) += t[0];
          return neg_log_marginal_likelihood(kk, y, JitterPolicy::exact()).value;
        };
        const double fd = oracle::central_diff(f, Vector{0.0}, 0, 1e-6);
        const double a = i == j ? adj(i, i) : adj(i, j) + adj(j, i);
        EXPECT_LE(oracle::rel_err(a, fd, 1e-6), 1e-5) << i << "," << j;
      }
  }
}

TEST(VarianceAdjoint, Examples) {
  const CholFactor f = cholesky(Matrix{{2, 0.3}, {0.3, 1}});
  VarianceAdjoint a = variance_adjoint(f, Matrix(2, 3), Vector{1, 1, 1});
  EXPECT_EQ(a.d_k_cross, Matrix(2, 3));
  EXPECT_EQ(a.d_k_train, Matrix(2, 2));
  EXPECT_EQ(a.d_k_test_diag, (Vector{1, 1, 1}));

  const double c = 0.37;
  a = variance_adjoint(cholesky(Matrix{{1}}), Matrix{{c}}, Vector{1});
  EXPECT_DOUBLE_EQ(a.d_k_cross(0, 0), -2 * c);
  EXPECT_DOUBLE_EQ(a.d_k_train(0, 0), c * c);
}

TEST(VarianceAdjoint, FiniteDifferences) {
  for (std::uint64_t s = 0; s < 100; ++s) {
    Rng rng(3000 + s);
    const std::size_t n = 3, m = 2;
    const Matrix k = oracle::random_spd(n, rng);
    const Matrix kc = oracle::random_matrix(n, m, rng);
    const Vector kd{100.0, 120.0};
    const VarianceAdjoint a = variance_adjoint(cholesky(k), kc, kd);
    auto loss = [&](const Matrix& kk, const Matrix& cc, const Vector& dd) {
      return variance_loss(cholesky(kk, JitterPolicy::exact()), cc, dd);
    };
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j) {
        const double fd = oracle::central_diff(
            [&](const Vector& t) {
              Matrix cc = kc;
              cc(i, j) += t[0];
              return loss(k, cc, kd);
            },
            Vector{0.0}, 0, 1e-4);
        EXPECT_LE(oracle::rel_err(a.d_k_cross(i, j), fd, 1e-6), 1e-5);
      }
    for (std::size_t j = 0; j < m; ++j) {
      const double fd = oracle::central_diff(
          [&](const Vector& t) {
            Vector dd = kd;
            dd[j] += t[0];
            return loss(k, kc, dd);
          },
          Vector{0.0}, 0, 1e-4);
      EXPECT_LE(oracle::rel_err(a.d_k_test_diag[j], fd), 1e-5);
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) {
        const double fd = oracle::central_diff(
            [&](const Vector& t) {
              Matrix kk = k;
              kk(i, j) += t[0];
              if (i != j) kk(j, i) += t[0];
              return loss(kk, kc, kd);
            },
            Vector{0.0}, 0, 1e-4);
        const double an = i == j ? a.d_k_train(i, i) : a.d_k_train(i, j) + a.d_k_train(j, i);
        EXPECT_LE(oracle::rel_err(an, fd, 1e-6), 1e-5);
      }
  }
}
