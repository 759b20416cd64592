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
#include <span>
#include <vector>

#include "sskl/matrix.hpp"
#include "sskl/net.hpp"

namespace sskl {

enum class KernelKind { Rbf, Polynomial };

/// One base kernel with log-domain hyperparameters.
///
/// RBF:        k(a, b) = sf2 * exp(-|a - b|^2 / (2 * ls2))
/// Polynomial: k(a, b) = (sqrt(sf2) * a.b + sqrt(ls2))^degree
///
/// with sf2 = exp(log_signal_var) and ls2 = exp(log_length_scale_sq).
struct BaseKernel {
  KernelKind kind = KernelKind::Rbf;
  int degree = 2;
  double log_signal_var = 0.0;
  double log_length_scale_sq = 0.0;

  double signal_var() const;
  double length_scale_sq() const;
  bool operator==(const BaseKernel&) const = default;
};

/// GP covariance hyperparameters. A sum kernel applies `base` to columns
/// [0, feature_split) and `right` to [feature_split, q); observation noise is
/// carried once, here.
struct KernelParams {
  BaseKernel base;
  std::optional<BaseKernel> right;
  std::size_t feature_split = 0;
  double log_noise_var = 0.0;

  static KernelParams rbf(double log_signal_var = 0.0, double log_length_scale_sq = 0.0, double log_noise_var = 0.0);
  static KernelParams polynomial(int degree, double log_signal_var = 0.0, double log_offset_sq = 0.0,
                                 double log_noise_var = 0.0);
  static KernelParams sum(BaseKernel left, BaseKernel right, std::size_t feature_split, double log_noise_var = 0.0);

  bool is_sum() const { return right.has_value(); }
  double noise_var() const;

  /// Layout: base (log sf2, log ls2), then right (if sum), then log noise.
  std::size_t num_log_params() const { return is_sum() ? 5 : 3; }
  Vector log_params() const;
  void set_log_params(std::span<const double> v);
  std::size_t noise_index() const { return num_log_params() - 1; }

  bool operator==(const KernelParams&) const = default;
};

/// Cross-covariance, noise excluded. Throws DimensionMismatch or SplitOutOfRange.
Matrix kernel_matrix(const KernelParams& params, const Matrix& a, const Matrix& b);
/// Same as kernel_matrix for a sum kernel, but rejects non-sum parameters.
Matrix sum_kernel_matrix(const KernelParams& params, const Matrix& a, const Matrix& b);
/// k(a_i, a_i) for each row.
Vector kernel_diag(const KernelParams& params, const Matrix& a);
/// k + noise_var * I. Throws NotSquare.
Matrix add_noise_diag(Matrix k, const KernelParams& params);

struct KernelGradient {
  Vector d_log_params;  // KernelParams::log_params layout; the noise slot is left at 0
  Matrix d_a;
  Matrix d_b;
};

/// Gradients of <d_k, kernel_matrix(params, a, b)>.
KernelGradient kernel_backward(const KernelParams& params, const Matrix& a, const Matrix& b, const Matrix& d_k);
/// Gradients of <d_diag, kernel_diag(params, a)>; d_b is empty.
KernelGradient kernel_diag_backward(const KernelParams& params, const Matrix& a, std::span<const double> d_diag);
/// d/d(log noise var) of <d_k, add_noise_diag(k)>.
double noise_backward(const KernelParams& params, const Matrix& d_k);

/// Network embedding followed by a GP kernel. The last `passthrough_cols`
/// input columns bypass the network and are appended to the embedding, so a
/// sum kernel split at the embedding width scores them with its own kernel.
struct DeepKernel {
  KernelParams kernel;
  MlpParams net;
  std::size_t passthrough_cols = 0;
};

struct DeepEmbedding {
  Matrix features;  // [network output | passthrough columns]
  ForwardCache cache;
};

DeepEmbedding deep_embed(const DeepKernel& dk, const Matrix& x);
/// Kernel-input matrix without a backprop cache.
Matrix deep_features(const DeepKernel& dk, const Matrix& x);
/// Network gradients given gradients w.r.t. the kernel-input matrix.
MlpBackward deep_embed_backward(const DeepKernel& dk, const DeepEmbedding& emb, const Matrix& d_features);

struct DeepKernelForward {
  Matrix k;
  DeepEmbedding a;
  DeepEmbedding b;
};

DeepKernelForward deep_kernel_matrix(const DeepKernel& dk, const Matrix& a, const Matrix& b);

}  // namespace sskl
