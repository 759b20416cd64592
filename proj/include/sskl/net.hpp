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

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "sskl/matrix.hpp"
#include "sskl/rng.hpp"

namespace sskl {

/// y = x * weight + bias, weight stored (fan_in x fan_out).
struct DenseLayer {
  Matrix weight;
  Vector bias;

  bool operator==(const DenseLayer&) const = default;
};

/// Fully connected network; ReLU on hidden layers, linear output layer.
struct MlpParams {
  std::vector<std::size_t> layer_sizes;
  std::vector<DenseLayer> layers;

  static MlpParams zeros(std::vector<std::size_t> layer_sizes);
  /// Uniform(-sqrt(6/(fan_in+fan_out)), +sqrt(6/(fan_in+fan_out))) weights, zero biases.
  static MlpParams glorot(std::vector<std::size_t> layer_sizes, Rng& rng);

  std::size_t input_dim() const { return layer_sizes.front(); }
  std::size_t output_dim() const { return layer_sizes.back(); }
  std::size_t num_params() const;

  /// Per layer: weight row-major, then bias.
  Vector flatten() const;
  void assign(std::span<const double> flat);

  bool operator==(const MlpParams&) const = default;
};

struct ForwardCache {
  std::vector<Matrix> inputs;          // input to each layer (x, then hidden activations)
  std::vector<Matrix> pre_activations; // x*W+b per layer
};

struct MlpForward {
  Matrix output;
  ForwardCache cache;
};

struct MlpBackward {
  MlpParams d_params;
  Matrix d_x;
};

/// Throws DimensionMismatch if x.cols() != input_dim, NonFinite on non-finite output.
MlpForward mlp_forward(const MlpParams& params, const Matrix& x);
/// Forward pass without retaining the cache.
Matrix mlp_apply(const MlpParams& params, const Matrix& x);
/// Gradients of sum(d_output .* output) w.r.t. parameters and inputs.
MlpBackward mlp_backward(const MlpParams& params, const ForwardCache& cache, const Matrix& d_output);

struct AdamState {
  std::size_t step = 0;
  Vector first_moment;
  Vector second_moment;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double learning_rate = 1e-3;
  double weight_decay = 0.0;

  AdamState() = default;
  AdamState(std::size_t num_params, double lr, double decay = 0.0)
      : first_moment(num_params, 0.0), second_moment(num_params, 0.0),
        learning_rate(lr), weight_decay(decay) {}
};

/// Bias-corrected Adam; decay*param is added to the gradient before the moment update.
void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads);

// Checkpoint: "SSKLMLP1", u64 layer count, u64 sizes, then the flatten() order
// as little-endian IEEE-754 doubles.
void write_mlp(std::ostream& out, const MlpParams& params);
MlpParams read_mlp(std::istream& in);

}  // namespace sskl
