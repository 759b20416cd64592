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

#include "sskl/net.hpp"

#include <cmath>
#include <string>

#include "sskl/binary_io.hpp"
#include "sskl/errors.hpp"

namespace sskl {

namespace {

void check_sizes(const std::vector<std::size_t>& sizes) {
  if (sizes.size() < 2) throw DimensionMismatch("MlpParams: need at least input and output sizes");
  for (std::size_t s : sizes)
    if (s == 0) throw DimensionMismatch("MlpParams: zero-width layer");
}

}  // namespace

MlpParams MlpParams::zeros(std::vector<std::size_t> layer_sizes) {
  check_sizes(layer_sizes);
  MlpParams p;
  p.layer_sizes = std::move(layer_sizes);
  for (std::size_t l = 0; l + 1 < p.layer_sizes.size(); ++l) {
    p.layers.push_back({Matrix(p.layer_sizes[l], p.layer_sizes[l + 1]), Vector(p.layer_sizes[l + 1], 0.0)});
  }
  return p;
}

MlpParams MlpParams::glorot(std::vector<std::size_t> layer_sizes, Rng& rng) {
  MlpParams p = zeros(std::move(layer_sizes));
  for (auto& layer : p.layers) {
    const double fan = static_cast<double>(layer.weight.rows() + layer.weight.cols());
    const double limit = std::sqrt(6.0 / fan);
    for (double& w : layer.weight.values()) w = rng.uniform(-limit, limit);
  }
  return p;
}

std::size_t MlpParams::num_params() const {
  std::size_t n = 0;
  for (const auto& layer : layers) n += layer.weight.size() + layer.bias.size();
  return n;
}

Vector MlpParams::flatten() const {
  Vector flat;
  flat.reserve(num_params());
  for (const auto& layer : layers) {
    flat.insert(flat.end(), layer.weight.values().begin(), layer.weight.values().end());
    flat.insert(flat.end(), layer.bias.begin(), layer.bias.end());
  }
  return flat;
}

void MlpParams::assign(std::span<const double> flat) {
  if (flat.size() != num_params()) throw DimensionMismatch("MlpParams::assign: wrong parameter count");
  std::size_t pos = 0;
  for (auto& layer : layers) {
    for (double& w : layer.weight.values()) w = flat[pos++];
    for (double& b : layer.bias) b = flat[pos++];
  }
}

namespace {

Matrix affine(const DenseLayer& layer, const Matrix& x) {
  Matrix z = matmul(x, layer.weight);
  for (std::size_t i = 0; i < z.rows(); ++i) {
    auto row = z.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) row[j] += layer.bias[j];
  }
  return z;
}

void relu_inplace(Matrix& z) {
  for (double& v : z.values())
    if (v < 0.0) v = 0.0;
}

}  // namespace

MlpForward mlp_forward(const MlpParams& params, const Matrix& x) {
  if (x.cols() != params.input_dim()) {
    throw DimensionMismatch("mlp_forward: input has " + std::to_string(x.cols()) + " columns, network expects " +
                            std::to_string(params.input_dim()));
  }
  MlpForward out;
  out.cache.inputs.reserve(params.layers.size());
  out.cache.pre_activations.reserve(params.layers.size());
  Matrix a = x;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    Matrix z = affine(params.layers[l], a);
    out.cache.inputs.push_back(std::move(a));
    a = z;
    if (l + 1 < params.layers.size()) relu_inplace(a);
    out.cache.pre_activations.push_back(std::move(z));
  }
  if (!all_finite(a)) throw NonFinite("mlp_forward: non-finite output");
  out.output = std::move(a);
  return out;
}

Matrix mlp_apply(const MlpParams& params, const Matrix& x) {
  if (x.cols() != params.input_dim()) throw DimensionMismatch("mlp_apply: input dimension mismatch");
  Matrix a = x;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    a = affine(params.layers[l], a);
    if (l + 1 < params.layers.size()) relu_inplace(a);
  }
  if (!all_finite(a)) throw NonFinite("mlp_apply: non-finite output");
  return a;
}

MlpBackward mlp_backward(const MlpParams& params, const ForwardCache& cache, const Matrix& d_output) {
  const std::size_t depth = params.layers.size();
  if (cache.inputs.size() != depth || cache.pre_activations.size() != depth) {
    throw DimensionMismatch("mlp_backward: cache does not match network depth");
  }
  const Matrix& last = cache.pre_activations.back();
  if (d_output.rows() != last.rows() || d_output.cols() != last.cols()) {
    throw DimensionMismatch("mlp_backward: cotangent shape does not match output");
  }
  MlpBackward out;
  out.d_params = MlpParams::zeros(params.layer_sizes);
  Matrix delta = d_output;
  for (std::size_t l = depth; l-- > 0;) {
    if (l + 1 < depth) {
      const Matrix& z = cache.pre_activations[l];
      auto dv = delta.values();
      auto zv = z.values();
      for (std::size_t i = 0; i < dv.size(); ++i)
        if (!(zv[i] > 0.0)) dv[i] = 0.0;
    }
    auto& grad = out.d_params.layers[l];
    grad.weight = matmul_tn(cache.inputs[l], delta);
    for (std::size_t i = 0; i < delta.rows(); ++i) {
      auto row = delta.row(i);
      for (std::size_t j = 0; j < row.size(); ++j) grad.bias[j] += row[j];
    }
    delta = matmul_nt(delta, params.layers[l].weight);
  }
  out.d_x = std::move(delta);
  return out;
}

void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads) {
  if (params.size() != grads.size() || params.size() != state.first_moment.size() ||
      params.size() != state.second_moment.size()) {
    throw DimensionMismatch("adam_step: parameter, gradient and moment sizes differ");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i] + state.weight_decay * params[i];
    double& m = state.first_moment[i];
    double& v = state.second_moment[i];
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = state.beta2 * v + (1.0 - state.beta2) * g * g;
    const double m_hat = m / c1;
    const double v_hat = v / c2;
    params[i] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
  }
}

void write_mlp(std::ostream& out, const MlpParams& params) {
  binary::write_magic(out, "SSKLMLP1");
  binary::write_u64(out, params.layer_sizes.size());
  for (std::size_t s : params.layer_sizes) binary::write_u64(out, s);
  for (double v : params.flatten()) binary::write_f64(out, v);
}

MlpParams read_mlp(std::istream& in) {
  binary::expect_magic(in, "SSKLMLP1");
  const std::uint64_t count = binary::read_u64(in);
  if (count < 2 || count > 64) throw FormatError("mlp checkpoint: implausible layer count");
  std::vector<std::size_t> sizes(count);
  for (auto& s : sizes) {
    s = binary::read_u64(in);
    if (s == 0 || s > (1u << 24)) throw FormatError("mlp checkpoint: implausible layer size");
  }
  MlpParams p = MlpParams::zeros(sizes);
  Vector flat(p.num_params());
  for (double& v : flat) v = binary::read_f64(in);
  if (!all_finite(flat)) throw NonFinite("mlp checkpoint: non-finite parameter");
  p.assign(flat);
  return p;
}

}  // namespace sskl
