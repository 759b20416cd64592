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

#include "sskl/kernels.hpp"

#include <cmath>
#include <string>

#include "sskl/errors.hpp"

namespace sskl {

double BaseKernel::signal_var() const { return std::exp(log_signal_var); }
double BaseKernel::length_scale_sq() const { return std::exp(log_length_scale_sq); }

KernelParams KernelParams::rbf(double log_signal_var, double log_length_scale_sq, double log_noise_var) {
  KernelParams p;
  p.base = {KernelKind::Rbf, 2, log_signal_var, log_length_scale_sq};
  p.log_noise_var = log_noise_var;
  return p;
}

KernelParams KernelParams::polynomial(int degree, double log_signal_var, double log_offset_sq, double log_noise_var) {
  if (degree < 1) throw DimensionMismatch("polynomial kernel degree must be positive");
  KernelParams p;
  p.base = {KernelKind::Polynomial, degree, log_signal_var, log_offset_sq};
  p.log_noise_var = log_noise_var;
  return p;
}

KernelParams KernelParams::sum(BaseKernel left, BaseKernel right, std::size_t feature_split, double log_noise_var) {
  if (feature_split == 0) throw SplitOutOfRange("sum kernel: feature_split must be positive");
  KernelParams p;
  p.base = left;
  p.right = right;
  p.feature_split = feature_split;
  p.log_noise_var = log_noise_var;
  return p;
}

double KernelParams::noise_var() const { return std::exp(log_noise_var); }

Vector KernelParams::log_params() const {
  Vector v{base.log_signal_var, base.log_length_scale_sq};
  if (right) {
    v.push_back(right->log_signal_var);
    v.push_back(right->log_length_scale_sq);
  }
  v.push_back(log_noise_var);
  return v;
}

void KernelParams::set_log_params(std::span<const double> v) {
  if (v.size() != num_log_params()) throw DimensionMismatch("KernelParams::set_log_params: wrong length");
  base.log_signal_var = v[0];
  base.log_length_scale_sq = v[1];
  if (right) {
    right->log_signal_var = v[2];
    right->log_length_scale_sq = v[3];
  }
  log_noise_var = v.back();
}

namespace {

struct Block {
  const BaseKernel* kernel;
  std::size_t begin;
  std::size_t end;
  std::size_t param_offset;
};

std::vector<Block> blocks_for(const KernelParams& p, std::size_t q) {
  if (!p.right) return {{&p.base, 0, q, 0}};
  if (p.feature_split == 0 || p.feature_split >= q) {
    throw SplitOutOfRange("sum kernel: feature_split " + std::to_string(p.feature_split) +
                          " outside (0, " + std::to_string(q) + ")");
  }
  return {{&p.base, 0, p.feature_split, 0}, {&*p.right, p.feature_split, q, 2}};
}

void check_cols(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw DimensionMismatch("kernel: inputs have " + std::to_string(a.cols()) + " and " +
                            std::to_string(b.cols()) + " columns");
  }
}

double sq_dist(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    const double d = x[c] - y[c];
    s += d * d;
  }
  return s;
}

double inner(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t c = 0; c < n; ++c) s += x[c] * y[c];
  return s;
}

void accumulate_block(const Block& blk, const Matrix& a, const Matrix& b, Matrix& k) {
  const BaseKernel& bk = *blk.kernel;
  const std::size_t w = blk.end - blk.begin;
  if (bk.kind == KernelKind::Rbf) {
    const double sf2 = bk.signal_var();
    const double inv2ls = 0.5 / bk.length_scale_sq();
    for (std::size_t i = 0; i < a.rows(); ++i) {
      const double* ai = a.row(i).data() + blk.begin;
      for (std::size_t j = 0; j < b.rows(); ++j) {
        k(i, j) += sf2 * std::exp(-sq_dist(ai, b.row(j).data() + blk.begin, w) * inv2ls);
      }
    }
  } else {
    const double sf = std::exp(0.5 * bk.log_signal_var);
    const double off = std::exp(0.5 * bk.log_length_scale_sq);
    for (std::size_t i = 0; i < a.rows(); ++i) {
      const double* ai = a.row(i).data() + blk.begin;
      for (std::size_t j = 0; j < b.rows(); ++j) {
        k(i, j) += std::pow(sf * inner(ai, b.row(j).data() + blk.begin, w) + off, bk.degree);
      }
    }
  }
}

}  // namespace

Matrix kernel_matrix(const KernelParams& params, const Matrix& a, const Matrix& b) {
  check_cols(a, b);
  Matrix k(a.rows(), b.rows());
  for (const Block& blk : blocks_for(params, a.cols())) accumulate_block(blk, a, b, k);
  return k;
}

Matrix sum_kernel_matrix(const KernelParams& params, const Matrix& a, const Matrix& b) {
  if (!params.is_sum()) throw SplitOutOfRange("sum_kernel_matrix: parameters do not describe a sum kernel");
  return kernel_matrix(params, a, b);
}

Vector kernel_diag(const KernelParams& params, const Matrix& a) {
  Vector d(a.rows(), 0.0);
  for (const Block& blk : blocks_for(params, a.cols())) {
    const BaseKernel& bk = *blk.kernel;
    if (bk.kind == KernelKind::Rbf) {
      const double sf2 = bk.signal_var();
      for (double& v : d) v += sf2;
    } else {
      const double sf = std::exp(0.5 * bk.log_signal_var);
      const double off = std::exp(0.5 * bk.log_length_scale_sq);
      const std::size_t w = blk.end - blk.begin;
      for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* ai = a.row(i).data() + blk.begin;
        d[i] += std::pow(sf * inner(ai, ai, w) + off, bk.degree);
      }
    }
  }
  return d;
}

Matrix add_noise_diag(Matrix k, const KernelParams& params) {
  if (!k.square()) throw NotSquare("add_noise_diag: matrix is not square");
  const double nv = params.noise_var();
  for (std::size_t i = 0; i < k.rows(); ++i) k(i, i) += nv;
  return k;
}

KernelGradient kernel_backward(const KernelParams& params, const Matrix& a, const Matrix& b, const Matrix& d_k) {
  check_cols(a, b);
  if (d_k.rows() != a.rows() || d_k.cols() != b.rows()) throw DimensionMismatch("kernel_backward: d_k shape");
  KernelGradient g{Vector(params.num_log_params(), 0.0), Matrix(a.rows(), a.cols()), Matrix(b.rows(), b.cols())};
  for (const Block& blk : blocks_for(params, a.cols())) {
    const BaseKernel& bk = *blk.kernel;
    const std::size_t w = blk.end - blk.begin;
    double d_lsf = 0.0;
    double d_lls = 0.0;
    if (bk.kind == KernelKind::Rbf) {
      const double sf2 = bk.signal_var();
      const double ls2 = bk.length_scale_sq();
      const double inv2ls = 0.5 / ls2;
      for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* ai = a.row(i).data() + blk.begin;
        double* dai = g.d_a.row(i).data() + blk.begin;
        for (std::size_t j = 0; j < b.rows(); ++j) {
          const double gij = d_k(i, j);
          if (gij == 0.0) continue;
          const double* bj = b.row(j).data() + blk.begin;
          double* dbj = g.d_b.row(j).data() + blk.begin;
          const double r2 = sq_dist(ai, bj, w);
          const double kij = sf2 * std::exp(-r2 * inv2ls);
          const double gk = gij * kij;
          d_lsf += gk;
          d_lls += gk * r2 * inv2ls;
          const double coef = gk / ls2;
          for (std::size_t c = 0; c < w; ++c) {
            const double diff = ai[c] - bj[c];
            dai[c] -= coef * diff;
            dbj[c] += coef * diff;
          }
        }
      }
    } else {
      const double sf = std::exp(0.5 * bk.log_signal_var);
      const double off = std::exp(0.5 * bk.log_length_scale_sq);
      const double p = bk.degree;
      for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* ai = a.row(i).data() + blk.begin;
        double* dai = g.d_a.row(i).data() + blk.begin;
        for (std::size_t j = 0; j < b.rows(); ++j) {
          const double gij = d_k(i, j);
          if (gij == 0.0) continue;
          const double* bj = b.row(j).data() + blk.begin;
          double* dbj = g.d_b.row(j).data() + blk.begin;
          const double dotab = inner(ai, bj, w);
          const double s = sf * dotab + off;
          const double ds = gij * p * std::pow(s, bk.degree - 1);
          d_lsf += ds * 0.5 * sf * dotab;
          d_lls += ds * 0.5 * off;
          for (std::size_t c = 0; c < w; ++c) {
            dai[c] += ds * sf * bj[c];
            dbj[c] += ds * sf * ai[c];
          }
        }
      }
    }
    g.d_log_params[blk.param_offset] += d_lsf;
    g.d_log_params[blk.param_offset + 1] += d_lls;
  }
  return g;
}

KernelGradient kernel_diag_backward(const KernelParams& params, const Matrix& a, std::span<const double> d_diag) {
  if (d_diag.size() != a.rows()) throw DimensionMismatch("kernel_diag_backward: d_diag length");
  KernelGradient g{Vector(params.num_log_params(), 0.0), Matrix(a.rows(), a.cols()), Matrix()};
  for (const Block& blk : blocks_for(params, a.cols())) {
    const BaseKernel& bk = *blk.kernel;
    if (bk.kind == KernelKind::Rbf) {
      double s = 0.0;
      for (double v : d_diag) s += v;
      g.d_log_params[blk.param_offset] += s * bk.signal_var();
    } else {
      const double sf = std::exp(0.5 * bk.log_signal_var);
      const double off = std::exp(0.5 * bk.log_length_scale_sq);
      const std::size_t w = blk.end - blk.begin;
      for (std::size_t i = 0; i < a.rows(); ++i) {
        if (d_diag[i] == 0.0) continue;
        const double* ai = a.row(i).data() + blk.begin;
        double* dai = g.d_a.row(i).data() + blk.begin;
        const double sq = inner(ai, ai, w);
        const double ds = d_diag[i] * bk.degree * std::pow(sf * sq + off, bk.degree - 1);
        g.d_log_params[blk.param_offset] += ds * 0.5 * sf * sq;
        g.d_log_params[blk.param_offset + 1] += ds * 0.5 * off;
        for (std::size_t c = 0; c < w; ++c) dai[c] += ds * sf * 2.0 * ai[c];
      }
    }
  }
  return g;
}

double noise_backward(const KernelParams& params, const Matrix& d_k) {
  if (!d_k.square()) throw NotSquare("noise_backward: d_k is not square");
  double tr = 0.0;
  for (std::size_t i = 0; i < d_k.rows(); ++i) tr += d_k(i, i);
  return tr * params.noise_var();
}

DeepEmbedding deep_embed(const DeepKernel& dk, const Matrix& x) {
  if (dk.passthrough_cols >= x.cols() && dk.passthrough_cols > 0) {
    throw DimensionMismatch("deep_embed: passthrough columns leave no network input");
  }
  const std::size_t net_cols = x.cols() - dk.passthrough_cols;
  DeepEmbedding e;
  if (dk.passthrough_cols == 0) {
    MlpForward f = mlp_forward(dk.net, x);
    e.features = std::move(f.output);
    e.cache = std::move(f.cache);
  } else {
    MlpForward f = mlp_forward(dk.net, column_block(x, 0, net_cols));
    e.features = hstack(f.output, column_block(x, net_cols, x.cols()));
    e.cache = std::move(f.cache);
  }
  return e;
}

Matrix deep_features(const DeepKernel& dk, const Matrix& x) {
  if (dk.passthrough_cols == 0) return mlp_apply(dk.net, x);
  if (dk.passthrough_cols >= x.cols()) throw DimensionMismatch("deep_features: passthrough columns leave no network input");
  const std::size_t net_cols = x.cols() - dk.passthrough_cols;
  return hstack(mlp_apply(dk.net, column_block(x, 0, net_cols)), column_block(x, net_cols, x.cols()));
}

MlpBackward deep_embed_backward(const DeepKernel& dk, const DeepEmbedding& emb, const Matrix& d_features) {
  if (dk.passthrough_cols == 0) return mlp_backward(dk.net, emb.cache, d_features);
  return mlp_backward(dk.net, emb.cache, column_block(d_features, 0, dk.net.output_dim()));
}

DeepKernelForward deep_kernel_matrix(const DeepKernel& dk, const Matrix& a, const Matrix& b) {
  DeepKernelForward out;
  out.a = deep_embed(dk, a);
  out.b = deep_embed(dk, b);
  out.k = kernel_matrix(dk.kernel, out.a.features, out.b.features);
  return out;
}

}  // namespace sskl
