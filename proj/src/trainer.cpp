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

#include "sskl/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "sskl/binary_io.hpp"
#include "sskl/errors.hpp"

namespace sskl {

SemisupLoss semisup_loss(const DeepKernel& dk, const Matrix& x_labeled, std::span<const double> y_labeled,
                         const Matrix& x_unlabeled, double alpha) {
  const std::size_t n = x_labeled.rows();
  // With alpha = 0 the unlabeled batch cannot affect the loss, so it is not
  // embedded at all and the result is exactly the likelihood-only objective.
  const std::size_t m = alpha == 0.0 ? 0 : x_unlabeled.rows();
  if (n == 0) throw EmptyLabeledSet("semisup_loss: no labeled points");
  if (y_labeled.size() != n) throw DimensionMismatch("semisup_loss: target length != labeled rows");
  const KernelParams& kp = dk.kernel;

  const DeepEmbedding emb = deep_embed(dk, m > 0 ? vstack(x_labeled, x_unlabeled) : x_labeled);
  const std::size_t q = emb.features.cols();
  const Matrix z_l = m > 0 ? row_block(emb.features, 0, n) : emb.features;

  const NlmlResult nl = neg_log_marginal_likelihood(add_noise_diag(kernel_matrix(kp, z_l, z_l), kp), y_labeled);
  Matrix d_k = mll_adjoint(nl.chol, nl.alpha);
  d_k *= 1.0 / static_cast<double>(n);

  SemisupLoss out;
  out.nlml = nl.value;
  out.grad_kernel.assign(kp.num_log_params(), 0.0);
  Matrix d_z(n + m, q);

  auto add_log = [&](const Vector& g) {
    for (std::size_t i = 0; i < g.size(); ++i) out.grad_kernel[i] += g[i];
  };

  if (m > 0) {
    const Matrix z_u = row_block(emb.features, n, n + m);
    const Matrix k_cross = kernel_matrix(kp, z_l, z_u);
    const Vector k_diag = kernel_diag(kp, z_u);
    out.variance = variance_loss(nl.chol, k_cross, k_diag);
    const double w = alpha / static_cast<double>(m);
    VarianceAdjoint va = variance_adjoint(nl.chol, k_cross, k_diag);
    va.d_k_train *= w;
    d_k += va.d_k_train;
    va.d_k_cross *= w;
    const KernelGradient gc = kernel_backward(kp, z_l, z_u, va.d_k_cross);
    add_log(gc.d_log_params);
    for (double& v : va.d_k_test_diag) v *= w;
    const KernelGradient gd = kernel_diag_backward(kp, z_u, va.d_k_test_diag);
    add_log(gd.d_log_params);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < q; ++c) d_z(i, c) += gc.d_a(i, c);
    for (std::size_t j = 0; j < m; ++j)
      for (std::size_t c = 0; c < q; ++c) d_z(n + j, c) += gc.d_b(j, c) + gd.d_a(j, c);
  }

  const KernelGradient gk = kernel_backward(kp, z_l, z_l, d_k);
  add_log(gk.d_log_params);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < q; ++c) d_z(i, c) += gk.d_a(i, c) + gk.d_b(i, c);
  out.grad_kernel[kp.noise_index()] += noise_backward(kp, d_k);

  out.grad_net = deep_embed_backward(dk, emb, d_z).d_params.flatten();
  out.loss = nl.value / static_cast<double>(n) + (m > 0 ? alpha / static_cast<double>(m) * out.variance : 0.0);
  return out;
}

DeepKernel init_deep_kernel(const TrainConfig& config, std::size_t input_dim) {
  if (config.spatial_dims > 0 && config.spatial_dims >= input_dim) {
    throw DimensionMismatch("spatial_dims must leave at least one network input column");
  }
  std::vector<std::size_t> sizes{input_dim - config.spatial_dims};
  sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
  sizes.push_back(config.embedding_dim);
  Rng rng(config.seed);
  DeepKernel dk;
  dk.net = MlpParams::glorot(sizes, rng);
  BaseKernel base{config.kernel, config.degree, 0.0, 0.0};
  if (config.spatial_dims > 0) {
    dk.kernel = KernelParams::sum(base, BaseKernel{KernelKind::Rbf, 2, 0.0, 0.0}, config.embedding_dim);
    dk.passthrough_cols = config.spatial_dims;
  } else {
    dk.kernel.base = base;
  }
  return dk;
}

Vector pack_params(const DeepKernel& dk) {
  Vector flat = dk.net.flatten();
  const Vector lp = dk.kernel.log_params();
  flat.insert(flat.end(), lp.begin(), lp.end());
  return flat;
}

void unpack_params(DeepKernel& dk, std::span<const double> flat) {
  const std::size_t nn = dk.net.num_params();
  if (flat.size() != nn + dk.kernel.num_log_params()) throw DimensionMismatch("unpack_params: wrong length");
  dk.net.assign(flat.first(nn));
  dk.kernel.set_log_params(flat.subspan(nn));
}

Predictive predict_standardized(const TrainedModel& model, const Matrix& x_std) {
  const KernelParams& kp = model.model.kernel;
  const Matrix z_l = deep_features(model.model, model.labeled_x);
  const Matrix z_t = deep_features(model.model, x_std);
  const Matrix k = add_noise_diag(kernel_matrix(kp, z_l, z_l), kp);
  const CholFactor chol = cholesky(k);
  const Vector alpha = solve_chol(chol, model.labeled_y);
  return posterior_predict(chol, alpha, kernel_matrix(kp, z_l, z_t), kernel_diag(kp, z_t));
}

Predictive predict(const TrainedModel& model, const Matrix& x_raw) {
  Predictive p = predict_standardized(model, model.standardizer.features(x_raw));
  p.mean = model.standardizer.unstandardize_targets(p.mean);
  p.var = model.standardizer.unstandardize_variances(p.var);
  return p;
}

namespace {

double validation_rmse(const TrainedModel& model, const TrainingData& data) {
  if (data.x_val.rows() == 0) return std::numeric_limits<double>::quiet_NaN();
  const Predictive p = predict_standardized(model, data.x_val);
  return rmse(p.mean, data.y_val) * data.standardizer.target_std;
}

}  // namespace

TrainedModel train(const TrainConfig& config, const TrainingData& data) {
  if (data.x_train.rows() == 0) throw EmptyLabeledSet("train: labeled-train partition is empty");
  if (config.alpha < 0.0) throw DimensionMismatch("train: alpha must be non-negative");
  const std::size_t m = data.x_unlabeled.rows();
  if (m > 0 && config.unlabeled_batch == 0) throw DimensionMismatch("train: unlabeled_batch must be >= 1");

  TrainedModel model;
  model.model = init_deep_kernel(config, data.x_train.cols());
  model.labeled_x = data.x_train;
  model.labeled_y = data.y_train;
  model.standardizer = data.standardizer;
  model.alpha = config.likelihood_only ? 0.0 : config.alpha;

  DeepKernel& dk = model.model;
  AdamState net_opt(dk.net.num_params(), config.lr_net, config.weight_decay);
  AdamState gp_opt(dk.kernel.num_log_params(), config.lr_gp, 0.0);
  Rng shuffle_rng(derive_seed(config.seed, 0x5eed));

  DeepKernel best = dk;
  double best_val = validation_rmse(model, data);
  model.history.push_back({0, std::numeric_limits<double>::quiet_NaN(), best_val});
  model.best_epoch = 0;
  std::size_t since_best = 0;

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t batch = std::max<std::size_t>(1, config.unlabeled_batch);
  const std::size_t steps = m == 0 ? 1 : (m + batch - 1) / batch;
  const Matrix no_unlabeled;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    shuffle_rng.shuffle(std::span<std::size_t>(order));
    double loss_sum = 0.0;
    for (std::size_t s = 0; s < steps; ++s) {
      Matrix x_u;
      if (m > 0 && !config.likelihood_only) {
        const std::size_t end = std::min(m, (s + 1) * batch);
        x_u = select_rows(data.x_unlabeled, std::span(order).subspan(s * batch, end - s * batch));
      }
      SemisupLoss lg;
      try {
        lg = semisup_loss(dk, data.x_train, data.y_train, x_u.rows() > 0 ? x_u : no_unlabeled, model.alpha);
      } catch (const NotPositiveDefinite& e) {
        throw TrainingDiverged("epoch " + std::to_string(epoch) + ": " + e.what());
      } catch (const NegativeVariance& e) {
        throw TrainingDiverged("epoch " + std::to_string(epoch) + ": " + e.what());
      } catch (const NonFinite& e) {
        throw TrainingDiverged("epoch " + std::to_string(epoch) + ": " + e.what());
      }
      if (!std::isfinite(lg.loss) || !all_finite(lg.grad_net) || !all_finite(lg.grad_kernel)) {
        std::ostringstream msg;
        msg << "epoch " << epoch << " step " << s << ": non-finite loss " << lg.loss;
        throw TrainingDiverged(msg.str());
      }
      loss_sum += lg.loss;
      Vector net_flat = dk.net.flatten();
      adam_step(net_opt, net_flat, lg.grad_net);
      dk.net.assign(net_flat);
      Vector log_flat = dk.kernel.log_params();
      adam_step(gp_opt, log_flat, lg.grad_kernel);
      dk.kernel.set_log_params(log_flat);
    }
    double val;
    try {
      val = validation_rmse(model, data);
    } catch (const Error& e) {
      throw TrainingDiverged("epoch " + std::to_string(epoch) + " validation: " + e.what());
    }
    model.history.push_back({epoch, loss_sum / static_cast<double>(steps), val});
    if (std::isnan(val)) {
      best = dk;
      model.best_epoch = epoch;
      continue;
    }
    if (!std::isfinite(val)) throw TrainingDiverged("epoch " + std::to_string(epoch) + ": non-finite validation RMSE");
    if (!(val >= best_val)) {
      best_val = val;
      best = dk;
      model.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }
  model.model = std::move(best);
  model.best_val_rmse = best_val;
  return model;
}

TrainedModel train_dkl(TrainConfig config, const TrainingData& data) {
  config.alpha = 0.0;
  config.likelihood_only = true;
  return train(config, data);
}

AlphaSelection select_alpha(const TrainConfig& config, const TrainingData& data) {
  if (config.alpha_grid.empty()) throw DimensionMismatch("select_alpha: empty alpha grid");
  std::vector<double> grid = config.alpha_grid;
  std::sort(grid.begin(), grid.end());
  AlphaSelection sel;
  bool have = false;
  for (double a : grid) {
    TrainConfig c = config;
    c.alpha = a;
    c.likelihood_only = false;
    AlphaArm arm{a, std::numeric_limits<double>::infinity(), false, {}};
    try {
      TrainedModel tm = train(c, data);
      arm.val_rmse = tm.best_val_rmse;
      if (!std::isfinite(arm.val_rmse)) {
        arm.diverged = true;
        arm.message = "non-finite validation RMSE";
      } else if (!have || arm.val_rmse < sel.model.best_val_rmse) {
        sel.best_alpha = a;
        sel.model = std::move(tm);
        have = true;
      }
    } catch (const TrainingDiverged& e) {
      arm.diverged = true;
      arm.message = e.what();
    }
    sel.arms.push_back(std::move(arm));
  }
  if (!have) throw TrainingDiverged("select_alpha: every grid value diverged");
  return sel;
}

GradCheckReport grad_check(const LossFn& loss, std::span<const double> params, double h, double tol) {
  Vector analytic;
  loss(params, &analytic);
  if (analytic.size() != params.size()) throw DimensionMismatch("grad_check: gradient length != parameter count");
  GradCheckReport rep;
  rep.rel_errors.resize(params.size());
  Vector p(params.begin(), params.end());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double orig = p[i];
    p[i] = orig + h;
    const double fp = loss(p, nullptr);
    p[i] = orig - h;
    const double fm = loss(p, nullptr);
    p[i] = orig;
    const double fd = (fp - fm) / (2.0 * h);
    const double denom = std::max({std::abs(analytic[i]), std::abs(fd), 1e-5});
    const double rel = std::abs(analytic[i] - fd) / denom;
    rep.rel_errors[i] = rel;
    rep.max_rel_error = std::max(rep.max_rel_error, rel);
    if (!(rel <= tol)) rep.failures.push_back(i);
  }
  return rep;
}

GradCheckInstance random_gradcheck_instance(const GradCheckShape& shape, std::uint64_t seed) {
  TrainConfig tc;
  tc.seed = seed;
  tc.hidden = {shape.width, shape.width};
  tc.embedding_dim = shape.embedding_dim;
  tc.kernel = shape.kernel;
  tc.degree = shape.degree;
  tc.spatial_dims = shape.spatial_dims;
  GradCheckInstance inst;
  inst.model = init_deep_kernel(tc, shape.input_dim + shape.spatial_dims);
  inst.alpha = shape.alpha;
  Rng rng(derive_seed(seed, 0x9c));
  // Nonzero biases keep pre-activations off the ReLU kink.
  for (auto& layer : inst.model.net.layers)
    for (double& b : layer.bias) b = rng.uniform(-0.5, 0.5);
  Vector lp = inst.model.kernel.log_params();
  for (double& v : lp) v = rng.uniform(-1.0, 0.5);
  lp[inst.model.kernel.noise_index()] = rng.uniform(-3.0, -1.0);
  inst.model.kernel.set_log_params(lp);
  auto fill = [&](std::size_t rows) {
    Matrix x(rows, shape.input_dim + shape.spatial_dims);
    for (double& v : x.values()) v = rng.normal();
    return x;
  };
  inst.x_labeled = fill(shape.n);
  inst.x_unlabeled = fill(shape.m);
  inst.y_labeled.resize(shape.n);
  for (double& v : inst.y_labeled) v = rng.normal();
  return inst;
}

LossFn semisup_loss_fn(DeepKernel dk, Matrix x_labeled, Vector y_labeled, Matrix x_unlabeled, double alpha) {
  return [dk = std::move(dk), xl = std::move(x_labeled), yl = std::move(y_labeled), xu = std::move(x_unlabeled),
          alpha](std::span<const double> params, Vector* grad) mutable {
    unpack_params(dk, params);
    SemisupLoss r = semisup_loss(dk, xl, yl, xu, alpha);
    if (grad) {
      *grad = std::move(r.grad_net);
      grad->insert(grad->end(), r.grad_kernel.begin(), r.grad_kernel.end());
    }
    return r.loss;
  };
}

namespace {

void write_base(std::ostream& out, const BaseKernel& b) {
  binary::write_u64(out, b.kind == KernelKind::Rbf ? 0 : 1);
  binary::write_u64(out, static_cast<std::uint64_t>(b.degree));
  binary::write_f64(out, b.log_signal_var);
  binary::write_f64(out, b.log_length_scale_sq);
}

BaseKernel read_base(std::istream& in) {
  BaseKernel b;
  const auto kind = binary::read_u64(in);
  if (kind > 1) throw FormatError("model checkpoint: unknown kernel kind");
  b.kind = kind == 0 ? KernelKind::Rbf : KernelKind::Polynomial;
  b.degree = static_cast<int>(binary::read_u64(in));
  b.log_signal_var = binary::read_f64(in);
  b.log_length_scale_sq = binary::read_f64(in);
  return b;
}

void write_vector(std::ostream& out, std::span<const double> v) {
  binary::write_u64(out, v.size());
  for (double x : v) binary::write_f64(out, x);
}

Vector read_vector(std::istream& in) {
  const auto n = binary::read_u64(in);
  if (n > (1ull << 32)) throw FormatError("model checkpoint: implausible vector length");
  Vector v(n);
  for (double& x : v) x = binary::read_f64(in);
  return v;
}

}  // namespace

void write_model(std::ostream& out, const TrainedModel& model) {
  binary::write_magic(out, "SSKLMDL1");
  write_mlp(out, model.model.net);
  const KernelParams& kp = model.model.kernel;
  binary::write_u64(out, kp.is_sum() ? 1 : 0);
  write_base(out, kp.base);
  if (kp.is_sum()) {
    write_base(out, *kp.right);
    binary::write_u64(out, kp.feature_split);
  }
  binary::write_f64(out, kp.log_noise_var);
  binary::write_u64(out, model.model.passthrough_cols);
  const Standardizer& st = model.standardizer;
  write_vector(out, st.feature_mean);
  write_vector(out, st.feature_std);
  binary::write_f64(out, st.target_mean);
  binary::write_f64(out, st.target_std);
  binary::write_u64(out, model.labeled_x.rows());
  binary::write_u64(out, model.labeled_x.cols());
  for (double v : model.labeled_x.values()) binary::write_f64(out, v);
  write_vector(out, model.labeled_y);
  binary::write_f64(out, model.alpha);
}

TrainedModel read_model(std::istream& in) {
  binary::expect_magic(in, "SSKLMDL1");
  TrainedModel m;
  m.model.net = read_mlp(in);
  const bool is_sum = binary::read_u64(in) == 1;
  m.model.kernel.base = read_base(in);
  if (is_sum) {
    m.model.kernel.right = read_base(in);
    m.model.kernel.feature_split = binary::read_u64(in);
  }
  m.model.kernel.log_noise_var = binary::read_f64(in);
  m.model.passthrough_cols = binary::read_u64(in);
  m.standardizer.feature_mean = read_vector(in);
  m.standardizer.feature_std = read_vector(in);
  m.standardizer.target_mean = binary::read_f64(in);
  m.standardizer.target_std = binary::read_f64(in);
  const auto rows = binary::read_u64(in);
  const auto cols = binary::read_u64(in);
  if (rows > (1ull << 24) || cols > (1ull << 16)) throw FormatError("model checkpoint: implausible labeled shape");
  Vector xs(rows * cols);
  for (double& v : xs) v = binary::read_f64(in);
  m.labeled_x = Matrix(rows, cols, std::move(xs));
  m.labeled_y = read_vector(in);
  if (m.labeled_y.size() != rows) throw FormatError("model checkpoint: labeled target length");
  m.alpha = binary::read_f64(in);
  return m;
}

}  // namespace sskl
