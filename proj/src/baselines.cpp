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

#include "sskl/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sskl/errors.hpp"

namespace sskl {

namespace {

/// Monotone in the Minkowski distance: sum |a_c - b_c|^order.
double minkowski_key(const double* a, const double* b, std::size_t n, double order) {
  double s = 0.0;
  if (order == 2.0) {
    for (std::size_t c = 0; c < n; ++c) s += (a[c] - b[c]) * (a[c] - b[c]);
  } else if (order == 1.0) {
    for (std::size_t c = 0; c < n; ++c) s += std::abs(a[c] - b[c]);
  } else {
    for (std::size_t c = 0; c < n; ++c) s += std::pow(std::abs(a[c] - b[c]), order);
  }
  return s;
}

struct Neighbor {
  double key;
  std::size_t index;
  bool operator<(const Neighbor& o) const { return key < o.key || (key == o.key && index < o.index); }
};

}  // namespace

double knn_predict(const Matrix& train_x, std::span<const double> train_y, std::span<const double> query,
                   std::size_t k, double order) {
  const std::size_t n = train_x.rows();
  if (n == 0 || k == 0) throw EmptyTrainingSet("knn_predict: empty training set or k = 0");
  if (train_y.size() != n) throw DimensionMismatch("knn_predict: target length");
  if (query.size() != train_x.cols()) throw DimensionMismatch("knn_predict: query dimension");
  k = std::min(k, n);
  std::vector<Neighbor> nb(n);
  for (std::size_t i = 0; i < n; ++i) nb[i] = {minkowski_key(train_x.row(i).data(), query.data(), query.size(), order), i};
  std::partial_sort(nb.begin(), nb.begin() + static_cast<std::ptrdiff_t>(k), nb.end());
  double s = 0.0;
  for (std::size_t i = 0; i < k; ++i) s += train_y[nb[i].index];
  return s / static_cast<double>(k);
}

Vector KnnRegressor::predict(const Matrix& queries) const {
  Vector out(queries.rows());
  for (std::size_t i = 0; i < queries.rows(); ++i) out[i] = predict(queries.row(i));
  return out;
}

double loo_sse(const Matrix& x, std::span<const double> y, std::size_t k, double order, std::size_t tail) {
  const std::size_t n = x.rows();
  if (tail > n) throw DimensionMismatch("loo_sse: tail larger than the set");
  double sse = 0.0;
  std::vector<Neighbor> nb;
  for (std::size_t i = 0; i + tail < n; ++i) {
    nb.clear();
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) nb.push_back({minkowski_key(x.row(i).data(), x.row(j).data(), x.cols(), order), j});
    if (nb.empty()) continue;
    const std::size_t kk = std::min(k, nb.size());
    std::sort(nb.begin(), nb.end());
    double s = 0.0;
    for (std::size_t t = 0; t < kk; ++t) s += y[nb[t].index];
    const double e = y[i] - s / static_cast<double>(kk);
    sse += e * e;
  }
  return sse;
}

KnnRegressor select_knn(const TrainingData& data, const std::vector<std::size_t>& k_grid, double order) {
  if (k_grid.empty()) throw DimensionMismatch("select_knn: empty k grid");
  KnnRegressor best{data.x_train, data.y_train, k_grid.front(), order};
  double best_err = std::numeric_limits<double>::infinity();
  for (std::size_t k : k_grid) {
    KnnRegressor r{data.x_train, data.y_train, k, order};
    const double err = data.x_val.rows() ? rmse(r.predict(data.x_val), data.y_val) : 0.0;
    if (err < best_err) {
      best_err = err;
      best = std::move(r);
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Coreg
// ---------------------------------------------------------------------------

namespace {

/// Leave-one-out neighborhoods of one learner, reused to score every candidate.
struct LooState {
  std::vector<double> sum;
  std::vector<std::size_t> count;
  std::vector<double> kth_key;
  std::vector<double> kth_y;
  std::vector<double> err;
  double sse = 0.0;
};

LooState build_loo(const KnnRegressor& r) {
  const std::size_t n = r.x.rows();
  LooState st;
  st.sum.assign(n, 0.0);
  st.count.assign(n, 0);
  st.kth_key.assign(n, std::numeric_limits<double>::infinity());
  st.kth_y.assign(n, 0.0);
  st.err.assign(n, 0.0);
  std::vector<Neighbor> nb;
  for (std::size_t i = 0; i < n; ++i) {
    nb.clear();
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) nb.push_back({minkowski_key(r.x.row(i).data(), r.x.row(j).data(), r.x.cols(), r.order), j});
    const std::size_t kk = std::min(r.k, nb.size());
    if (kk == 0) continue;
    std::nth_element(nb.begin(), nb.begin() + static_cast<std::ptrdiff_t>(kk - 1), nb.end());
    double s = 0.0;
    Neighbor last = nb[0];
    for (std::size_t t = 0; t < kk; ++t) {
      s += r.y[nb[t].index];
      if (last < nb[t]) last = nb[t];
    }
    st.sum[i] = s;
    st.count[i] = kk;
    st.kth_key[i] = last.key;
    st.kth_y[i] = r.y[last.index];
    const double e = r.y[i] - s / static_cast<double>(kk);
    st.err[i] = e * e;
    st.sse += st.err[i];
  }
  return st;
}

/// LOO sse over the learner's current rows once (xc, yc) is appended.
double loo_with_candidate(const KnnRegressor& r, const LooState& st, std::span<const double> xc, double yc) {
  double sse = st.sse;
  for (std::size_t i = 0; i < r.x.rows(); ++i) {
    double pred;
    if (st.count[i] < r.k) {
      pred = (st.sum[i] + yc) / static_cast<double>(st.count[i] + 1);
    } else {
      // The candidate has the highest index, so it loses distance ties.
      const double key = minkowski_key(r.x.row(i).data(), xc.data(), xc.size(), r.order);
      if (!(key < st.kth_key[i])) continue;
      pred = (st.sum[i] - st.kth_y[i] + yc) / static_cast<double>(st.count[i]);
    }
    const double e = r.y[i] - pred;
    sse += e * e - st.err[i];
  }
  return sse;
}

void append_row(KnnRegressor& r, std::span<const double> x, double y) {
  Matrix row(1, x.size(), Vector(x.begin(), x.end()));
  r.x = vstack(r.x, row);
  r.y.push_back(y);
}

}  // namespace

Vector CoregModel::predict(const Matrix& queries) const {
  Vector a = learners[0].predict(queries);
  const Vector b = learners[1].predict(queries);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = 0.5 * (a[i] + b[i]);
  return a;
}

CoregModel coreg_train(const CoregConfig& config, const Matrix& x_labeled, std::span<const double> y_labeled,
                       const Matrix& x_unlabeled) {
  if (x_labeled.rows() == 0) throw EmptyTrainingSet("coreg_train: no labeled rows");
  if (config.k == 0) throw DimensionMismatch("coreg_train: k must be >= 1");
  CoregModel model;
  const Vector y(y_labeled.begin(), y_labeled.end());
  model.learners[0] = {x_labeled, y, config.k, config.metric_orders.first};
  model.learners[1] = {x_labeled, y, config.k, config.metric_orders.second};

  std::vector<std::size_t> reserve(x_unlabeled.rows());
  std::iota(reserve.begin(), reserve.end(), std::size_t{0});
  Rng rng(config.seed);
  rng.shuffle(std::span<std::size_t>(reserve));
  std::vector<std::size_t> pool;
  auto refill = [&] {
    while (pool.size() < config.pool_size && !reserve.empty()) {
      pool.push_back(reserve.back());
      reserve.pop_back();
    }
  };
  refill();

  for (std::size_t round = 1; round <= config.max_rounds && !pool.empty(); ++round) {
    model.rounds = round;
    struct Pick {
      bool found = false;
      std::size_t pool_pos = 0;
      CoregAcceptance record;
    } picks[2];
    // Both learners score against the round-start state so the outcome does
    // not depend on which learner is listed first.
    for (int j = 0; j < 2; ++j) {
      const KnnRegressor& learner = model.learners[j];
      const LooState st = build_loo(learner);
      double best_gain = 0.0;
      for (std::size_t p = 0; p < pool.size(); ++p) {
        const auto xc = x_unlabeled.row(pool[p]);
        const double yc = learner.predict(xc);
        const double after = loo_with_candidate(learner, st, xc, yc);
        const double gain = st.sse - after;
        if (gain > best_gain) {
          best_gain = gain;
          picks[j].found = true;
          picks[j].pool_pos = p;
          picks[j].record = {round, j, pool[p], yc, st.sse, after};
        }
      }
    }
    if (!picks[0].found && !picks[1].found) break;
    std::vector<std::size_t> taken;
    for (int j = 0; j < 2; ++j) {
      if (!picks[j].found) continue;
      const auto& rec = picks[j].record;
      append_row(model.learners[1 - j], x_unlabeled.row(rec.unlabeled_index), rec.pseudo_label);
      model.accepted.push_back(rec);
      taken.push_back(picks[j].pool_pos);
    }
    std::sort(taken.begin(), taken.end());
    taken.erase(std::unique(taken.begin(), taken.end()), taken.end());
    for (auto it = taken.rbegin(); it != taken.rend(); ++it) pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(*it));
    refill();
  }
  return model;
}

// ---------------------------------------------------------------------------
// Label propagation
// ---------------------------------------------------------------------------

namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) s += (a[c] - b[c]) * (a[c] - b[c]);
  return s;
}

double median_pairwise_distance(const Matrix& x) {
  std::vector<double> d;
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = i + 1; j < x.rows(); ++j) d.push_back(std::sqrt(sq_dist(x.row(i), x.row(j))));
  if (d.empty()) return 1.0;
  auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  return *mid > 0.0 ? *mid : 1.0;
}

}  // namespace

PropagationResult propagate_labels(const Matrix& x_labeled, std::span<const double> y_labeled,
                                   const Matrix& x_unlabeled, double scale, const LabelPropConfig& config) {
  const std::size_t n = x_labeled.rows();
  const std::size_t m = x_unlabeled.rows();
  if (n == 0) throw EmptyTrainingSet("propagate_labels: no labeled rows");
  if (!(scale > 0.0)) throw DimensionMismatch("propagate_labels: scale must be positive");
  PropagationResult res;
  res.unlabeled_values.resize(m);
  for (std::size_t u = 0; u < m; ++u)
    res.unlabeled_values[u] = knn_predict(x_labeled, y_labeled, x_unlabeled.row(u), config.init_knn_k, 2.0);
  if (m == 0) {
    res.converged = true;
    return res;
  }

  // Row u of the transition matrix: labeled part folded into `fixed`,
  // unlabeled part kept in `t_uu`.
  const double inv2s2 = 0.5 / (scale * scale);
  Vector fixed(m, 0.0);
  Matrix t_uu(m, m);
  Vector d_l(n);
  Vector d_u(m);
  for (std::size_t u = 0; u < m; ++u) {
    const auto xu = x_unlabeled.row(u);
    double dmin = std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < n; ++l) dmin = std::min(dmin, d_l[l] = sq_dist(xu, x_labeled.row(l)));
    for (std::size_t v = 0; v < m; ++v) {
      if (v == u) continue;
      dmin = std::min(dmin, d_u[v] = sq_dist(xu, x_unlabeled.row(v)));
    }
    // Shifting by the row minimum leaves the normalized row unchanged.
    double total = 0.0;
    double acc = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
      const double w = std::exp(-(d_l[l] - dmin) * inv2s2);
      total += w;
      acc += w * y_labeled[l];
    }
    auto row = t_uu.row(u);
    for (std::size_t v = 0; v < m; ++v) {
      if (v == u) continue;
      row[v] = std::exp(-(d_u[v] - dmin) * inv2s2);
      total += row[v];
    }
    fixed[u] = acc / total;
    for (double& w : row) w /= total;
  }

  Vector next(m);
  for (std::size_t it = 0; it < config.max_iters; ++it) {
    double change = 0.0;
    for (std::size_t u = 0; u < m; ++u) {
      next[u] = fixed[u] + dot(t_uu.row(u), res.unlabeled_values);
      change = std::max(change, std::abs(next[u] - res.unlabeled_values[u]));
    }
    res.unlabeled_values.swap(next);
    res.max_changes.push_back(change);
    res.iterations = it + 1;
    if (change <= config.tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

Vector LabelPropModel::predict(const Matrix& queries) const {
  const double inv2s2 = 0.5 / (scale * scale);
  Vector out(queries.rows());
  Vector d(nodes.rows());
  for (std::size_t q = 0; q < queries.rows(); ++q) {
    double dmin = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < nodes.rows(); ++j) dmin = std::min(dmin, d[j] = sq_dist(queries.row(q), nodes.row(j)));
    double total = 0.0;
    double acc = 0.0;
    for (std::size_t j = 0; j < nodes.rows(); ++j) {
      const double w = std::exp(-(d[j] - dmin) * inv2s2);
      total += w;
      acc += w * values[j];
    }
    out[q] = acc / total;
  }
  return out;
}

LabelPropModel label_prop(const LabelPropConfig& config, const Matrix& x_labeled, std::span<const double> y_labeled,
                          const Matrix& x_unlabeled, const Matrix& x_val, std::span<const double> y_val) {
  if (config.rbf_scale_grid.empty()) throw DimensionMismatch("label_prop: empty scale grid");
  if (config.max_unlabeled == 0) throw DimensionMismatch("label_prop: max_unlabeled must be >= 1");
  const Matrix xu = x_unlabeled.rows() > config.max_unlabeled ? row_block(x_unlabeled, 0, config.max_unlabeled)
                                                                : x_unlabeled;
  const double unit = median_pairwise_distance(x_labeled);
  LabelPropModel best;
  double best_err = std::numeric_limits<double>::infinity();
  bool have = false;
  for (double mult : config.rbf_scale_grid) {
    LabelPropModel m;
    m.scale = mult * unit;
    m.propagation = propagate_labels(x_labeled, y_labeled, xu, m.scale, config);
    m.nodes = vstack(x_labeled, xu);
    m.values.assign(y_labeled.begin(), y_labeled.end());
    m.values.insert(m.values.end(), m.propagation.unlabeled_values.begin(), m.propagation.unlabeled_values.end());
    const double err = x_val.rows() ? rmse(m.predict(x_val), y_val) : 0.0;
    if (!have || err < best_err) {
      best_err = err;
      best = std::move(m);
      have = true;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// MLP regressors
// ---------------------------------------------------------------------------

Vector RegressorModel::predict(const Matrix& x_raw) const {
  const Matrix out = mlp_apply(net, standardizer.features(x_raw));
  return standardizer.unstandardize_targets(out.col(0));
}

namespace {

MlpParams init_regressor(const RegressorConfig& config, std::size_t input_dim) {
  std::vector<std::size_t> sizes{input_dim};
  sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
  sizes.push_back(1);
  Rng rng(config.seed);
  return MlpParams::glorot(sizes, rng);
}

double val_rmse_of(const MlpParams& net, const TrainingData& data) {
  if (data.x_val.rows() == 0) return std::numeric_limits<double>::quiet_NaN();
  return rmse(mlp_apply(net, data.x_val).col(0), data.y_val) * data.standardizer.target_std;
}

/// Epoch loop shared by the regressors: shuffled unlabeled batches, one step
/// each, validation after every epoch on `eval_net()`, best-epoch restore.
template <typename StepFn, typename EvalFn>
RegressorModel run_regressor_loop(const RegressorConfig& config, const TrainingData& data, StepFn&& step,
                                  EvalFn&& eval_net) {
  if (data.x_train.rows() == 0) throw EmptyLabeledSet("regressor: labeled-train partition is empty");
  RegressorModel model;
  model.standardizer = data.standardizer;
  const std::size_t m = data.x_unlabeled.rows();
  const std::size_t batch = std::max<std::size_t>(1, config.unlabeled_batch);
  const std::size_t steps = m == 0 ? 1 : (m + batch - 1) / batch;
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng shuffle_rng(derive_seed(config.seed, 0x5eed));

  MlpParams best = eval_net();
  double best_val = val_rmse_of(best, data);
  model.history.push_back({0, std::numeric_limits<double>::quiet_NaN(), best_val});
  std::size_t since_best = 0;
  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    shuffle_rng.shuffle(std::span<std::size_t>(order));
    double loss_sum = 0.0;
    for (std::size_t s = 0; s < steps; ++s) {
      Matrix x_u;
      if (m > 0) {
        const std::size_t end = std::min(m, (s + 1) * batch);
        x_u = select_rows(data.x_unlabeled, std::span(order).subspan(s * batch, end - s * batch));
      }
      double loss;
      try {
        loss = step(x_u);
      } catch (const NonFinite& e) {
        throw TrainingDiverged("epoch " + std::to_string(epoch) + ": " + e.what());
      }
      if (!std::isfinite(loss)) throw TrainingDiverged("epoch " + std::to_string(epoch) + ": non-finite loss");
      loss_sum += loss;
    }
    const MlpParams& current = eval_net();
    double val;
    try {
      val = val_rmse_of(current, data);
    } catch (const NonFinite& e) {
      throw TrainingDiverged("epoch " + std::to_string(epoch) + " validation: " + e.what());
    }
    model.history.push_back({epoch, loss_sum / static_cast<double>(steps), val});
    if (std::isnan(val)) {
      best = current;
      model.best_epoch = epoch;
      continue;
    }
    if (!(val >= best_val)) {
      best_val = val;
      best = current;
      model.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }
  model.net = std::move(best);
  model.best_val_rmse = best_val;
  return model;
}

void apply_adam(AdamState& opt, MlpParams& net, const Vector& grad) {
  Vector flat = net.flatten();
  adam_step(opt, flat, grad);
  net.assign(flat);
}

}  // namespace

RegressorModel train_mlp_regressor(const RegressorConfig& config, const TrainingData& data,
                                   const StepObserver& observer) {
  MlpParams net = init_regressor(config, data.x_train.cols());
  AdamState opt(net.num_params(), config.lr, config.weight_decay);
  const double n = static_cast<double>(data.x_train.rows());
  auto step = [&](const Matrix&) {
    MlpForward f = mlp_forward(net, data.x_train);
    Matrix d(f.output.rows(), 1);
    double loss = 0.0;
    for (std::size_t i = 0; i < f.output.rows(); ++i) {
      const double e = f.output(i, 0) - data.y_train[i];
      loss += e * e / n;
      d(i, 0) = 2.0 * e / n;
    }
    apply_adam(opt, net, mlp_backward(net, f.cache, d).d_params.flatten());
    if (observer) observer(net, nullptr);
    return loss;
  };
  return run_regressor_loop(config, data, step, [&]() -> const MlpParams& { return net; });
}

// ---------------------------------------------------------------------------
// VAT
// ---------------------------------------------------------------------------

Matrix vat_perturbations(const MlpParams& net, const Matrix& x, const VatConfig& config, Rng& rng) {
  if (!(config.epsilon > 0.0)) throw DimensionMismatch("vat: epsilon must be positive");
  const Matrix h = mlp_apply(net, x);
  Matrix dir(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto row = dir.row(i);
    double norm = 0.0;
    while (norm == 0.0) {
      for (double& v : row) v = rng.normal();
      norm = norm2(row);
    }
    for (double& v : row) v /= norm;
  }
  Matrix probe = x;
  for (std::size_t i = 0; i < probe.size(); ++i) probe.values()[i] += config.xi * dir.values()[i];
  const MlpForward f = mlp_forward(net, probe);
  // d/dr of |h(x) - h(x + r)|^2 / (2 sigma^2) at r = xi * dir.
  Matrix cot(h.rows(), h.cols());
  const double inv_s2 = 1.0 / (config.sigma * config.sigma);
  for (std::size_t i = 0; i < cot.size(); ++i) cot.values()[i] = -(h.values()[i] - f.output.values()[i]) * inv_s2;
  const Matrix g = mlp_backward(net, f.cache, cot).d_x;

  Matrix r(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const double norm = norm2(g.row(i));
    auto out = r.row(i);
    if (norm > 0.0 && std::isfinite(norm)) {
      for (std::size_t c = 0; c < out.size(); ++c) out[c] = config.epsilon * g(i, c) / norm;
    } else {
      for (std::size_t c = 0; c < out.size(); ++c) out[c] = config.epsilon * dir(i, c);
    }
  }
  return r;
}

VatLoss vat_loss(const MlpParams& net, const Matrix& x_labeled, std::span<const double> y_labeled,
                 const Matrix& x_unlabeled, const VatConfig& config, Rng& rng) {
  const std::size_t n = x_labeled.rows();
  if (n == 0) throw EmptyLabeledSet("vat_loss: no labeled rows");
  if (y_labeled.size() != n) throw DimensionMismatch("vat_loss: target length");
  const Matrix x_all = vstack(x_labeled, x_unlabeled);
  const std::size_t total = x_all.rows();
  VatLoss out;
  out.r_adv = vat_perturbations(net, x_all, config, rng);
  const MlpForward clean = mlp_forward(net, x_all);
  const MlpForward pert = mlp_forward(net, x_all + out.r_adv);

  const std::size_t h = clean.output.cols();
  Matrix d_clean(total, h);
  Matrix d_pert(total, h);
  const double inv_s2 = 1.0 / (config.sigma * config.sigma);
  const double wl = config.lambda / static_cast<double>(total);
  for (std::size_t i = 0; i < total; ++i) {
    for (std::size_t c = 0; c < h; ++c) {
      const double diff = clean.output(i, c) - pert.output(i, c);
      out.lds += 0.5 * diff * diff * inv_s2;
      d_clean(i, c) += wl * diff * inv_s2;
      d_pert(i, c) -= wl * diff * inv_s2;
    }
  }
  out.lds /= static_cast<double>(total);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < h; ++c) {
      const double e = clean.output(i, c) - y_labeled[i];
      out.mse += e * e / static_cast<double>(n);
      d_clean(i, c) += 2.0 * e / static_cast<double>(n);
    }
  }
  out.loss = out.mse + config.lambda * out.lds;
  out.grad = mlp_backward(net, clean.cache, d_clean).d_params.flatten();
  const Vector gp = mlp_backward(net, pert.cache, d_pert).d_params.flatten();
  for (std::size_t i = 0; i < out.grad.size(); ++i) out.grad[i] += gp[i];
  return out;
}

RegressorModel train_vat(const VatConfig& vat, const RegressorConfig& config, const TrainingData& data) {
  MlpParams net = init_regressor(config, data.x_train.cols());
  AdamState opt(net.num_params(), config.lr, config.weight_decay);
  Rng rng(derive_seed(config.seed, 0xa7));
  auto step = [&](const Matrix& x_u) {
    const VatLoss l = vat_loss(net, data.x_train, data.y_train, x_u, vat, rng);
    apply_adam(opt, net, l.grad);
    return l.loss;
  };
  return run_regressor_loop(config, data, step, [&]() -> const MlpParams& { return net; });
}

VatSelection select_vat(const VatConfig& vat, const RegressorConfig& config, const TrainingData& data) {
  VatSelection best;
  bool have = false;
  for (double eps : vat.epsilon_grid) {
    for (double lam : vat.lambda_grid) {
      VatConfig c = vat;
      c.epsilon = eps;
      c.lambda = lam;
      try {
        RegressorModel m = train_vat(c, config, data);
        if (!have || m.best_val_rmse < best.model.best_val_rmse) {
          best = {eps, lam, std::move(m)};
          have = true;
        }
      } catch (const TrainingDiverged&) {
      }
    }
  }
  if (!have) throw TrainingDiverged("select_vat: every grid point diverged");
  return best;
}

// ---------------------------------------------------------------------------
// Mean teacher
// ---------------------------------------------------------------------------

MeanTeacherModel train_mean_teacher(const MeanTeacherConfig& mt, const RegressorConfig& config,
                                    const TrainingData& data, const StepObserver& observer) {
  if (!(mt.ema_decay > 0.0 && mt.ema_decay <= 1.0)) throw DimensionMismatch("mean teacher: ema_decay must be in (0, 1]");
  MlpParams student = init_regressor(config, data.x_train.cols());
  MlpParams teacher = student;
  AdamState opt(student.num_params(), config.lr, config.weight_decay);
  Rng noise_rng(derive_seed(config.seed, 0x7ea));
  const std::size_t n = data.x_train.rows();

  auto noisy = [&](const Matrix& x) {
    Matrix out = x;
    if (mt.noise_std > 0.0)
      for (double& v : out.values()) v += mt.noise_std * noise_rng.normal();
    return out;
  };

  auto step = [&](const Matrix& x_u) {
    const Matrix x_all = vstack(data.x_train, x_u);
    const std::size_t total = x_all.rows();
    const MlpForward s = mlp_forward(student, noisy(x_all));
    const Matrix t = mlp_apply(teacher, noisy(x_all));
    Matrix d(total, 1);
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = s.output(i, 0) - data.y_train[i];
      loss += e * e / static_cast<double>(n);
      d(i, 0) = 2.0 * e / static_cast<double>(n);
    }
    const double w = mt.consistency_weight / static_cast<double>(total);
    for (std::size_t i = 0; i < total; ++i) {
      const double diff = s.output(i, 0) - t(i, 0);
      loss += w * diff * diff;
      d(i, 0) += 2.0 * w * diff;
    }
    apply_adam(opt, student, mlp_backward(student, s.cache, d).d_params.flatten());

    Vector tf = teacher.flatten();
    const Vector sf = student.flatten();
    for (std::size_t i = 0; i < tf.size(); ++i) tf[i] = mt.ema_decay * tf[i] + (1.0 - mt.ema_decay) * sf[i];
    teacher.assign(tf);
    if (observer) observer(student, &teacher);
    return loss;
  };
  MeanTeacherModel out;
  out.teacher = run_regressor_loop(config, data, step, [&]() -> const MlpParams& { return teacher; });
  out.student = student;
  return out;
}

}  // namespace sskl
