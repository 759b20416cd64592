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

// Acceptance suite: one PASS/FAIL line per criterion. Exit status is nonzero
// if any criterion fails, except those listed with --allow-fail. --report
// also writes the lines to a file. SSKL_UCI_CSV names an optional UCI-style
// CSV for the real-data half of the directional check.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "tasks.hpp"
#include "sskl/baselines.hpp"
#include "sskl/errors.hpp"
#include "sskl/experiment.hpp"
#include "sskl/gp.hpp"
#include "sskl/kernels.hpp"
#include "sskl/trainer.hpp"

using namespace sskl;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int prec = 3) {
  std::ostringstream s;
  s << std::setprecision(prec) << v;
  return s.str();
}

std::string fixed(double v, int prec = 2) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(prec) << v;
  return s.str();
}

// GP NLML and posterior against explicit inversion and determinant.
Outcome gp_oracle() {
  constexpr double kTol = 1e-8;
  constexpr double kBudget = 5.0;
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    Rng rng(derive_seed(1, s));
    const std::size_t n = 1 + s % 6;
    const std::size_t t = 1 + s % 3;
    const std::size_t d = 1 + s % 3;
    const KernelParams kp = s % 2 == 0
                                ? KernelParams::rbf(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-3, 0))
                                : KernelParams::polynomial(1 + static_cast<int>(s % 3), rng.uniform(-1, 1),
                                                           rng.uniform(-1, 1), rng.uniform(-3, 0));
    const Matrix xl = oracle::random_matrix(n, d, rng);
    const Matrix xt = oracle::random_matrix(t, d, rng);
    Vector y(n);
    for (double& v : y) v = rng.normal();
    const Matrix kn = add_noise_diag(kernel_matrix(kp, xl, xl), kp);
    const Matrix kc = kernel_matrix(kp, xl, xt);
    const Vector kd = kernel_diag(kp, xt);
    worst = std::max(worst, oracle::rel_err(neg_log_marginal_likelihood(kn, y).value, oracle::gaussian_nlml(kn, y)));
    const GpPosterior p = condition(kn, y, kc, kd);
    const auto [mean, var] = oracle::gaussian_posterior(kn, y, kc, kd);
    for (std::size_t j = 0; j < t; ++j) {
      worst = std::max(worst, oracle::rel_err(p.pred_mean[j], mean[j]));
      // Variances are compared on the scale of the prior variance.
      worst = std::max(worst, oracle::rel_err(p.pred_var[j], var[j], kd[j]));
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {worst <= kTol && secs < kBudget,
          "200 instances, worst relative error " + fmt(worst) + " (<= 1e-08), " + fixed(secs, 3) + " s (< 5 s)"};
}

// Analytic gradients of the semi-supervised loss against central differences.
Outcome gradient_suite() {
  constexpr double kStep = 1e-5;
  constexpr double kTol = 1e-4;
  constexpr double kBudget = 30.0;
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t bad = 0;
  double worst = 0.0;
  std::size_t params = 0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    GradCheckShape shape;
    shape.n = 2 + s % 4;
    shape.m = s % 5;
    shape.input_dim = 1 + s % 4;
    shape.width = 2 + s % 7;
    shape.kernel = s % 2 == 0 ? KernelKind::Rbf : KernelKind::Polynomial;
    shape.degree = 1 + static_cast<int>(s % 3);
    shape.spatial_dims = s % 5 == 4 ? 2 : 0;
    shape.alpha = s % 3 == 0 ? 0.1 : 1.0 + static_cast<double>(s % 4);
    const auto inst = random_gradcheck_instance(shape, s);
    const Vector flat = pack_params(inst.model);
    params += flat.size();
    const auto rep = grad_check(
        semisup_loss_fn(inst.model, inst.x_labeled, inst.y_labeled, inst.x_unlabeled, inst.alpha), flat, kStep, kTol);
    worst = std::max(worst, rep.max_rel_error);
    bad += rep.ok() ? 0 : 1;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {bad == 0 && secs < kBudget, std::to_string(50 - bad) + "/50 instances (" + std::to_string(params) +
                                          " parameters), worst relative error " + fmt(worst) + " (<= 1e-04), " +
                                          fixed(secs, 2) + " s (< 30 s)"};
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

bool same_bits(const Vector& a, const Vector& b) {
  return a.size() == b.size() && (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

// alpha = 0 SSDKL against DKL, epoch by epoch.
Outcome reduction_identity() {
  const auto task = tasks::sine(40, 10, 200, 0, 11);
  TrainConfig cfg;
  cfg.max_epochs = 50;
  cfg.patience = 1000;
  cfg.seed = 5;
  cfg.alpha = 0.0;
  const TrainedModel semi = train(cfg, task.data);
  const TrainedModel sup = train_dkl(cfg, task.data);
  bool same = semi.history.size() == 51 && sup.history.size() == 51;
  for (std::size_t e = 0; same && e < semi.history.size(); ++e) {
    same = same && semi.history[e].epoch == sup.history[e].epoch &&
           same_bits(semi.history[e].val_rmse, sup.history[e].val_rmse) &&
           (e == 0 || same_bits(semi.history[e].train_loss, sup.history[e].train_loss));
  }
  same = same && same_bits(pack_params(semi.model), pack_params(sup.model)) && semi.best_epoch == sup.best_epoch;
  cfg.alpha = 1.0;
  const TrainedModel other = train(cfg, task.data);
  const bool sensitive = !same_bits(pack_params(other.model), pack_params(sup.model));
  return {same && sensitive, std::string("50 epochs, losses, validation RMSE and parameters ") +
                                 (same ? "bit-identical" : "DIFFER") + "; alpha=1 run " +
                                 (sensitive ? "differs" : "does not differ") + " (control)"};
}

double mean_variance(const TrainedModel& m, const Matrix& x) {
  const Vector v = predict_standardized(m, x).var;
  double s = 0.0;
  for (double a : v) s += a;
  return s / static_cast<double>(v.size());
}

// Predictive variance at unlabeled points, SSDKL(alpha=1) vs DKL.
Outcome variance_pressure() {
  constexpr std::size_t kRequired = 8;
  const Dataset ds = make_sine_dataset(20 + 200 + kTestHoldout, 0.1, 0);
  std::size_t wins = 0, fixed_wins = 0;
  std::ostringstream ratios;
  for (std::uint64_t t = 0; t < 10; ++t) {
    const SplitView split = make_split(ds, 20, t);
    TrainingData td = make_training_data(ds, split, 200);
    TrainConfig cfg;
    cfg.seed = derive_seed(0, t);
    cfg.alpha = 1.0;
    const double vs = mean_variance(train(cfg, td), td.x_unlabeled);
    const double vd = mean_variance(train_dkl(cfg, td), td.x_unlabeled);
    wins += vs <= vd ? 1 : 0;
    ratios << (t ? " " : "") << fixed(vs / vd, 2);
    // Same comparison at a fixed 50-epoch budget, without early stopping.
    td.x_val = Matrix(0, td.x_train.cols());
    td.y_val.clear();
    cfg.max_epochs = 50;
    fixed_wins += mean_variance(train(cfg, td), td.x_unlabeled) <= mean_variance(train_dkl(cfg, td), td.x_unlabeled);
  }
  return {wins >= kRequired, std::to_string(wins) + "/10 seeds with SSDKL variance <= DKL (need 8); ratios [" +
                                 ratios.str() + "]; fixed 50-epoch budget: " + std::to_string(fixed_wins) + "/10"};
}

ExperimentConfig protocol_config(const std::string& dataset) {
  std::istringstream in("dataset = " + dataset + "\nn_labeled = 100\ntrials = 10\nmethods = [dkl, ssdkl]\n");
  return parse_config(in);
}

const MethodSummary& summary_of(const ExperimentResult& r, const std::string& method) {
  for (const auto& s : r.summary)
    if (s.method == method) return s;
  throw std::runtime_error("no summary row for " + method);
}

std::string failures(const ExperimentResult& r) {
  std::size_t n = 0;
  for (const auto& c : r.cells) n += c.ok ? 0 : 1;
  return n ? ", " + std::to_string(n) + " failed cells" : "";
}

// SSDKL vs DKL at n=100 over 10 trials.
Outcome directional() {
  const ExperimentConfig cfg = protocol_config("synthetic:sine");
  const ExperimentResult r = run_experiment(cfg, load_dataset(cfg));
  const MethodSummary& s = summary_of(r, "ssdkl");
  bool pass = s.trials_ok == 10 && s.percent_reduction >= 0.0;
  std::string detail = "synthetic: DKL RMSE " + fmt(summary_of(r, "dkl").mean_test_rmse, 5) + ", SSDKL " +
                       fmt(s.mean_test_rmse, 5) + ", reduction " + fixed(s.percent_reduction) + "%" + failures(r);
  if (const char* path = std::getenv("SSKL_UCI_CSV")) {
    const ExperimentConfig ucfg = protocol_config(path);
    const ExperimentResult u = run_experiment(ucfg, load_dataset(ucfg));
    const MethodSummary& us = summary_of(u, "ssdkl");
    pass = pass && us.trials_ok == 10 && us.percent_reduction >= 0.0;
    detail += "; " + std::string(path) + ": reduction " + fixed(us.percent_reduction) + "%" + failures(u);
  } else {
    detail += "; UCI half not run (set SSKL_UCI_CSV)";
  }
  return {pass, detail};
}

// Every fixed alpha in the grid against DKL.
Outcome alpha_robustness() {
  constexpr double kFloor = -2.0;
  bool pass = true;
  std::string detail;
  for (double a : {0.1, 1.0, 10.0}) {
    ExperimentConfig cfg = protocol_config("synthetic:sine");
    cfg.alpha_grid = {a};
    const ExperimentResult r = run_experiment(cfg, load_dataset(cfg));
    const MethodSummary& s = summary_of(r, "ssdkl");
    pass = pass && s.trials_ok == 10 && s.percent_reduction >= kFloor;
    detail += (detail.empty() ? "" : ", ") + std::string("alpha=") + fmt(a) + ": " + fixed(s.percent_reduction) + "%" +
              failures(r);
  }
  return {pass, detail + " (each >= -2%)"};
}

Matrix line(std::initializer_list<double> v) {
  Matrix m(v.size(), 1);
  std::size_t i = 0;
  for (double x : v) m(i++, 0) = x;
  return m;
}

// Symmetric fixed point and clamping.
Outcome label_propagation() {
  constexpr double kTol = 1e-6;
  LabelPropConfig cfg;
  cfg.tol = kTol;
  cfg.max_iters = 1000;
  const PropagationResult r = propagate_labels(line({0, 2}), Vector{0, 1}, line({0.8, 1.0, 1.2}), 0.7, cfg);
  const double mid_err = std::abs(r.unlabeled_values[1] - 0.5);
  const double sym_err = std::abs(r.unlabeled_values[0] + r.unlabeled_values[2] - 1.0);
  bool clamped = true;
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto task = tasks::sine(15, 5, 60, 0, 30 + s);
    const LabelPropModel m = label_prop(cfg, task.data.x_train, task.data.y_train, task.data.x_unlabeled,
                                        task.data.x_val, task.data.y_val);
    for (std::size_t i = 0; i < task.data.y_train.size(); ++i)
      clamped = clamped && same_bits(m.values[i], task.data.y_train[i]);
  }
  const bool pass = r.converged && r.iterations <= 1000 && mid_err <= kTol && sym_err <= kTol && clamped;
  return {pass, "converged " + std::string(r.converged ? "yes" : "no") + " in " + std::to_string(r.iterations) +
                    " iterations, |v - 0.5| = " + fmt(mid_err) + ", clamped labels " +
                    (clamped ? "unchanged" : "MOVED") + " on 5 random graphs"};
}

// Perturbation norms on every batch and the linear closed form.
Outcome vat() {
  constexpr double kNormTol = 1e-10;
  constexpr double kLdsTol = 1e-6;
  double worst_norm = 0.0;
  std::size_t batches = 0;
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto task = tasks::sine(30, 0, 400, 0, 50 + s);
    Rng rng(s);
    const MlpParams net = MlpParams::glorot({1, 16, 8, 1}, rng);
    for (double eps : {0.5, 1.0, 2.0}) {
      VatConfig cfg;
      cfg.epsilon = eps;
      for (std::size_t b = 0; b < task.data.x_unlabeled.rows(); b += 50, ++batches) {
        std::vector<std::size_t> idx;
        for (std::size_t i = b; i < std::min(b + 50, task.data.x_unlabeled.rows()); ++i) idx.push_back(i);
        const VatLoss l = vat_loss(net, task.data.x_train, task.data.y_train, select_rows(task.data.x_unlabeled, idx),
                                   cfg, rng);
        for (std::size_t i = 0; i < l.r_adv.rows(); ++i)
          worst_norm = std::max(worst_norm, std::abs(norm2(l.r_adv.row(i)) - eps));
      }
    }
  }
  double worst_lds = 0.0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    Rng rng(100 + s);
    const std::size_t d = 1 + s % 5;
    MlpParams lin = MlpParams::glorot({d, 1}, rng);
    lin.layers[0].bias = {rng.normal()};
    double w2 = 0.0;
    for (double w : lin.layers[0].weight.values()) w2 += w * w;
    VatConfig cfg;
    cfg.epsilon = rng.uniform(0.2, 2.0);
    cfg.sigma = rng.uniform(0.5, 2.0);
    const VatLoss l = vat_loss(lin, oracle::random_matrix(6, d, rng), Vector(6, 0.0), oracle::random_matrix(9, d, rng),
                               cfg, rng);
    worst_lds = std::max(worst_lds, std::abs(l.lds - cfg.epsilon * cfg.epsilon * w2 / (2 * cfg.sigma * cfg.sigma)));
  }
  return {worst_norm <= kNormTol && worst_lds <= kLdsTol,
          std::to_string(batches) + " batches, max | |r| - eps | = " + fmt(worst_norm) +
              " (<= 1e-10); linear LDS max error " + fmt(worst_lds) + " (<= 1e-06)"};
}

// Teacher against the closed-form EMA of the recorded student trajectory.
Outcome mean_teacher() {
  constexpr double kTol = 1e-10;
  const auto task = tasks::sine(18, 2, 50, 0, 4);
  MeanTeacherConfig mt;
  mt.ema_decay = 0.95;
  RegressorConfig rc;
  rc.hidden = {};
  rc.max_epochs = 100;
  rc.patience = 1000;
  rc.seed = 6;
  Rng rng(rc.seed);
  const Vector theta0 = MlpParams::glorot({1, 1}, rng).flatten();
  std::vector<Vector> students, teachers;
  train_mean_teacher(mt, rc, task.data, [&](const MlpParams& s, const MlpParams* t) {
    students.push_back(s.flatten());
    teachers.push_back(t->flatten());
  });
  const double d = mt.ema_decay;
  double worst = 0.0;
  for (std::size_t step = 1; step <= students.size(); ++step) {
    for (std::size_t p = 0; p < theta0.size(); ++p) {
      double closed = std::pow(d, static_cast<double>(step)) * theta0[p];
      for (std::size_t u = 1; u <= step; ++u)
        closed += (1 - d) * std::pow(d, static_cast<double>(step - u)) * students[u - 1][p];
      worst = std::max(worst, std::abs(teachers[step - 1][p] - closed));
    }
  }
  const bool pass = theta0.size() == 2 && students.size() == 100 && worst <= kTol;
  return {pass, std::to_string(students.size()) + " steps on a " + std::to_string(theta0.size()) +
                    "-parameter model, max deviation " + fmt(worst) + " (<= 1e-10)"};
}

// Replays every accepted Coreg point against brute-force LOO errors and
// compares test RMSE with the plain two-kNN average.
Outcome coreg() {
  constexpr std::size_t kRequired = 8;
  std::size_t wins = 0, accepted = 0, violations = 0;
  std::ostringstream red;
  for (std::uint64_t t = 0; t < 10; ++t) {
    Rng rng(derive_seed(10, t));
    Dataset ds;
    ds.x = Matrix(20 + 1000 + 1000, 1);
    ds.y.resize(ds.x.rows());
    for (std::size_t i = 0; i < ds.x.rows(); ++i) {
      ds.x(i, 0) = rng.uniform(-3, 3);
      ds.y[i] = ds.x(i, 0) + 0.1 * rng.normal();
    }
    const auto task = tasks::partition(ds, 20, 0, 1000, 1000, t);
    const Matrix& xl = task.data.x_train;
    const Vector& yl = task.data.y_train;
    const Matrix& xu = task.data.x_unlabeled;
    CoregConfig cfg;
    cfg.seed = t;
    const CoregModel m = coreg_train(cfg, xl, yl, xu);
    CoregConfig plain_cfg = cfg;
    plain_cfg.max_rounds = 0;
    const CoregModel plain = coreg_train(plain_cfg, xl, yl, xu);

    Matrix lx[2] = {xl, xl};
    Vector ly[2] = {yl, yl};
    const double orders[2] = {cfg.metric_orders.first, cfg.metric_orders.second};
    std::size_t i = 0;
    while (i < m.accepted.size()) {
      std::size_t j = i;
      while (j < m.accepted.size() && m.accepted[j].round == m.accepted[i].round) ++j;
      for (std::size_t r = i; r < j; ++r) {
        const auto& a = m.accepted[r];
        const int s = a.scorer;
        const auto xc = xu.row(a.unlabeled_index);
        const double before = loo_sse(lx[s], ly[s], cfg.k, orders[s]);
        Vector y_aug = ly[s];
        y_aug.push_back(knn_predict(lx[s], ly[s], xc, cfg.k, orders[s]));
        const double after = loo_sse(vstack(lx[s], Matrix(1, 1, Vector{xc[0]})), y_aug, cfg.k, orders[s], 1);
        const double scale = std::max(1.0, before);
        if (!(after < before) || std::abs(before - a.loo_before) > 1e-9 * scale ||
            std::abs(after - a.loo_after) > 1e-9 * scale || y_aug.back() != a.pseudo_label)
          ++violations;
      }
      for (std::size_t r = i; r < j; ++r) {
        const auto& a = m.accepted[r];
        const int o = 1 - a.scorer;
        lx[o] = vstack(lx[o], Matrix(1, 1, Vector{xu(a.unlabeled_index, 0)}));
        ly[o].push_back(a.pseudo_label);
      }
      i = j;
    }
    accepted += m.accepted.size();
    const Matrix xt = task.data.standardizer.features(task.x_test);
    const Vector yt = task.data.standardizer.targets(task.y_test);
    const double rc = rmse(m.predict(xt), yt);
    const double rp = rmse(plain.predict(xt), yt);
    wins += rc <= rp ? 1 : 0;
    red << (t ? " " : "") << fixed(percent_reduction(rp, rc), 1);
  }
  return {violations == 0 && wins >= kRequired,
          std::to_string(accepted) + " accepted points replayed, " + std::to_string(violations) +
              " LOO increases or mismatches; co-training RMSE <= two-kNN in " + std::to_string(wins) +
              "/10 seeds (need 8); reductions % [" + red.str() + "]"};
}

// Sum kernel over coordinates and distractors vs a single deep kernel.
Outcome spatial() {
  std::istringstream in(
      "dataset = synthetic:spatial\nn_labeled = 100\ntrials = 10\nmethods = [ssdkl, ssdkl_spatial]\n");
  const ExperimentConfig cfg = parse_config(in);
  const ExperimentResult r = run_experiment(cfg, load_dataset(cfg));
  const MethodSummary& single = summary_of(r, "ssdkl");
  const MethodSummary& sum = summary_of(r, "ssdkl_spatial");
  const bool pass = single.trials_ok == 10 && sum.trials_ok == 10 && sum.mean_test_rmse < single.mean_test_rmse;
  return {pass, "mean test RMSE: sum kernel " + fmt(sum.mean_test_rmse, 5) + " vs single kernel " +
                    fmt(single.mean_test_rmse, 5) + " (reductions vs DKL " + fixed(sum.percent_reduction) + "% vs " +
                    fixed(single.percent_reduction) + "%)" + failures(r)};
}

// Split sizes, disjointness, determinism and leakage.
Outcome protocol() {
  const Dataset ds = make_sine_dataset(2000, 0.1, 0);
  bool ok = true;
  std::set<std::vector<std::size_t>> labeled_sets;
  for (std::uint64_t t = 0; t < 10; ++t) {
    const SplitView s = make_split(ds, 100, t);
    ok = ok && s.labeled_train.size() == 90 && s.validation.size() == 10 && s.test.size() == 1000 &&
         s.unlabeled.size() == 900;
    std::set<std::size_t> all;
    for (const auto* part : {&s.labeled_train, &s.validation, &s.test, &s.unlabeled}) all.insert(part->begin(), part->end());
    ok = ok && all.size() == 2000 && *all.rbegin() < 2000;
    const SplitView again = make_split(ds, 100, t);
    ok = ok && again.labeled_train == s.labeled_train && again.validation == s.validation && again.test == s.test &&
         again.unlabeled == s.unlabeled && again.standardizer == s.standardizer;
    Dataset poisoned = ds;
    for (const auto* part : {&s.validation, &s.test, &s.unlabeled})
      for (std::size_t i : *part) {
        poisoned.x(i, 0) = 1e6;
        poisoned.y[i] = -1e6;
      }
    const SplitView p = make_split(poisoned, 100, t);
    ok = ok && p.standardizer == s.standardizer &&
         make_training_data(poisoned, p, 0).x_train == make_training_data(ds, s, 0).x_train;
    auto sorted = s.labeled_train;
    std::sort(sorted.begin(), sorted.end());
    labeled_sets.insert(sorted);
  }
  ok = ok && labeled_sets.size() == 10;
  return {ok, "n=100 -> 90 train / 10 validation / 1000 test / 900 unlabeled over 10 seeds; disjoint, deterministic, "
              "standardizer blind to held-out rows: " +
                  std::string(ok ? "yes" : "NO")};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<std::size_t> allowed;
  std::string report_path;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--allow-fail" && i + 1 < argc) {
      std::stringstream list(argv[++i]);
      std::string item;
      while (std::getline(list, item, ',')) allowed.insert(std::stoul(item));
    } else if (arg == "--report" && i + 1 < argc) {
      report_path = argv[++i];
    } else {
      std::cerr << "usage: sskl_acceptance [--allow-fail 4,5] [--report file]\n";
      return 2;
    }
  }
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"GP oracle equivalence", gp_oracle},
      {"gradient suite", gradient_suite},
      {"alpha=0 reduces to DKL", reduction_identity},
      {"variance pressure", variance_pressure},
      {"directional improvement", directional},
      {"alpha robustness", alpha_robustness},
      {"label propagation", label_propagation},
      {"VAT", vat},
      {"mean teacher", mean_teacher},
      {"Coreg", coreg},
      {"spatial sum kernel", spatial},
      {"protocol fidelity", protocol},
  };
  std::ostringstream report;
  std::size_t failed = 0, blocking = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) {
      ++failed;
      if (!allowed.count(i + 1)) ++blocking;
    }
    std::ostringstream line;
    line << (o.pass ? "PASS" : "FAIL") << "  " << std::setw(2) << i + 1 << ". " << criteria[i].first << ": "
         << o.detail << " [" << fixed(secs, 1) << " s]"
         << (!o.pass && allowed.count(i + 1) ? " (known failure)" : "") << "\n";
    std::cout << line.str() << std::flush;
    report << line.str();
  }
  std::ostringstream tail;
  tail << criteria.size() - failed << "/" << criteria.size() << " criteria passed\n";
  std::cout << tail.str();
  report << tail.str();
  if (!report_path.empty()) std::ofstream(report_path) << report.str();
  return blocking == 0 ? 0 : 1;
}
