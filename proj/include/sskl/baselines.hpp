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
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "sskl/data.hpp"
#include "sskl/matrix.hpp"
#include "sskl/net.hpp"
#include "sskl/trainer.hpp"

namespace sskl {

// ---------------------------------------------------------------------------
// k nearest neighbors
// ---------------------------------------------------------------------------

/// Mean target of the k nearest rows under the Minkowski distance of the given
/// order; equal distances go to the lower row index. Throws EmptyTrainingSet.
double knn_predict(const Matrix& train_x, std::span<const double> train_y, std::span<const double> query,
                   std::size_t k, double order);

struct KnnRegressor {
  Matrix x;
  Vector y;
  std::size_t k = 3;
  double order = 2.0;

  double predict(std::span<const double> query) const { return knn_predict(x, y, query, k, order); }
  Vector predict(const Matrix& queries) const;
};

/// Sum over the first `x.rows() - tail` rows of the squared leave-one-out kNN
/// error, neighbors drawn from every other row (tail rows included).
double loo_sse(const Matrix& x, std::span<const double> y, std::size_t k, double order, std::size_t tail = 0);

/// kNN with k picked from `k_grid` by validation RMSE.
KnnRegressor select_knn(const TrainingData& data, const std::vector<std::size_t>& k_grid, double order = 2.0);

// ---------------------------------------------------------------------------
// Coreg: two kNN regressors with different Minkowski orders label points for
// each other.
// ---------------------------------------------------------------------------

struct CoregConfig {
  std::size_t k = 3;
  std::pair<double, double> metric_orders{2.0, 5.0};
  std::size_t pool_size = 100;
  std::size_t max_rounds = 100;
  std::uint64_t seed = 0;
};

struct CoregAcceptance {
  std::size_t round = 0;
  int scorer = 0;               // learner that pseudo-labeled the point; it joins the other learner
  std::size_t unlabeled_index = 0;
  double pseudo_label = 0.0;
  double loo_before = 0.0;      // scorer's LOO sse on its own labeled set
  double loo_after = 0.0;       // same, with the pseudo-labeled candidate added
};

struct CoregModel {
  KnnRegressor learners[2];
  std::vector<CoregAcceptance> accepted;
  std::size_t rounds = 0;

  /// Average of the two learners.
  Vector predict(const Matrix& queries) const;
};

CoregModel coreg_train(const CoregConfig& config, const Matrix& x_labeled, std::span<const double> y_labeled,
                       const Matrix& x_unlabeled);

// ---------------------------------------------------------------------------
// Label propagation for real-valued labels.
// ---------------------------------------------------------------------------

struct LabelPropConfig {
  // Candidate RBF scales, in units of the median pairwise distance among the
  // labeled rows; picked by validation RMSE.
  std::vector<double> rbf_scale_grid{0.1, 0.25, 0.5, 1.0};
  std::size_t max_unlabeled = 20000;
  double tol = 1e-6;
  std::size_t max_iters = 1000;
  std::size_t init_knn_k = 5;
};

struct PropagationResult {
  Vector unlabeled_values;
  std::size_t iterations = 0;
  bool converged = false;
  Vector max_changes;  // per iteration
};

/// Fully connected graph with weights exp(-|xi - xj|^2 / (2 scale^2)), no
/// self-loops, rows normalized. Unlabeled values start from kNN(k = init_knn_k)
/// on the labeled rows; labeled values stay clamped.
PropagationResult propagate_labels(const Matrix& x_labeled, std::span<const double> y_labeled,
                                   const Matrix& x_unlabeled, double scale, const LabelPropConfig& config);

struct LabelPropModel {
  Matrix nodes;   // labeled rows followed by unlabeled rows
  Vector values;  // clamped labels and propagated values
  double scale = 1.0;
  PropagationResult propagation;

  /// Out-of-graph points: RBF-weighted average of node values.
  Vector predict(const Matrix& queries) const;
};

/// Propagates at every grid scale and keeps the one with the lowest validation RMSE.
/// Unlabeled rows beyond max_unlabeled are ignored.
LabelPropModel label_prop(const LabelPropConfig& config, const Matrix& x_labeled, std::span<const double> y_labeled,
                          const Matrix& x_unlabeled, const Matrix& x_val, std::span<const double> y_val);

// ---------------------------------------------------------------------------
// Shared MLP regressor training (VAT, mean teacher, supervised reference).
// ---------------------------------------------------------------------------

struct RegressorConfig {
  std::vector<std::size_t> hidden{100, 50, 50};
  double lr = 1e-3;
  double weight_decay = 1e-4;
  std::size_t unlabeled_batch = 50;
  std::size_t max_epochs = 500;
  std::size_t patience = 20;
  std::uint64_t seed = 0;
};

struct RegressorModel {
  MlpParams net;
  Standardizer standardizer;
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  double best_val_rmse = 0.0;

  /// Raw inputs, original target units.
  Vector predict(const Matrix& x_raw) const;
};

/// Called after every optimizer step with the current trainable network.
using StepObserver = std::function<void(const MlpParams& student, const MlpParams* teacher)>;

/// Plain squared-error training on the labeled rows with the same step
/// schedule (one step per unlabeled mini-batch) as the semi-supervised trainers.
RegressorModel train_mlp_regressor(const RegressorConfig& config, const TrainingData& data,
                                   const StepObserver& observer = {});

// ---------------------------------------------------------------------------
// Virtual adversarial training with a Gaussian output model N(h(x), sigma^2).
// ---------------------------------------------------------------------------

struct VatConfig {
  double epsilon = 1.0;
  double lambda = 1.0;
  double sigma = 1.0;
  double xi = 1e-6;
  std::vector<double> epsilon_grid{0.5, 1.0, 2.0};
  std::vector<double> lambda_grid{0.1, 1.0};
};

/// Adversarial directions from one finite-difference power-iteration step,
/// each row rescaled to L2 norm epsilon.
Matrix vat_perturbations(const MlpParams& net, const Matrix& x, const VatConfig& config, Rng& rng);

struct VatLoss {
  double loss = 0.0;
  double mse = 0.0;
  double lds = 0.0;  // mean of (h(x) - h(x + r))^2 / (2 sigma^2) over labeled and unlabeled rows
  Vector grad;       // MlpParams::flatten layout, perturbations held fixed
  Matrix r_adv;
};

VatLoss vat_loss(const MlpParams& net, const Matrix& x_labeled, std::span<const double> y_labeled,
                 const Matrix& x_unlabeled, const VatConfig& config, Rng& rng);

RegressorModel train_vat(const VatConfig& vat, const RegressorConfig& config, const TrainingData& data);

struct VatSelection {
  double epsilon = 0.0;
  double lambda = 0.0;
  RegressorModel model;
};

VatSelection select_vat(const VatConfig& vat, const RegressorConfig& config, const TrainingData& data);

// ---------------------------------------------------------------------------
// Mean teacher.
// ---------------------------------------------------------------------------

struct MeanTeacherConfig {
  double ema_decay = 0.99;
  double consistency_weight = 1.0;
  double noise_std = 0.1;
};

struct MeanTeacherModel {
  RegressorModel teacher;  // used for prediction
  MlpParams student;
};

/// Student: Adam on MSE(labeled) + w * mean (student(x + n1) - teacher(x + n2))^2
/// over labeled and unlabeled rows; then teacher <- d * teacher + (1 - d) * student.
MeanTeacherModel train_mean_teacher(const MeanTeacherConfig& mt, const RegressorConfig& config,
                                    const TrainingData& data, const StepObserver& observer = {});

}  // namespace sskl
