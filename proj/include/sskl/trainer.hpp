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
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "sskl/data.hpp"
#include "sskl/gp.hpp"
#include "sskl/kernels.hpp"

namespace sskl {

struct TrainConfig {
  double alpha = 1.0;  // weight of the unlabeled variance term; 0 gives DKL
  std::vector<double> alpha_grid{0.1, 1.0, 10.0};
  double lr_net = 1e-3;
  double lr_gp = 0.1;
  std::size_t unlabeled_batch = 50;
  std::size_t max_epochs = 500;
  std::size_t patience = 20;
  double weight_decay = 1e-4;
  std::uint64_t seed = 0;
  std::vector<std::size_t> hidden{100, 50, 50};
  std::size_t embedding_dim = 2;
  KernelKind kernel = KernelKind::Rbf;
  int degree = 2;
  // Trailing input columns scored by a separate RBF kernel on the raw
  // coordinates (sum kernel); 0 disables the composition.
  std::size_t spatial_dims = 0;
  // Skip the unlabeled term entirely while keeping the mini-batch step
  // schedule, so supervised and semi-supervised runs take the same steps.
  bool likelihood_only = false;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_rmse = 0.0;  // original target units
};

struct TrainedModel {
  DeepKernel model;
  Matrix labeled_x;  // standardized
  Vector labeled_y;  // standardized
  Standardizer standardizer;
  double alpha = 0.0;
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  double best_val_rmse = 0.0;
};

struct SemisupLoss {
  double loss = 0.0;
  double nlml = 0.0;
  double variance = 0.0;  // sum over the unlabeled batch
  Vector grad_net;        // MlpParams::flatten layout
  Vector grad_kernel;     // KernelParams::log_params layout
};

/// (1/n) NLML(labeled) + (alpha/m) * sum of latent variances over the unlabeled batch,
/// with exact gradients for every network weight and log hyperparameter.
SemisupLoss semisup_loss(const DeepKernel& dk, const Matrix& x_labeled, std::span<const double> y_labeled,
                         const Matrix& x_unlabeled, double alpha);

/// Freshly initialized model for the given input dimension.
DeepKernel init_deep_kernel(const TrainConfig& config, std::size_t input_dim);

/// Adam on network weights (lr_net, weight decay) and log hyperparameters
/// (lr_gp); early stopping on validation RMSE. Throws EmptyLabeledSet, or
/// TrainingDiverged on a non-finite loss or failed factorization.
TrainedModel train(const TrainConfig& config, const TrainingData& data);

/// train() with alpha forced to 0 and the unlabeled term skipped.
TrainedModel train_dkl(TrainConfig config, const TrainingData& data);

struct AlphaArm {
  double alpha = 0.0;
  double val_rmse = 0.0;
  bool diverged = false;
  std::string message;
};

struct AlphaSelection {
  double best_alpha = 0.0;
  TrainedModel model;
  std::vector<AlphaArm> arms;
};

/// One from-scratch run per grid value; lowest validation RMSE wins, ties to the smaller alpha.
AlphaSelection select_alpha(const TrainConfig& config, const TrainingData& data);

/// Posterior on standardized inputs, standardized targets.
Predictive predict_standardized(const TrainedModel& model, const Matrix& x_std);
/// Posterior on raw inputs, in original target units.
Predictive predict(const TrainedModel& model, const Matrix& x_raw);

/// Loss with an optional analytic gradient output.
using LossFn = std::function<double(std::span<const double> params, Vector* grad)>;

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::vector<double> rel_errors;
  std::vector<std::size_t> failures;
  bool ok() const { return failures.empty(); }
};

/// Central differences per coordinate; relative error |a - f| / max(|a|, |f|, 1e-5).
GradCheckReport grad_check(const LossFn& loss, std::span<const double> params, double h, double tol);

/// semisup_loss over the flat vector [network params, kernel log params].
LossFn semisup_loss_fn(DeepKernel dk, Matrix x_labeled, Vector y_labeled, Matrix x_unlabeled, double alpha);
Vector pack_params(const DeepKernel& dk);
void unpack_params(DeepKernel& dk, std::span<const double> flat);

/// Small random problem for gradient checking: random network of the given
/// width, random log hyperparameters, standard-normal inputs and targets.
struct GradCheckInstance {
  DeepKernel model;
  Matrix x_labeled;
  Vector y_labeled;
  Matrix x_unlabeled;
  double alpha = 1.0;
};

struct GradCheckShape {
  std::size_t n = 5;
  std::size_t m = 4;
  std::size_t input_dim = 3;
  std::size_t width = 8;
  std::size_t embedding_dim = 2;
  KernelKind kernel = KernelKind::Rbf;
  int degree = 2;
  std::size_t spatial_dims = 0;
  double alpha = 1.0;
};

GradCheckInstance random_gradcheck_instance(const GradCheckShape& shape, std::uint64_t seed);

/// Container: "SSKLMDL1", network checkpoint, kernel, standardization, labeled set.
void write_model(std::ostream& out, const TrainedModel& model);
TrainedModel read_model(std::istream& in);

}  // namespace sskl
