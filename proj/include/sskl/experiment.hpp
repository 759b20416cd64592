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
#include <string>
#include <vector>

#include "sskl/data.hpp"

namespace sskl {

inline const std::vector<std::string> kKnownMethods{"dkl",     "ssdkl", "ssdkl_spatial", "coreg",
                                                    "labelprop", "vat", "meanteacher",   "knn"};

struct ExperimentConfig {
  std::string dataset;  // CSV path, or synthetic:sine / synthetic:spatial
  std::size_t n_labeled = 0;
  std::vector<std::string> methods{"dkl", "ssdkl"};
  std::size_t trials = 10;
  std::uint64_t base_seed = 0;
  std::string output_dir = "results";
  std::size_t test_size = kTestHoldout;
  std::size_t max_unlabeled = 20000;

  // synthetic datasets
  std::size_t synthetic_size = 2000;
  double synthetic_noise = 0.1;
  std::size_t synthetic_distractors = 8;

  // dkl / ssdkl / ssdkl_spatial
  std::vector<double> alpha_grid{0.1, 1.0, 10.0};
  double lr_net = 1e-3;
  double lr_gp = 0.1;
  std::size_t unlabeled_batch = 50;
  std::size_t max_epochs = 500;
  std::size_t patience = 20;
  double weight_decay = 1e-4;
  std::vector<std::size_t> hidden{100, 50, 50};
  std::size_t embedding_dim = 2;
  std::string kernel = "rbf";  // rbf | polynomial
  int degree = 2;
  std::size_t spatial_dims = 2;

  // coreg
  std::size_t coreg_k = 3;
  std::vector<double> coreg_orders{2.0, 5.0};
  std::size_t coreg_pool = 100;
  std::size_t coreg_rounds = 100;

  // labelprop
  std::vector<double> labelprop_scales{0.1, 0.25, 0.5, 1.0};
  std::size_t labelprop_max_unlabeled = 20000;

  // vat
  std::vector<double> vat_epsilon_grid{0.5, 1.0, 2.0};
  std::vector<double> vat_lambda_grid{0.1, 1.0};

  // meanteacher
  double mt_ema_decay = 0.99;
  double mt_consistency = 1.0;
  double mt_noise = 0.1;

  // knn
  std::vector<std::size_t> knn_k_grid{1, 2, 3, 5, 7, 10};
};

/// `key = value` lines; `#` starts a comment; lists are `[a, b, c]`.
/// Unknown or repeated keys raise ParseError, unknown methods UnknownMethod.
/// dataset and n_labeled are required; dkl is always added to the methods.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig parse_config_file(const std::string& path);
std::string serialize_config(const ExperimentConfig& config);
/// Dedups methods, puts dkl first, rejects unknown names.
void normalize_methods(ExperimentConfig& config);

Dataset load_dataset(const ExperimentConfig& config);

struct CellResult {
  std::size_t trial = 0;
  std::uint64_t split_seed = 0;
  std::string method;
  bool ok = false;
  double test_rmse = 0.0;
  double val_rmse = 0.0;
  std::string hyperparameters;
  std::string error;
  double seconds = 0.0;
};

struct MethodSummary {
  std::string method;
  std::size_t trials_ok = 0;
  double mean_test_rmse = 0.0;
  double percent_reduction = 0.0;     // trial-mean RMSE vs trial-mean DKL RMSE
  double mean_trial_reduction = 0.0;  // mean of per-trial reductions, for audit
};

struct ExperimentResult {
  std::vector<CellResult> cells;  // trial-major, methods in config order
  std::vector<MethodSummary> summary;
};

/// Trial t splits with seed base_seed + t; every method in that trial trains
/// with derive_seed(base_seed, t). Failed cells are recorded and left out of
/// the aggregates. Worker count is capped by SSKL_THREADS.
ExperimentResult run_experiment(const ExperimentConfig& config, const Dataset& data, std::ostream* log = nullptr);

/// One cell; throws on failure.
CellResult run_cell(const ExperimentConfig& config, const Dataset& data, const SplitView& split, std::size_t trial,
                    const std::string& method);

std::vector<MethodSummary> summarize(const std::vector<CellResult>& cells, const std::vector<std::string>& methods);
/// Per-trial reduction vs DKL in the same trial, NaN when either cell failed.
double trial_reduction(const std::vector<CellResult>& cells, const CellResult& cell);

void write_trials_csv(std::ostream& out, const ExperimentResult& result);
void write_summary_csv(std::ostream& out, const ExperimentResult& result);
void write_summary_table(std::ostream& out, const ExperimentResult& result, const std::string& title);
void write_timings_csv(std::ostream& out, const ExperimentResult& result);
/// trials.csv, summary.csv, summary.txt, timings.csv and config.txt under output_dir.
void write_outputs(const ExperimentConfig& config, const ExperimentResult& result, const std::string& title);

/// Per-method median of percent reductions across several summary.csv files.
struct CombinedRow {
  std::string method;
  std::vector<double> reductions;
  double median = 0.0;
};
std::vector<CombinedRow> combine_summaries(const std::vector<std::string>& summary_paths);

std::size_t worker_count(std::size_t tasks);

}  // namespace sskl
