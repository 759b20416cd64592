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
#include <string>
#include <vector>

#include "sskl/matrix.hpp"

namespace sskl {

struct Dataset {
  std::string name;
  Matrix x;
  Vector y;

  std::size_t size() const { return y.size(); }
  std::size_t dim() const { return x.cols(); }
};

struct LoadReport {
  std::size_t rows_kept = 0;
  std::size_t rows_dropped = 0;
  bool header = false;
  std::vector<std::size_t> dropped_lines;  // 1-based line numbers
};

/// Comma-separated numeric file, optional header (detected when the first row
/// is not fully numeric), target in the final column. Rows with missing or
/// non-numeric cells are dropped and counted in the report.
Dataset load_csv(const std::string& path, LoadReport* report = nullptr);
Dataset parse_csv(std::istream& in, const std::string& name, LoadReport* report = nullptr);

/// Per-feature z-scores and target standardization, fitted on labeled-train rows.
struct Standardizer {
  Vector feature_mean;
  Vector feature_std;  // 0 for constant columns, which map to 0
  double target_mean = 0.0;
  double target_std = 1.0;

  static Standardizer fit(const Matrix& x, std::span<const double> y);

  Matrix features(const Matrix& x) const;
  Vector targets(std::span<const double> y) const;
  Vector unstandardize_targets(std::span<const double> z) const;
  /// Variance in original target units.
  Vector unstandardize_variances(std::span<const double> v) const;

  bool operator==(const Standardizer&) const = default;
};

inline constexpr std::size_t kTestHoldout = 1000;

/// Seeded partition of one trial: test holdout first, then n labeled rows
/// (split 90-10 into train and validation), the rest unlabeled.
struct SplitView {
  std::uint64_t seed = 0;
  std::size_t n_labeled = 0;
  std::vector<std::size_t> labeled_train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
  std::vector<std::size_t> unlabeled;
  Standardizer standardizer;
};

/// round(0.1 * n), at least 1.
std::size_t validation_count(std::size_t n_labeled);

/// Throws InsufficientData when N < n_labeled + test_size or n_labeled < 2.
SplitView make_split(const Dataset& data, std::size_t n_labeled, std::uint64_t seed,
                     std::size_t test_size = kTestHoldout);

/// Audit manifest: one "name idx idx ..." line per partition.
void write_split_manifest(std::ostream& out, const SplitView& split);

/// Standardized matrices for one trial.
struct TrainingData {
  Matrix x_train;
  Vector y_train;
  Matrix x_val;
  Vector y_val;
  Matrix x_unlabeled;
  Standardizer standardizer;
};

/// `max_unlabeled` keeps the first rows of split.unlabeled (already shuffled).
TrainingData make_training_data(const Dataset& data, const SplitView& split,
                                std::size_t max_unlabeled = static_cast<std::size_t>(-1));

double rmse(std::span<const double> pred, std::span<const double> truth);
/// 100 * (base - method) / base
double percent_reduction(double rmse_base, double rmse_method);

/// y = sin(x) + noise, x ~ U(-range, range).
Dataset make_sine_dataset(std::size_t n, double noise_std, std::uint64_t seed, double range = 3.0);

/// `n_distractors` nuisance features followed by 2 coordinate columns.
/// y = sin(1.5 u) + cos(1.5 v) + 0.1 * tanh(distractors . w) + noise.
Dataset make_spatial_dataset(std::size_t n, std::size_t n_distractors, double noise_std, std::uint64_t seed);

}  // namespace sskl
