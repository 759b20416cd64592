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

#include "sskl/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "sskl/errors.hpp"
#include "sskl/rng.hpp"

namespace sskl {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '"')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    cells.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return cells;
}

bool parse_number(std::string_view s, double& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

bool parse_row(const std::vector<std::string_view>& cells, std::vector<double>& out) {
  out.resize(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i)
    if (!parse_number(cells[i], out[i])) return false;
  return true;
}

}  // namespace

Dataset parse_csv(std::istream& in, const std::string& name, LoadReport* report) {
  LoadReport rep;
  std::vector<double> flat;
  Vector targets;
  std::size_t width = 0;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  std::vector<double> row;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_commas(line);
    const bool numeric = parse_row(cells, row);
    if (first) {
      first = false;
      width = cells.size();
      if (!numeric) {
        rep.header = true;
        continue;
      }
    }
    if (!numeric || cells.size() != width) {
      ++rep.rows_dropped;
      rep.dropped_lines.push_back(line_no);
      continue;
    }
    flat.insert(flat.end(), row.begin(), row.end() - 1);
    targets.push_back(row.back());
  }
  if (width < 2) throw NoNumericColumns(name + ": need at least one feature column and a target column");
  if (targets.empty()) {
    if (rep.rows_dropped == 0) throw NoNumericColumns(name + ": no numeric rows");
    throw EmptyAfterCleaning(name + ": every data row was malformed");
  }
  rep.rows_kept = targets.size();
  if (report) *report = rep;
  Dataset ds;
  ds.name = name;
  ds.x = Matrix(targets.size(), width - 1, std::move(flat));
  ds.y = std::move(targets);
  return ds;
}

Dataset load_csv(const std::string& path, LoadReport* report) {
  std::ifstream in(path);
  if (!in) throw FileNotFound("cannot open " + path);
  std::string name = path;
  if (const auto slash = name.find_last_of('/'); slash != std::string::npos) name = name.substr(slash + 1);
  if (const auto dot = name.find_last_of('.'); dot != std::string::npos && dot > 0) name = name.substr(0, dot);
  return parse_csv(in, name, report);
}

Standardizer Standardizer::fit(const Matrix& x, std::span<const double> y) {
  if (x.rows() == 0 || y.size() != x.rows()) throw EmptyVectors("Standardizer::fit: empty or mismatched input");
  const double n = static_cast<double>(x.rows());
  Standardizer s;
  s.feature_mean.assign(x.cols(), 0.0);
  s.feature_std.assign(x.cols(), 0.0);
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t c = 0; c < x.cols(); ++c) s.feature_mean[c] += x(i, c);
  for (double& m : s.feature_mean) m /= n;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t c = 0; c < x.cols(); ++c) {
      const double d = x(i, c) - s.feature_mean[c];
      s.feature_std[c] += d * d;
    }
  }
  for (double& v : s.feature_std) {
    v = std::sqrt(v / n);
    if (v < 1e-12) v = 0.0;
  }
  s.target_mean = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double var = 0.0;
  for (double v : y) var += (v - s.target_mean) * (v - s.target_mean);
  s.target_std = std::sqrt(var / n);
  if (s.target_std < 1e-12) s.target_std = 1.0;
  return s;
}

Matrix Standardizer::features(const Matrix& x) const {
  if (x.cols() != feature_mean.size()) throw DimensionMismatch("Standardizer::features: column count");
  Matrix z(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t c = 0; c < x.cols(); ++c) {
      z(i, c) = feature_std[c] == 0.0 ? 0.0 : (x(i, c) - feature_mean[c]) / feature_std[c];
    }
  }
  return z;
}

Vector Standardizer::targets(std::span<const double> y) const {
  Vector z(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) z[i] = (y[i] - target_mean) / target_std;
  return z;
}

Vector Standardizer::unstandardize_targets(std::span<const double> z) const {
  Vector y(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) y[i] = z[i] * target_std + target_mean;
  return y;
}

Vector Standardizer::unstandardize_variances(std::span<const double> v) const {
  Vector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] * target_std * target_std;
  return out;
}

std::size_t validation_count(std::size_t n_labeled) {
  const auto v = static_cast<std::size_t>(std::llround(0.1 * static_cast<double>(n_labeled)));
  return std::max<std::size_t>(1, v);
}

SplitView make_split(const Dataset& data, std::size_t n_labeled, std::uint64_t seed, std::size_t test_size) {
  if (n_labeled < 2) throw InsufficientData("make_split: need at least 2 labeled examples");
  if (data.size() < n_labeled + test_size) {
    throw InsufficientData("make_split: " + std::to_string(data.size()) + " rows < " + std::to_string(n_labeled) +
                           " labeled + " + std::to_string(test_size) + " test");
  }
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));

  SplitView s;
  s.seed = seed;
  s.n_labeled = n_labeled;
  const std::size_t n_val = validation_count(n_labeled);
  const std::size_t n_train = n_labeled - n_val;
  auto it = order.begin();
  s.test.assign(it, it + static_cast<std::ptrdiff_t>(test_size));
  it += static_cast<std::ptrdiff_t>(test_size);
  s.labeled_train.assign(it, it + static_cast<std::ptrdiff_t>(n_train));
  it += static_cast<std::ptrdiff_t>(n_train);
  s.validation.assign(it, it + static_cast<std::ptrdiff_t>(n_val));
  it += static_cast<std::ptrdiff_t>(n_val);
  s.unlabeled.assign(it, order.end());

  const Matrix xt = select_rows(data.x, s.labeled_train);
  Vector yt(n_train);
  for (std::size_t i = 0; i < n_train; ++i) yt[i] = data.y[s.labeled_train[i]];
  s.standardizer = Standardizer::fit(xt, yt);
  return s;
}

void write_split_manifest(std::ostream& out, const SplitView& split) {
  out << "seed " << split.seed << "\n";
  out << "n_labeled " << split.n_labeled << "\n";
  auto emit = [&](const char* name, const std::vector<std::size_t>& idx) {
    out << name;
    for (std::size_t i : idx) out << ' ' << i;
    out << "\n";
  };
  emit("labeled_train", split.labeled_train);
  emit("validation", split.validation);
  emit("test", split.test);
  emit("unlabeled", split.unlabeled);
}

namespace {
Vector gather(std::span<const double> y, std::span<const std::size_t> idx) {
  Vector out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = y[idx[i]];
  return out;
}
}  // namespace

TrainingData make_training_data(const Dataset& data, const SplitView& split, std::size_t max_unlabeled) {
  const Standardizer& st = split.standardizer;
  TrainingData td;
  td.standardizer = st;
  td.x_train = st.features(select_rows(data.x, split.labeled_train));
  td.y_train = st.targets(gather(data.y, split.labeled_train));
  td.x_val = st.features(select_rows(data.x, split.validation));
  td.y_val = st.targets(gather(data.y, split.validation));
  const std::size_t m = std::min(max_unlabeled, split.unlabeled.size());
  td.x_unlabeled = st.features(select_rows(data.x, std::span(split.unlabeled).first(m)));
  return td;
}

double rmse(std::span<const double> pred, std::span<const double> truth) {
  if (pred.empty() || truth.empty()) throw EmptyVectors("rmse: empty input");
  if (pred.size() != truth.size()) throw DimensionMismatch("rmse: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += (pred[i] - truth[i]) * (pred[i] - truth[i]);
  return std::sqrt(s / static_cast<double>(pred.size()));
}

double percent_reduction(double rmse_base, double rmse_method) {
  if (!(rmse_base > 0.0)) throw ZeroBaseline("percent_reduction: baseline RMSE must be positive");
  return 100.0 * (rmse_base - rmse_method) / rmse_base;
}

Dataset make_sine_dataset(std::size_t n, double noise_std, std::uint64_t seed, double range) {
  Rng rng(seed);
  Dataset ds;
  ds.name = "synthetic_sine";
  ds.x = Matrix(n, 1);
  ds.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = rng.uniform(-range, range);
    ds.x(i, 0) = x;
    ds.y[i] = std::sin(x) + noise_std * rng.normal();
  }
  return ds;
}

Dataset make_spatial_dataset(std::size_t n, std::size_t n_distractors, double noise_std, std::uint64_t seed) {
  Rng rng(seed);
  Vector w(n_distractors);
  for (double& v : w) v = rng.normal() / std::sqrt(static_cast<double>(std::max<std::size_t>(1, n_distractors)));
  Dataset ds;
  ds.name = "synthetic_spatial";
  const std::size_t d = n_distractors + 2;
  ds.x = Matrix(n, d);
  ds.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double proj = 0.0;
    for (std::size_t c = 0; c < n_distractors; ++c) {
      ds.x(i, c) = rng.normal();
      proj += w[c] * ds.x(i, c);
    }
    const double u = rng.uniform(-2.0, 2.0);
    const double v = rng.uniform(-2.0, 2.0);
    ds.x(i, n_distractors) = u;
    ds.x(i, n_distractors + 1) = v;
    ds.y[i] = std::sin(1.5 * u) + std::cos(1.5 * v) + 0.1 * std::tanh(proj) + noise_std * rng.normal();
  }
  return ds;
}

}  // namespace sskl
