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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sskl/errors.hpp"
#include "sskl/experiment.hpp"
#include "sskl/trainer.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct RunOptions {
  std::string config;
  std::vector<std::string> methods;
  std::optional<std::size_t> n;
  std::optional<std::size_t> trials;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
};

sskl::ExperimentConfig load_config(const RunOptions& opt) {
  sskl::ExperimentConfig cfg = sskl::parse_config_file(opt.config);
  if (!opt.methods.empty()) cfg.methods = opt.methods;
  if (opt.n) cfg.n_labeled = *opt.n;
  if (opt.trials) cfg.trials = *opt.trials;
  if (opt.seed) cfg.base_seed = *opt.seed;
  if (opt.out) cfg.output_dir = *opt.out;
  sskl::normalize_methods(cfg);
  if (cfg.trials == 0) throw sskl::ParseError("trials must be >= 1");
  if (cfg.n_labeled < 2) throw sskl::ParseError("n_labeled must be >= 2");
  return cfg;
}

int run_command(const RunOptions& opt) {
  sskl::ExperimentConfig cfg;
  sskl::Dataset data;
  try {
    cfg = load_config(opt);
    data = sskl::load_dataset(cfg);
    sskl::make_split(data, cfg.n_labeled, cfg.base_seed, cfg.test_size);
  } catch (const sskl::Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  std::cerr << "dataset " << data.name << ": N=" << data.size() << " d=" << data.dim() << ", n=" << cfg.n_labeled
            << ", " << cfg.trials << " trials, " << sskl::worker_count(cfg.trials * cfg.methods.size())
            << " workers\n";
  const sskl::ExperimentResult result = sskl::run_experiment(cfg, data, &std::cerr);
  const std::string title = data.name + " (n=" + std::to_string(cfg.n_labeled) + ", " +
                            std::to_string(cfg.trials) + " trials)";
  sskl::write_outputs(cfg, result, title);
  sskl::write_summary_table(std::cout, result, title);
  std::size_t failed = 0;
  for (const auto& c : result.cells) failed += c.ok ? 0 : 1;
  if (failed) std::cerr << "warning: " << failed << " cell(s) failed and were excluded from the aggregates\n";
  std::cerr << "wrote " << cfg.output_dir << "/{trials.csv,summary.csv,summary.txt,timings.csv,config.txt}\n";
  return 0;
}

struct GradOptions {
  std::size_t instances = 10;
  std::uint64_t seed = 0;
  sskl::GradCheckShape shape;
  std::string kernel = "rbf";
  double h = 1e-5;
  double tol = 1e-4;
};

int gradcheck_command(GradOptions opt) {
  opt.shape.kernel = opt.kernel == "polynomial" ? sskl::KernelKind::Polynomial : sskl::KernelKind::Rbf;
  std::size_t bad = 0;
  double worst = 0.0;
  for (std::size_t i = 0; i < opt.instances; ++i) {
    const auto inst = sskl::random_gradcheck_instance(opt.shape, opt.seed + i);
    const auto fn = sskl::semisup_loss_fn(inst.model, inst.x_labeled, inst.y_labeled, inst.x_unlabeled, inst.alpha);
    const auto params = sskl::pack_params(inst.model);
    const auto rep = sskl::grad_check(fn, params, opt.h, opt.tol);
    worst = std::max(worst, rep.max_rel_error);
    std::cout << "instance " << i << ": " << params.size() << " params, max rel error " << std::scientific
              << std::setprecision(3) << rep.max_rel_error << std::defaultfloat << (rep.ok() ? "  ok" : "  FAIL")
              << "\n";
    if (!rep.ok()) ++bad;
  }
  std::cout << (bad ? "FAIL" : "ok") << ": " << opt.instances - bad << "/" << opt.instances
            << " instances within " << opt.tol << " (worst " << worst << ")\n";
  return bad ? kExitRuntime : 0;
}

int split_command(const RunOptions& opt, const std::string& export_path) {
  sskl::ExperimentConfig cfg;
  sskl::Dataset data;
  try {
    cfg = load_config(opt);
    data = sskl::load_dataset(cfg);
  } catch (const sskl::Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  std::ofstream out(export_path);
  if (!out) {
    std::cerr << "cannot write '" << export_path << "'\n";
    return kExitRuntime;
  }
  for (std::size_t t = 0; t < cfg.trials; ++t) {
    sskl::SplitView split;
    try {
      split = sskl::make_split(data, cfg.n_labeled, cfg.base_seed + t, cfg.test_size);
    } catch (const sskl::InsufficientData& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return kExitConfig;
    }
    out << "trial " << t << " seed " << split.seed << "\n";
    sskl::write_split_manifest(out, split);
  }
  std::cerr << "wrote " << cfg.trials << " split manifest(s) to " << export_path << "\n";
  return 0;
}

int combine_command(const std::vector<std::string>& paths) {
  const auto rows = sskl::combine_summaries(paths);
  std::cout << std::left << std::setw(15) << "method" << std::right << std::setw(10) << "runs" << std::setw(18)
            << "median reduction" << "\n";
  for (const auto& r : rows)
    std::cout << std::left << std::setw(15) << r.method << std::right << std::setw(10) << r.reductions.size()
              << std::setw(18) << std::fixed << std::setprecision(2) << r.median << std::defaultfloat << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semi-supervised deep kernel learning experiments"};
  app.require_subcommand(1);

  RunOptions run_opt;
  auto* run = app.add_subcommand("run", "Run seeded trials and write per-trial records and the summary table");
  run->add_option("--config", run_opt.config, "Experiment config file")->required();
  run->add_option("--method", run_opt.methods, "Methods to run (replaces the config list; dkl is always added)");
  run->add_option("--n", run_opt.n, "Number of labeled examples");
  run->add_option("--trials", run_opt.trials, "Number of trials");
  run->add_option("--seed", run_opt.seed, "Base seed; trial t uses seed + t");
  run->add_option("--out", run_opt.out, "Output directory");

  GradOptions grad_opt;
  auto* grad = app.add_subcommand("gradcheck", "Compare analytic loss gradients with central differences");
  grad->add_option("--instances", grad_opt.instances, "Number of random instances");
  grad->add_option("--seed", grad_opt.seed, "Seed of the first instance");
  grad->add_option("--n", grad_opt.shape.n, "Labeled points");
  grad->add_option("--m", grad_opt.shape.m, "Unlabeled points");
  grad->add_option("--dim", grad_opt.shape.input_dim, "Input dimension");
  grad->add_option("--width", grad_opt.shape.width, "Hidden layer width");
  grad->add_option("--alpha", grad_opt.shape.alpha, "Weight of the variance term");
  grad->add_option("--kernel", grad_opt.kernel, "rbf or polynomial")->check(CLI::IsMember({"rbf", "polynomial"}));
  grad->add_option("--degree", grad_opt.shape.degree, "Polynomial degree");
  grad->add_option("--spatial", grad_opt.shape.spatial_dims, "Coordinate columns for the sum kernel");
  grad->add_option("--step", grad_opt.h, "Finite-difference step");
  grad->add_option("--tol", grad_opt.tol, "Relative error tolerance");

  RunOptions split_opt;
  std::string export_path;
  auto* split = app.add_subcommand("split", "Export the per-trial index partitions for audit");
  split->add_option("--config", split_opt.config, "Experiment config file")->required();
  split->add_option("--export", export_path, "Manifest output file")->required();
  split->add_option("--n", split_opt.n, "Number of labeled examples");
  split->add_option("--trials", split_opt.trials, "Number of trials");
  split->add_option("--seed", split_opt.seed, "Base seed");

  std::vector<std::string> summaries;
  auto* combine = app.add_subcommand("combine", "Median percent reduction across several runs");
  combine->add_option("summaries", summaries, "summary.csv files")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return run_command(run_opt);
    if (*grad) return gradcheck_command(grad_opt);
    if (*split) return split_command(split_opt, export_path);
    if (*combine) return combine_command(summaries);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
