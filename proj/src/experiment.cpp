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

#include "sskl/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "sskl/baselines.hpp"
#include "sskl/errors.hpp"
#include "sskl/rng.hpp"
#include "sskl/trainer.hpp"

namespace sskl {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

struct RawValue {
  bool is_list = false;
  std::vector<std::string> items;
  int line = 0;
  std::string key;
};

double as_double(const std::string& s, const RawValue& v) {
  double out = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(out))
    throw ParseError("key '" + v.key + "': expected a number, got '" + s + "'", v.line);
  return out;
}

std::uint64_t as_uint(const std::string& s, const RawValue& v) {
  std::uint64_t out = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ParseError("key '" + v.key + "': expected a non-negative integer, got '" + s + "'", v.line);
  return out;
}

const std::string& scalar(const RawValue& v) {
  if (v.is_list || v.items.size() != 1) throw ParseError("key '" + v.key + "': expected a single value", v.line);
  return v.items[0];
}

void require_list(const RawValue& v) {
  if (!v.is_list) throw ParseError("key '" + v.key + "': expected a list [a, b, ...]", v.line);
}

std::vector<double> as_doubles(const RawValue& v) {
  require_list(v);
  std::vector<double> out;
  for (const auto& s : v.items) out.push_back(as_double(s, v));
  return out;
}

std::vector<std::size_t> as_sizes(const RawValue& v) {
  require_list(v);
  std::vector<std::size_t> out;
  for (const auto& s : v.items) out.push_back(as_uint(s, v));
  return out;
}

template <typename T>
std::string join(const std::vector<T>& xs) {
  std::string out = "[";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ", ";
    if constexpr (std::is_same_v<T, double>) out += format_double(xs[i]);
    else if constexpr (std::is_same_v<T, std::string>) out += xs[i];
    else out += std::to_string(xs[i]);
  }
  return out + "]";
}

struct Field {
  const char* key;
  std::function<void(ExperimentConfig&, const RawValue&)> parse;
  std::function<std::string(const ExperimentConfig&)> show;
};

#define SSKL_SIZE_FIELD(name)                                                                        \
  Field{#name, [](ExperimentConfig& c, const RawValue& v) { c.name = as_uint(scalar(v), v); },       \
        [](const ExperimentConfig& c) { return std::to_string(c.name); }}
#define SSKL_DOUBLE_FIELD(name)                                                                      \
  Field{#name, [](ExperimentConfig& c, const RawValue& v) { c.name = as_double(scalar(v), v); },     \
        [](const ExperimentConfig& c) { return format_double(c.name); }}
#define SSKL_DOUBLES_FIELD(name)                                                                     \
  Field{#name, [](ExperimentConfig& c, const RawValue& v) { c.name = as_doubles(v); },               \
        [](const ExperimentConfig& c) { return join(c.name); }}
#define SSKL_SIZES_FIELD(name)                                                                       \
  Field{#name, [](ExperimentConfig& c, const RawValue& v) { c.name = as_sizes(v); },                 \
        [](const ExperimentConfig& c) { return join(c.name); }}
#define SSKL_STRING_FIELD(name)                                                                      \
  Field{#name, [](ExperimentConfig& c, const RawValue& v) { c.name = scalar(v); },                   \
        [](const ExperimentConfig& c) { return c.name; }}

const std::vector<Field>& fields() {
  static const std::vector<Field> table{
      SSKL_STRING_FIELD(dataset),
      SSKL_SIZE_FIELD(n_labeled),
      Field{"methods",
            [](ExperimentConfig& c, const RawValue& v) {
              require_list(v);
              c.methods = v.items;
            },
            [](const ExperimentConfig& c) { return join(c.methods); }},
      SSKL_SIZE_FIELD(trials),
      SSKL_SIZE_FIELD(base_seed),
      SSKL_STRING_FIELD(output_dir),
      SSKL_SIZE_FIELD(test_size),
      SSKL_SIZE_FIELD(max_unlabeled),
      SSKL_SIZE_FIELD(synthetic_size),
      SSKL_DOUBLE_FIELD(synthetic_noise),
      SSKL_SIZE_FIELD(synthetic_distractors),
      SSKL_DOUBLES_FIELD(alpha_grid),
      SSKL_DOUBLE_FIELD(lr_net),
      SSKL_DOUBLE_FIELD(lr_gp),
      SSKL_SIZE_FIELD(unlabeled_batch),
      SSKL_SIZE_FIELD(max_epochs),
      SSKL_SIZE_FIELD(patience),
      SSKL_DOUBLE_FIELD(weight_decay),
      SSKL_SIZES_FIELD(hidden),
      SSKL_SIZE_FIELD(embedding_dim),
      Field{"kernel",
            [](ExperimentConfig& c, const RawValue& v) {
              const auto& s = scalar(v);
              if (s != "rbf" && s != "polynomial")
                throw ParseError("key 'kernel': expected rbf or polynomial, got '" + s + "'", v.line);
              c.kernel = s;
            },
            [](const ExperimentConfig& c) { return c.kernel; }},
      Field{"degree",
            [](ExperimentConfig& c, const RawValue& v) {
              const auto d = as_uint(scalar(v), v);
              if (d < 1 || d > 16) throw ParseError("key 'degree': expected 1..16", v.line);
              c.degree = static_cast<int>(d);
            },
            [](const ExperimentConfig& c) { return std::to_string(c.degree); }},
      SSKL_SIZE_FIELD(spatial_dims),
      SSKL_SIZE_FIELD(coreg_k),
      SSKL_DOUBLES_FIELD(coreg_orders),
      SSKL_SIZE_FIELD(coreg_pool),
      SSKL_SIZE_FIELD(coreg_rounds),
      SSKL_DOUBLES_FIELD(labelprop_scales),
      SSKL_SIZE_FIELD(labelprop_max_unlabeled),
      SSKL_DOUBLES_FIELD(vat_epsilon_grid),
      SSKL_DOUBLES_FIELD(vat_lambda_grid),
      SSKL_DOUBLE_FIELD(mt_ema_decay),
      SSKL_DOUBLE_FIELD(mt_consistency),
      SSKL_DOUBLE_FIELD(mt_noise),
      SSKL_SIZES_FIELD(knn_k_grid),
  };
  return table;
}

#undef SSKL_SIZE_FIELD
#undef SSKL_DOUBLE_FIELD
#undef SSKL_DOUBLES_FIELD
#undef SSKL_SIZES_FIELD
#undef SSKL_STRING_FIELD

void validate(const ExperimentConfig& c) {
  auto fail = [](const std::string& m) { throw ParseError(m); };
  if (c.trials == 0) fail("key 'trials': must be >= 1");
  if (c.n_labeled < 2) fail("key 'n_labeled': must be >= 2");
  if (c.alpha_grid.empty()) fail("key 'alpha_grid': must not be empty");
  if (c.coreg_orders.size() != 2) fail("key 'coreg_orders': expected exactly two orders");
  if (c.coreg_k == 0) fail("key 'coreg_k': must be >= 1");
  if (c.labelprop_scales.empty()) fail("key 'labelprop_scales': must not be empty");
  if (c.vat_epsilon_grid.empty() || c.vat_lambda_grid.empty()) fail("VAT grids must not be empty");
  if (c.knn_k_grid.empty()) fail("key 'knn_k_grid': must not be empty");
  if (c.embedding_dim == 0) fail("key 'embedding_dim': must be >= 1");
  if (c.unlabeled_batch == 0) fail("key 'unlabeled_batch': must be >= 1");
  if (!(c.mt_ema_decay > 0.0 && c.mt_ema_decay <= 1.0)) fail("key 'mt_ema_decay': must be in (0, 1]");
}

}  // namespace

void normalize_methods(ExperimentConfig& config) {
  std::vector<std::string> out{"dkl"};
  for (const auto& m : config.methods) {
    if (std::find(kKnownMethods.begin(), kKnownMethods.end(), m) == kKnownMethods.end())
      throw UnknownMethod("unknown method '" + m + "'");
    if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
  }
  config.methods = std::move(out);
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig config;
  std::map<std::string, int> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string text = trim(line);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", lineno);
    RawValue value;
    value.key = trim(std::string_view(text).substr(0, eq));
    value.line = lineno;
    const std::string rhs = trim(std::string_view(text).substr(eq + 1));
    if (value.key.empty()) throw ParseError("missing key", lineno);
    if (rhs.empty()) throw ParseError("key '" + value.key + "': missing value", lineno);
    if (rhs.front() == '[') {
      if (rhs.back() != ']') throw ParseError("key '" + value.key + "': unterminated list", lineno);
      value.is_list = true;
      const std::string body = trim(std::string_view(rhs).substr(1, rhs.size() - 2));
      if (!body.empty()) {
        std::stringstream ss(body);
        std::string item;
        while (std::getline(ss, item, ',')) {
          item = trim(item);
          if (item.empty()) throw ParseError("key '" + value.key + "': empty list item", lineno);
          value.items.push_back(item);
        }
      }
    } else {
      std::string v = rhs;
      if (v.size() >= 2 && v.front() == '"' && v.back() == '"') v = v.substr(1, v.size() - 2);
      value.items.push_back(v);
    }
    const auto& table = fields();
    const auto it = std::find_if(table.begin(), table.end(), [&](const Field& f) { return value.key == f.key; });
    if (it == table.end()) throw ParseError("unknown key '" + value.key + "'", lineno);
    if (const auto prev = seen.find(value.key); prev != seen.end())
      throw ParseError("key '" + value.key + "' repeated (first on line " + std::to_string(prev->second) + ")", lineno);
    seen[value.key] = lineno;
    it->parse(config, value);
  }
  if (!seen.count("dataset")) throw ParseError("missing required key 'dataset'");
  if (!seen.count("n_labeled")) throw ParseError("missing required key 'n_labeled'");
  normalize_methods(config);
  validate(config);
  return config;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileNotFound("cannot open config file '" + path + "'");
  return parse_config(in);
}

std::string serialize_config(const ExperimentConfig& config) {
  std::string out;
  for (const auto& f : fields()) {
    out += f.key;
    out += " = ";
    out += f.show(config);
    out += '\n';
  }
  return out;
}

Dataset load_dataset(const ExperimentConfig& config) {
  if (config.dataset == "synthetic:sine")
    return make_sine_dataset(config.synthetic_size, config.synthetic_noise, config.base_seed);
  if (config.dataset == "synthetic:spatial")
    return make_spatial_dataset(config.synthetic_size, config.synthetic_distractors, config.synthetic_noise,
                                config.base_seed);
  if (config.dataset.rfind("synthetic:", 0) == 0)
    throw ParseError("key 'dataset': unknown synthetic dataset '" + config.dataset + "'");
  return load_csv(config.dataset);
}

namespace {

TrainConfig train_config(const ExperimentConfig& c, std::uint64_t seed) {
  TrainConfig t;
  t.alpha_grid = c.alpha_grid;
  t.lr_net = c.lr_net;
  t.lr_gp = c.lr_gp;
  t.unlabeled_batch = c.unlabeled_batch;
  t.max_epochs = c.max_epochs;
  t.patience = c.patience;
  t.weight_decay = c.weight_decay;
  t.seed = seed;
  t.hidden = c.hidden;
  t.embedding_dim = c.embedding_dim;
  t.kernel = c.kernel == "polynomial" ? KernelKind::Polynomial : KernelKind::Rbf;
  t.degree = c.degree;
  return t;
}

RegressorConfig regressor_config(const ExperimentConfig& c, std::uint64_t seed) {
  RegressorConfig r;
  r.hidden = c.hidden;
  r.lr = c.lr_net;
  r.weight_decay = c.weight_decay;
  r.unlabeled_batch = c.unlabeled_batch;
  r.max_epochs = c.max_epochs;
  r.patience = c.patience;
  r.seed = seed;
  return r;
}

std::string kv(const std::string& k, double v) { return k + "=" + format_double(v); }

}  // namespace

CellResult run_cell(const ExperimentConfig& config, const Dataset& data, const SplitView& split, std::size_t trial,
                    const std::string& method) {
  CellResult cell;
  cell.trial = trial;
  cell.split_seed = split.seed;
  cell.method = method;
  const std::uint64_t seed = derive_seed(config.base_seed, trial);
  const TrainingData td = make_training_data(data, split, config.max_unlabeled);
  const Matrix x_test = select_rows(data.x, split.test);
  Vector y_test(split.test.size());
  for (std::size_t i = 0; i < split.test.size(); ++i) y_test[i] = data.y[split.test[i]];
  const Matrix x_test_std = td.standardizer.features(x_test);
  const double ystd = td.standardizer.target_std;

  Vector pred;
  if (method == "dkl") {
    const TrainedModel m = train_dkl(train_config(config, seed), td);
    pred = predict(m, x_test).mean;
    cell.val_rmse = m.best_val_rmse;
    cell.hyperparameters = "best_epoch=" + std::to_string(m.best_epoch);
  } else if (method == "ssdkl" || method == "ssdkl_spatial") {
    TrainConfig tc = train_config(config, seed);
    if (method == "ssdkl_spatial") tc.spatial_dims = config.spatial_dims;
    const AlphaSelection sel = select_alpha(tc, td);
    pred = predict(sel.model, x_test).mean;
    cell.val_rmse = sel.model.best_val_rmse;
    cell.hyperparameters = kv("alpha", sel.best_alpha) + ";best_epoch=" + std::to_string(sel.model.best_epoch);
  } else if (method == "coreg") {
    CoregConfig cc;
    cc.k = config.coreg_k;
    cc.metric_orders = {config.coreg_orders[0], config.coreg_orders[1]};
    cc.pool_size = config.coreg_pool;
    cc.max_rounds = config.coreg_rounds;
    cc.seed = seed;
    const CoregModel m = coreg_train(cc, td.x_train, td.y_train, td.x_unlabeled);
    pred = td.standardizer.unstandardize_targets(m.predict(x_test_std));
    if (td.x_val.rows()) cell.val_rmse = rmse(m.predict(td.x_val), td.y_val) * ystd;
    cell.hyperparameters = "rounds=" + std::to_string(m.rounds) + ";accepted=" + std::to_string(m.accepted.size());
  } else if (method == "labelprop") {
    LabelPropConfig lc;
    lc.rbf_scale_grid = config.labelprop_scales;
    lc.max_unlabeled = config.labelprop_max_unlabeled;
    const LabelPropModel m = label_prop(lc, td.x_train, td.y_train, td.x_unlabeled, td.x_val, td.y_val);
    pred = td.standardizer.unstandardize_targets(m.predict(x_test_std));
    if (td.x_val.rows()) cell.val_rmse = rmse(m.predict(td.x_val), td.y_val) * ystd;
    cell.hyperparameters = kv("scale", m.scale) + ";iterations=" + std::to_string(m.propagation.iterations);
  } else if (method == "vat") {
    VatConfig vc;
    vc.epsilon_grid = config.vat_epsilon_grid;
    vc.lambda_grid = config.vat_lambda_grid;
    const VatSelection sel = select_vat(vc, regressor_config(config, seed), td);
    pred = sel.model.predict(x_test);
    cell.val_rmse = sel.model.best_val_rmse;
    cell.hyperparameters = kv("epsilon", sel.epsilon) + ";" + kv("lambda", sel.lambda);
  } else if (method == "meanteacher") {
    MeanTeacherConfig mc;
    mc.ema_decay = config.mt_ema_decay;
    mc.consistency_weight = config.mt_consistency;
    mc.noise_std = config.mt_noise;
    const MeanTeacherModel m = train_mean_teacher(mc, regressor_config(config, seed), td);
    pred = m.teacher.predict(x_test);
    cell.val_rmse = m.teacher.best_val_rmse;
    cell.hyperparameters = "best_epoch=" + std::to_string(m.teacher.best_epoch);
  } else if (method == "knn") {
    const KnnRegressor m = select_knn(td, config.knn_k_grid);
    pred = td.standardizer.unstandardize_targets(m.predict(x_test_std));
    if (td.x_val.rows()) cell.val_rmse = rmse(m.predict(td.x_val), td.y_val) * ystd;
    cell.hyperparameters = "k=" + std::to_string(m.k);
  } else {
    throw UnknownMethod("unknown method '" + method + "'");
  }
  cell.test_rmse = rmse(pred, y_test);
  if (!std::isfinite(cell.test_rmse)) throw NonFinite("non-finite test RMSE");
  cell.ok = true;
  return cell;
}

std::size_t worker_count(std::size_t tasks) {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("SSKL_THREADS")) {
    std::size_t cap = 0;
    const std::string_view s(env);
    const auto res = std::from_chars(s.data(), s.data() + s.size(), cap);
    if (res.ec == std::errc() && cap > 0) n = cap;
  }
  return std::max<std::size_t>(1, std::min(n, tasks));
}

ExperimentResult run_experiment(const ExperimentConfig& config, const Dataset& data, std::ostream* log) {
  ExperimentConfig cfg = config;
  normalize_methods(cfg);
  std::vector<SplitView> splits;
  for (std::size_t t = 0; t < cfg.trials; ++t)
    splits.push_back(make_split(data, cfg.n_labeled, cfg.base_seed + t, cfg.test_size));

  const std::size_t per_trial = cfg.methods.size();
  ExperimentResult result;
  result.cells.resize(cfg.trials * per_trial);
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  auto worker = [&] {
    for (std::size_t task; (task = next.fetch_add(1)) < result.cells.size();) {
      const std::size_t t = task / per_trial;
      const std::string& method = cfg.methods[task % per_trial];
      const auto start = std::chrono::steady_clock::now();
      CellResult cell;
      try {
        cell = run_cell(cfg, data, splits[t], t, method);
      } catch (const std::exception& e) {
        cell = CellResult{};
        cell.trial = t;
        cell.split_seed = splits[t].seed;
        cell.method = method;
        cell.error = e.what();
      }
      cell.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      if (log) {
        std::lock_guard lock(log_mutex);
        if (cell.ok)
          *log << "trial " << t << " " << method << ": test rmse " << cell.test_rmse << " (" << std::fixed
               << std::setprecision(1) << cell.seconds << "s)" << std::defaultfloat << std::setprecision(6) << "\n";
        else
          *log << "warning: trial " << t << " " << method << " failed: " << cell.error << "\n";
      }
      result.cells[task] = std::move(cell);
    }
  };
  const std::size_t workers = worker_count(result.cells.size());
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  result.summary = summarize(result.cells, cfg.methods);
  return result;
}

double trial_reduction(const std::vector<CellResult>& cells, const CellResult& cell) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (!cell.ok) return nan;
  for (const auto& c : cells)
    if (c.trial == cell.trial && c.method == "dkl") return c.ok && c.test_rmse > 0.0 ? percent_reduction(c.test_rmse, cell.test_rmse) : nan;
  return nan;
}

std::vector<MethodSummary> summarize(const std::vector<CellResult>& cells, const std::vector<std::string>& methods) {
  std::vector<MethodSummary> out;
  for (const auto& m : methods) {
    MethodSummary s;
    s.method = m;
    double sum = 0.0;
    double red_sum = 0.0;
    std::size_t red_count = 0;
    for (const auto& c : cells) {
      if (c.method != m || !c.ok) continue;
      ++s.trials_ok;
      sum += c.test_rmse;
      const double r = trial_reduction(cells, c);
      if (!std::isnan(r)) {
        red_sum += r;
        ++red_count;
      }
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    s.mean_test_rmse = s.trials_ok ? sum / static_cast<double>(s.trials_ok) : nan;
    s.mean_trial_reduction = red_count ? red_sum / static_cast<double>(red_count) : nan;
    out.push_back(s);
  }
  double base = std::numeric_limits<double>::quiet_NaN();
  for (const auto& s : out)
    if (s.method == "dkl") base = s.mean_test_rmse;
  for (auto& s : out)
    s.percent_reduction = (std::isnan(base) || std::isnan(s.mean_test_rmse) || base <= 0.0)
                              ? std::numeric_limits<double>::quiet_NaN()
                              : percent_reduction(base, s.mean_test_rmse);
  return out;
}

namespace {

std::string csv_num(double v) { return std::isnan(v) ? "" : format_double(v); }

std::string csv_text(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch == '\n' ? ' ' : ch;
  }
  return out + "\"";
}

}  // namespace

void write_trials_csv(std::ostream& out, const ExperimentResult& result) {
  out << "trial,split_seed,method,status,test_rmse,val_rmse,reduction_vs_dkl,hyperparameters,error\n";
  for (const auto& c : result.cells) {
    out << c.trial << ',' << c.split_seed << ',' << c.method << ',' << (c.ok ? "ok" : "failed") << ','
        << (c.ok ? csv_num(c.test_rmse) : "") << ',' << (c.ok ? csv_num(c.val_rmse) : "") << ','
        << csv_num(trial_reduction(result.cells, c)) << ',' << csv_text(c.hyperparameters) << ','
        << csv_text(c.error) << '\n';
  }
}

void write_summary_csv(std::ostream& out, const ExperimentResult& result) {
  out << "method,trials_ok,mean_test_rmse,percent_reduction,mean_trial_reduction\n";
  for (const auto& s : result.summary)
    out << s.method << ',' << s.trials_ok << ',' << csv_num(s.mean_test_rmse) << ',' << csv_num(s.percent_reduction)
        << ',' << csv_num(s.mean_trial_reduction) << '\n';
}

void write_summary_table(std::ostream& out, const ExperimentResult& result, const std::string& title) {
  auto fixed = [](double v, int prec) {
    if (std::isnan(v)) return std::string("-");
    std::ostringstream s;
    s << std::fixed << std::setprecision(prec) << v;
    return s.str();
  };
  out << title << "\n";
  out << std::left << std::setw(15) << "method" << std::right << std::setw(8) << "trials" << std::setw(14)
      << "test RMSE" << std::setw(14) << "reduction %" << std::setw(16) << "mean trial %" << "\n";
  for (const auto& s : result.summary)
    out << std::left << std::setw(15) << s.method << std::right << std::setw(8) << s.trials_ok << std::setw(14)
        << fixed(s.mean_test_rmse, 5) << std::setw(14) << fixed(s.percent_reduction, 2) << std::setw(16)
        << fixed(s.mean_trial_reduction, 2) << "\n";
}

void write_timings_csv(std::ostream& out, const ExperimentResult& result) {
  out << "trial,method,seconds\n";
  for (const auto& c : result.cells) out << c.trial << ',' << c.method << ',' << format_double(c.seconds) << '\n';
}

void write_outputs(const ExperimentConfig& config, const ExperimentResult& result, const std::string& title) {
  namespace fs = std::filesystem;
  fs::create_directories(config.output_dir);
  auto open = [&](const char* name) {
    std::ofstream f(fs::path(config.output_dir) / name);
    if (!f) throw FileNotFound("cannot write '" + (fs::path(config.output_dir) / name).string() + "'");
    return f;
  };
  {
    auto f = open("trials.csv");
    write_trials_csv(f, result);
  }
  {
    auto f = open("summary.csv");
    write_summary_csv(f, result);
  }
  {
    auto f = open("summary.txt");
    write_summary_table(f, result, title);
  }
  {
    auto f = open("timings.csv");
    write_timings_csv(f, result);
  }
  {
    auto f = open("config.txt");
    f << serialize_config(config);
  }
}

std::vector<CombinedRow> combine_summaries(const std::vector<std::string>& summary_paths) {
  std::vector<CombinedRow> rows;
  for (const auto& path : summary_paths) {
    std::ifstream in(path);
    if (!in) throw FileNotFound("cannot open '" + path + "'");
    std::string line;
    std::getline(in, line);
    if (trim(line) != "method,trials_ok,mean_test_rmse,percent_reduction,mean_trial_reduction")
      throw FormatError("'" + path + "' is not a summary.csv file");
    while (std::getline(in, line)) {
      if (trim(line).empty()) continue;
      std::vector<std::string> cols;
      std::stringstream ss(line);
      std::string cell;
      while (std::getline(ss, cell, ',')) cols.push_back(trim(cell));
      if (cols.size() < 4) throw FormatError("'" + path + "': short row");
      if (cols[3].empty()) continue;
      double r = 0.0;
      const auto res = std::from_chars(cols[3].data(), cols[3].data() + cols[3].size(), r);
      if (res.ec != std::errc()) throw FormatError("'" + path + "': bad reduction '" + cols[3] + "'");
      auto it = std::find_if(rows.begin(), rows.end(), [&](const CombinedRow& c) { return c.method == cols[0]; });
      if (it == rows.end()) {
        rows.push_back({cols[0], {}, 0.0});
        it = rows.end() - 1;
      }
      it->reductions.push_back(r);
    }
  }
  for (auto& row : rows) {
    std::vector<double> v = row.reductions;
    std::sort(v.begin(), v.end());
    const std::size_t k = v.size();
    row.median = k % 2 ? v[k / 2] : 0.5 * (v[k / 2 - 1] + v[k / 2]);
  }
  return rows;
}

}  // namespace sskl
