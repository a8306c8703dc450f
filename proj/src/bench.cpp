// Copyright 2026 The gradraker Authors.
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

#include "gradraker/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "gradraker/baselines.hpp"
#include "gradraker/io_util.hpp"
#include "gradraker/mkl.hpp"
#include "gradraker/random.hpp"
#include "gradraker/random_features.hpp"

namespace gradraker {

namespace {

// -- config parsing helpers ---------------------------------------------------

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    return parse_exact(v);
  } catch (const std::exception&) {
    throw std::invalid_argument("config " + key + ": expected a number, got '" + v + "'");
  }
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  std::uint64_t x = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw std::invalid_argument("config " + key + ": expected a non-negative integer, got '" +
                                v + "'");
  }
  return x;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("config " + key + ": expected true/false, got '" + v + "'");
}

std::string one_of(const std::string& key, const std::string& v,
                   std::initializer_list<const char*> allowed) {
  for (const char* a : allowed) {
    if (v == a) return v;
  }
  throw std::invalid_argument("config " + key + ": unsupported value '" + v + "'");
}

PatternMode pattern_mode_from(const std::string& v) {
  if (v == "column") return PatternMode::kColumn;
  if (v == "row") return PatternMode::kRow;
  if (v == "concat") return PatternMode::kConcat;
  throw std::invalid_argument("config pattern_mode: unsupported value '" + v + "'");
}

std::string pattern_mode_name(PatternMode m) {
  switch (m) {
    case PatternMode::kColumn: return "column";
    case PatternMode::kRow: return "row";
    case PatternMode::kConcat: return "concat";
  }
  return "column";
}

template <typename T, typename F>
std::string join(const std::vector<T>& xs, F&& fmt) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    out += fmt(xs[i]);
  }
  return out;
}

const std::vector<std::string> kKnownMethods = {"gradraker", "kl", "gk_df", "gk_bl", "knn"};

// -- numerics -----------------------------------------------------------------

double median(std::vector<double> xs) {
  if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(xs.begin(), xs.end());
  const std::size_t h = xs.size() / 2;
  return xs.size() % 2 ? xs[h] : 0.5 * (xs[h - 1] + xs[h]);
}

double mean(const std::vector<double>& xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double sample_std(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double acc = 0.0;
  for (double x : xs) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(xs.size() - 1));
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Runs `fn` reps times and returns the per-run wall times.
std::vector<double> time_reps(std::size_t reps, const std::function<void()>& fn) {
  std::vector<double> out;
  for (std::size_t r = 0; r < reps; ++r) {
    const auto start = Clock::now();
    fn();
    out.push_back(seconds_since(start));
  }
  return out;
}

Eigen::MatrixXd select(const Eigen::MatrixXd& k, const std::vector<Index>& rows,
                       const std::vector<Index>& cols) {
  Eigen::MatrixXd out(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          k(static_cast<Eigen::Index>(rows[i]), static_cast<Eigen::Index>(cols[j]));
    }
  }
  return out;
}

Eigen::MatrixXd select_columns(const Eigen::MatrixXd& m, const std::vector<Index>& cols) {
  Eigen::MatrixXd out(m.rows(), cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) {
    out.col(static_cast<Eigen::Index>(j)) = m.col(static_cast<Eigen::Index>(cols[j]));
  }
  return out;
}

// -- feature construction -----------------------------------------------------

// One column per node.
Eigen::MatrixXd pattern_matrix(const Graph& g, const ExperimentConfig& cfg) {
  const auto n = static_cast<Eigen::Index>(g.size());
  const auto& a = g.adjacency();
  Eigen::MatrixXd p;
  switch (cfg.pattern_mode) {
    case PatternMode::kColumn: p = a; break;
    case PatternMode::kRow: p = a.transpose(); break;
    case PatternMode::kConcat:
      p.resize(2 * n, n);
      p.topRows(n) = a;
      p.bottomRows(n) = a.transpose();
      break;
  }
  if (cfg.pattern_scale == "max_norm") {
    const double s = p.colwise().norm().maxCoeff();
    if (s > 0.0) p /= s;
  }
  return p;
}

// Zeroes the pattern entries that refer to nodes outside `visible`.
Eigen::VectorXd mask_pattern(const Eigen::VectorXd& pattern, const std::vector<char>& visible,
                             Index n) {
  Eigen::VectorXd out = pattern;
  for (Eigen::Index k = 0; k < out.size(); ++k) {
    if (!visible[static_cast<std::size_t>(k) % n]) out(k) = 0.0;
  }
  return out;
}

// Ground-truth kernel for the synthetic signal.
Eigen::MatrixXd truth_kernel(const ExperimentConfig& cfg, const Graph& g,
                             const Eigen::MatrixXd& patterns) {
  if (cfg.signal == "connectivity_gaussian") {
    return kernel_matrix(KernelSpec::gaussian(cfg.signal_sigma2), patterns);
  }
  if (cfg.signal == "diffusion") {
    return graph_kernel_matrix(g, GraphKernelSpec::diffusion(cfg.signal_sigma2));
  }
  const auto n = static_cast<Eigen::Index>(g.size());
  return Eigen::MatrixXd::Identity(n, n);
}

struct GraphKernels {
  Eigen::MatrixXd df;
  Eigen::MatrixXd bl;
};

GraphKernels build_graph_kernels(const ExperimentConfig& cfg, const Graph& g) {
  GraphKernels out;
  if (!cfg.method_enabled("gk_df") && !cfg.method_enabled("gk_bl")) return out;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(normalized_laplacian(g));
  if (cfg.method_enabled("gk_df")) {
    out.df = graph_kernel_from_spectrum(eig.eigenvalues(), eig.eigenvectors(),
                                        GraphKernelSpec::diffusion(cfg.gk_df_sigma2));
  }
  if (cfg.method_enabled("gk_bl")) {
    const Index band = std::min(cfg.gk_bl_band, g.size());
    out.bl = graph_kernel_from_spectrum(eig.eigenvalues(), eig.eigenvectors(),
                                        GraphKernelSpec::bandlimited(band));
  }
  return out;
}

// -- one trial ------------------------------------------------------------------

struct TrialData {
  const Graph* graph = nullptr;
  const Eigen::MatrixXd* patterns = nullptr;
  const GraphKernels* graph_kernels = nullptr;
  Eigen::VectorXd truth;
  /// Nodes with a known value; sampling and evaluation stay inside it.
  std::vector<Index> pool;
  Index m = 0;
  std::uint64_t seed = 0;
  bool timed = false;
};

// A fitted method: predicts a list of nodes given their feature columns.
using Predictor = std::function<Eigen::VectorXd(const std::vector<Index>& nodes,
                                                const Eigen::MatrixXd& features)>;
// Fits on (nodes, features, scaled labels, mu).
using Fitter = std::function<Predictor(const std::vector<Index>& nodes,
                                       const Eigen::MatrixXd& features,
                                       const Eigen::VectorXd& labels, double mu)>;

double validation_error(const Fitter& fit, const std::vector<Index>& train,
                        const Eigen::MatrixXd& train_features, const Eigen::VectorXd& y_train,
                        const std::vector<Index>& val, const Eigen::MatrixXd& val_features,
                        const Eigen::VectorXd& y_val, double mu) {
  try {
    const Predictor p = fit(train, train_features, y_train, mu);
    const Eigen::VectorXd est = p(val, val_features);
    if (!est.allFinite()) return std::numeric_limits<double>::infinity();
    return (est - y_val).squaredNorm() / static_cast<double>(y_val.size());
  } catch (const std::runtime_error&) {
    return std::numeric_limits<double>::infinity();
  }
}

void run_trial(const ExperimentConfig& cfg, const TrialData& data,
               std::map<std::string, MethodResult>& acc) {
  const Graph& g = *data.graph;
  const Eigen::MatrixXd& patterns = *data.patterns;
  const Index n = g.size();

  // Sampling plan over the pool, in draw order.
  const SamplingPlan local = sample_nodes(data.pool.size(), data.m, derive_seed(data.seed, 2));
  std::vector<Index> sampled;
  std::vector<Index> unsampled;
  for (Index i : local.sampled) sampled.push_back(data.pool[i]);
  for (Index i : local.unsampled) unsampled.push_back(data.pool[i]);
  std::sort(unsampled.begin(), unsampled.end());

  const Eigen::VectorXd y = gather(data.truth, sampled);
  double scale = 1.0;
  if (cfg.label_scale == "max_abs") {
    const double s = y.cwiseAbs().maxCoeff();
    if (s > 0.0) scale = s;
  }
  const Eigen::VectorXd ys = y / scale;
  const Eigen::VectorXd truth_c = gather(data.truth, unsampled);

  // Feature columns as each method sees them. In arrival mode a training
  // node only sees sampled nodes and the k-th new node additionally sees the
  // new nodes that arrived before it.
  Eigen::MatrixXd train_features = select_columns(patterns, sampled);
  Eigen::MatrixXd new_features = select_columns(patterns, unsampled);
  if (cfg.newnode_connectivity == "arrival") {
    std::vector<char> visible(n, 0);
    for (Index s : sampled) visible[s] = 1;
    for (Eigen::Index j = 0; j < train_features.cols(); ++j) {
      train_features.col(j) = mask_pattern(train_features.col(j), visible, n);
    }
    for (std::size_t k = 0; k < unsampled.size(); ++k) {
      const auto j = static_cast<Eigen::Index>(k);
      new_features.col(j) = mask_pattern(new_features.col(j), visible, n);
      visible[unsampled[k]] = 1;
    }
  }

  // Cross-validation split: the last cv_fraction of the plan order.
  const auto n_val = static_cast<std::size_t>(
      std::floor(cfg.cv_fraction * static_cast<double>(sampled.size())));
  const std::size_t n_fit = sampled.size() - n_val;
  const bool do_cv = n_val >= 1 && n_fit >= 1 && cfg.mu_grid.size() > 1;
  const std::vector<Index> cv_train(sampled.begin(), sampled.begin() + n_fit);
  const std::vector<Index> cv_val(sampled.begin() + n_fit, sampled.end());
  const Eigen::MatrixXd cv_train_f = train_features.leftCols(n_fit);
  const Eigen::MatrixXd cv_val_f = train_features.rightCols(n_val);
  const Eigen::VectorXd cv_train_y = ys.head(n_fit);
  const Eigen::VectorXd cv_val_y = ys.tail(n_val);

  auto evaluate = [&](MethodResult& r, const Eigen::VectorXd& est_scaled) {
    if (unsampled.empty()) return;
    const Eigen::VectorXd est = est_scaled * scale;
    r.nmse.push_back(nmse(est, truth_c));
    r.nmse_conventional.push_back(nmse_conventional(est, truth_c));
  };

  auto run_fitted = [&](const std::string& name, const Fitter& fit,
                        const std::function<double()>& newnode_cost) {
    MethodResult& r = acc[name];
    r.method = name;
    double mu = cfg.mu_grid.front();
    if (do_cv) {
      double best = std::numeric_limits<double>::infinity();
      for (double candidate : cfg.mu_grid) {
        const double err = validation_error(fit, cv_train, cv_train_f, cv_train_y, cv_val,
                                            cv_val_f, cv_val_y, candidate);
        if (err < best) {
          best = err;
          mu = candidate;
        }
      }
    }
    r.mu.push_back(mu);
    const Predictor model = fit(sampled, train_features, ys, mu);
    evaluate(r, model(unsampled, new_features));
    if (data.timed) {
      r.train_seconds = time_reps(cfg.timing_reps, [&] { fit(sampled, train_features, ys, mu); });
      if (!unsampled.empty()) {
        if (newnode_cost) {
          // Training and serving a new node are the same rebuild here.
          for (std::size_t rep = 0; rep < cfg.timing_reps; ++rep) {
            r.newnode_seconds.push_back(newnode_cost());
          }
          r.train_seconds = r.newnode_seconds;
        } else {
          const std::vector<double> t =
              time_reps(cfg.timing_reps, [&] { model(unsampled, new_features); });
          for (double s : t) r.newnode_seconds.push_back(s / static_cast<double>(unsampled.size()));
        }
      }
    }
  };

  const Index dim = patterns.rows();
  const std::uint64_t map_seed = derive_seed(data.seed, 3);

  if (cfg.method_enabled("gradraker")) {
    Fitter fit = [&](const std::vector<Index>&, const Eigen::MatrixXd& f,
                     const Eigen::VectorXd& labels, double mu) -> Predictor {
      auto model = std::make_shared<MklModel>(MklModel::init(
          cfg.kernels, cfg.rf_d, dim, cfg.eta, LossKind{cfg.loss, mu}, map_seed));
      for (Eigen::Index t = 0; t < f.cols(); ++t) {
        model->update(model->encode(f.col(t)), labels(t));
      }
      return [model](const std::vector<Index>&, const Eigen::MatrixXd& nf) {
        Eigen::VectorXd out(nf.cols());
        for (Eigen::Index j = 0; j < nf.cols(); ++j) out(j) = model->predict(nf.col(j));
        return out;
      };
    };
    run_fitted("gradraker", fit, nullptr);
  }

  if (cfg.method_enabled("kl")) {
    const KernelSpec spec = cfg.kl_kernel;
    Fitter fit = [spec](const std::vector<Index>&, const Eigen::MatrixXd& f,
                        const Eigen::VectorXd& labels, double mu) -> Predictor {
      auto train = std::make_shared<Eigen::MatrixXd>(f);
      auto alpha = std::make_shared<Eigen::VectorXd>(
          batch_kernel_ridge(kernel_matrix(spec, f), labels, mu));
      return [spec, train, alpha](const std::vector<Index>&, const Eigen::MatrixXd& nf) {
        return Eigen::VectorXd(cross_kernel(spec, nf, *train) * *alpha);
      };
    };
    run_fitted("kl", fit, nullptr);
  }

  auto graph_kernel_method = [&](const std::string& name, const Eigen::MatrixXd& kbar,
                                 const GraphKernelSpec& spec) {
    MethodResult& r = acc[name];
    r.method = name;
    if (g.directed()) {
      r.note = "inapplicable: directed graph";
      return;
    }
    Fitter fit = [&kbar](const std::vector<Index>& nodes, const Eigen::MatrixXd&,
                         const Eigen::VectorXd& labels, double mu) -> Predictor {
      const std::vector<Index> train = nodes;
      auto alpha = std::make_shared<Eigen::VectorXd>(
          batch_kernel_ridge(select(kbar, train, train), labels, mu));
      return [&kbar, train, alpha](const std::vector<Index>& query, const Eigen::MatrixXd&) {
        return Eigen::VectorXd(select(kbar, query, train) * *alpha);
      };
    };
    // A new node changes L, so serving it means rebuilding the kernel and
    // re-solving the batch problem.
    const std::function<double()> resolve = [&, spec]() {
      const auto start = Clock::now();
      const Eigen::MatrixXd k = graph_kernel_matrix(g, spec);
      const Eigen::VectorXd alpha =
          batch_kernel_ridge(select(k, sampled, sampled), ys, acc[name].mu.back());
      volatile double sink = select(k, {unsampled.front()}, sampled).row(0).dot(alpha);
      (void)sink;
      return seconds_since(start);
    };
    run_fitted(name, fit, resolve);
  };

  if (cfg.method_enabled("gk_df")) {
    graph_kernel_method("gk_df", data.graph_kernels->df,
                        GraphKernelSpec::diffusion(cfg.gk_df_sigma2));
  }
  if (cfg.method_enabled("gk_bl")) {
    graph_kernel_method("gk_bl", data.graph_kernels->bl,
                        GraphKernelSpec::bandlimited(std::min(cfg.gk_bl_band, n)));
  }

  if (cfg.method_enabled("knn")) {
    MethodResult& r = acc["knn"];
    r.method = "knn";
    std::map<Index, double> labeled;
    for (std::size_t i = 0; i < sampled.size(); ++i) {
      labeled[sampled[i]] = ys(static_cast<Eigen::Index>(i));
    }
    const double fallback = ys.size() ? ys.mean() : 0.0;
    std::size_t misses = 0;
    auto predict_all = [&]() {
      misses = 0;
      Eigen::VectorXd est(unsampled.size());
      for (std::size_t i = 0; i < unsampled.size(); ++i) {
        try {
          est(static_cast<Eigen::Index>(i)) = knn_predict(g, labeled, unsampled[i], cfg.knn_k);
        } catch (const KnnInapplicable&) {
          est(static_cast<Eigen::Index>(i)) = fallback;
          ++misses;
        }
      }
      return est;
    };
    evaluate(r, predict_all());
    r.knn_inapplicable += misses;
    if (data.timed && !unsampled.empty()) {
      r.train_seconds.assign(cfg.timing_reps, 0.0);
      for (double s : time_reps(cfg.timing_reps, [&] { predict_all(); })) {
        r.newnode_seconds.push_back(s / static_cast<double>(unsampled.size()));
      }
    }
  }

  for (const auto& name : kKnownMethods) {
    auto it = acc.find(name);
    if (it == acc.end()) continue;
    it->second.trials += 1;
    it->second.sampled = static_cast<Index>(sampled.size());
    it->second.unsampled = static_cast<Index>(unsampled.size());
  }
}

Index sample_count_for(const ExperimentConfig& cfg, std::size_t pool) {
  const auto m = static_cast<Index>(std::ceil(cfg.sample_fraction * static_cast<double>(pool)));
  return std::max<Index>(1, std::min<Index>(m, pool));
}

void collect(const ExperimentConfig& cfg, std::map<std::string, MethodResult>& acc,
             ExperimentResult& out) {
  for (const auto& name : cfg.methods) {
    auto it = acc.find(name);
    if (it != acc.end()) out.methods.push_back(std::move(it->second));
  }
  acc.clear();
}

std::string fmt_opt(const std::optional<double>& x) {
  return x ? format_exact(*x) : std::string("NA");
}

nlohmann::json json_opt(const std::optional<double>& x) {
  return x ? nlohmann::json(*x) : nlohmann::json(nullptr);
}

std::string fmt_median(const std::vector<double>& xs) {
  return xs.empty() ? std::string("NA") : format_exact(median(xs));
}

nlohmann::json json_median(const std::vector<double>& xs) {
  return xs.empty() ? nlohmann::json(nullptr) : nlohmann::json(median(xs));
}

}  // namespace

// -- ExperimentConfig -----------------------------------------------------------

void ExperimentConfig::set(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (key == "graph") {
    graph = one_of(key, v, {"er", "file"});
  } else if (key == "n") {
    n = to_uint(key, v);
  } else if (key == "edge_prob") {
    edge_prob = to_double(key, v);
  } else if (key == "edges") {
    edges = v;
  } else if (key == "labels") {
    labels = v;
  } else if (key == "directed") {
    directed = to_bool(key, v);
  } else if (key == "weighted") {
    weighted = to_bool(key, v);
  } else if (key == "pattern_mode") {
    pattern_mode = pattern_mode_from(v);
  } else if (key == "pattern_scale") {
    pattern_scale = one_of(key, v, {"none", "max_norm"});
  } else if (key == "signal") {
    signal = one_of(key, v, {"connectivity_gaussian", "diffusion", "identity"});
  } else if (key == "signal_sigma2") {
    signal_sigma2 = to_double(key, v);
  } else if (key == "noise_var") {
    noise_var = to_double(key, v);
  } else if (key == "kernels") {
    kernels.clear();
    for (const auto& item : split_list(v)) kernels.push_back(KernelSpec::parse(item));
  } else if (key == "rf_d") {
    rf_d = to_uint(key, v);
  } else if (key == "eta") {
    eta = to_double(key, v);
  } else if (key == "loss") {
    loss = LossKind::parse_type(v);
  } else if (key == "mu_grid") {
    mu_grid.clear();
    for (const auto& item : split_list(v)) mu_grid.push_back(to_double(key, item));
  } else if (key == "label_scale") {
    label_scale = one_of(key, v, {"none", "max_abs"});
  } else if (key == "sample_fraction") {
    sample_fraction = to_double(key, v);
  } else if (key == "sample_counts") {
    sample_counts.clear();
    for (const auto& item : split_list(v)) sample_counts.push_back(to_uint(key, item));
  } else if (key == "trials") {
    trials = to_uint(key, v);
  } else if (key == "seed") {
    seed = to_uint(key, v);
  } else if (key == "methods") {
    methods.clear();
    for (const auto& item : split_list(v)) {
      if (std::find(kKnownMethods.begin(), kKnownMethods.end(), item) == kKnownMethods.end()) {
        throw std::invalid_argument("config methods: unknown method '" + item + "'");
      }
      if (std::find(methods.begin(), methods.end(), item) == methods.end()) {
        methods.push_back(item);
      }
    }
  } else if (key == "gk_df_sigma2") {
    gk_df_sigma2 = to_double(key, v);
  } else if (key == "gk_bl_band") {
    gk_bl_band = to_uint(key, v);
  } else if (key == "kl_kernel") {
    kl_kernel = KernelSpec::parse(v);
  } else if (key == "knn_k") {
    knn_k = to_uint(key, v);
  } else if (key == "newnode_connectivity") {
    newnode_connectivity = one_of(key, v, {"full", "arrival"});
  } else if (key == "cv_fraction") {
    cv_fraction = to_double(key, v);
  } else if (key == "timing_reps") {
    timing_reps = to_uint(key, v);
  } else if (key == "horizon") {
    horizon = to_uint(key, v);
  } else if (key == "regret_rf_d") {
    regret_rf_d = to_uint(key, v);
  } else if (key == "regret_eta") {
    if (v == "auto") {
      regret_eta.reset();
    } else {
      regret_eta = to_double(key, v);
    }
  } else if (key == "regret_mu") {
    regret_mu = to_double(key, v);
  } else if (key == "bench_sizes") {
    bench_sizes.clear();
    for (const auto& item : split_list(v)) bench_sizes.push_back(to_uint(key, item));
  } else if (key == "timing_nodes") {
    timing_nodes = to_uint(key, v);
  } else {
    throw std::invalid_argument("config: unknown key '" + key + "'");
  }
}

ExperimentConfig ExperimentConfig::parse(std::istream& in) {
  ExperimentConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key = value");
    }
    try {
      cfg.set(trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const std::exception& e) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config '" + path + "'");
  return parse(in);
}

std::vector<std::pair<std::string, std::string>> ExperimentConfig::echo() const {
  auto num = [](double x) { return format_exact(x); };
  auto idx = [](Index x) { return std::to_string(x); };
  return {
      {"graph", graph},
      {"n", idx(n)},
      {"edge_prob", num(edge_prob)},
      {"edges", edges},
      {"labels", labels},
      {"directed", directed ? "true" : "false"},
      {"weighted", weighted ? "true" : "false"},
      {"pattern_mode", pattern_mode_name(pattern_mode)},
      {"pattern_scale", pattern_scale},
      {"signal", signal},
      {"signal_sigma2", num(signal_sigma2)},
      {"noise_var", num(noise_var)},
      {"kernels", join(kernels, [](const KernelSpec& k) { return k.to_string(); })},
      {"rf_d", idx(rf_d)},
      {"eta", num(eta)},
      {"loss", LossKind{loss, 0.0}.name()},
      {"mu_grid", join(mu_grid, num)},
      {"label_scale", label_scale},
      {"sample_fraction", num(sample_fraction)},
      {"sample_counts", join(sample_counts, idx)},
      {"trials", std::to_string(trials)},
      {"seed", std::to_string(seed)},
      {"methods", join(methods, [](const std::string& s) { return s; })},
      {"gk_df_sigma2", num(gk_df_sigma2)},
      {"gk_bl_band", idx(gk_bl_band)},
      {"kl_kernel", kl_kernel.to_string()},
      {"knn_k", idx(knn_k)},
      {"newnode_connectivity", newnode_connectivity},
      {"cv_fraction", num(cv_fraction)},
      {"timing_reps", std::to_string(timing_reps)},
      {"horizon", std::to_string(horizon)},
      {"regret_rf_d", idx(regret_rf_d)},
      {"regret_eta", regret_eta ? num(*regret_eta) : "auto"},
      {"regret_mu", num(regret_mu)},
      {"bench_sizes", join(bench_sizes, idx)},
      {"timing_nodes", idx(timing_nodes)},
  };
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("config: " + msg); };
  if (!(sample_fraction > 0.0 && sample_fraction <= 1.0)) fail("sample_fraction must be in (0, 1]");
  if (trials < 1) fail("trials must be >= 1");
  if (mu_grid.empty()) fail("mu_grid must not be empty");
  for (double mu : mu_grid) {
    if (!(mu >= 0.0)) fail("mu_grid entries must be >= 0");
  }
  if (kernels.empty()) fail("kernels must not be empty");
  if (rf_d < 1 || regret_rf_d < 1) fail("rf_d must be >= 1");
  if (!(eta > 0.0 && eta <= 1.0)) fail("eta must be in (0, 1]");
  if (regret_eta && !(*regret_eta > 0.0 && *regret_eta <= 1.0)) fail("regret_eta must be in (0, 1]");
  if (!(edge_prob >= 0.0 && edge_prob <= 1.0)) fail("edge_prob must be in [0, 1]");
  if (!(noise_var >= 0.0)) fail("noise_var must be >= 0");
  if (!(cv_fraction >= 0.0 && cv_fraction < 1.0)) fail("cv_fraction must be in [0, 1)");
  if (timing_reps < 1) fail("timing_reps must be >= 1");
  if (graph == "er" && n < 1) fail("n must be >= 1");
  if (graph == "file" && edges.empty()) fail("graph = file needs edges");
  if (loss != LossType::kLeastSquares && label_scale != "none") {
    fail("classification losses need label_scale = none");
  }
  if (!directed && pattern_mode != PatternMode::kColumn) {
    fail("row and concat patterns only apply to directed graphs");
  }
}

bool ExperimentConfig::method_enabled(const std::string& name) const {
  return std::find(methods.begin(), methods.end(), name) != methods.end();
}

// -- metrics ---------------------------------------------------------------------

double nmse_conventional(const Eigen::Ref<const Eigen::VectorXd>& estimates,
                         const Eigen::Ref<const Eigen::VectorXd>& truth) {
  if (estimates.size() != truth.size()) throw std::invalid_argument("nmse: length mismatch");
  if (truth.size() == 0) throw std::invalid_argument("nmse: empty evaluation set");
  const double denom = truth.squaredNorm();
  if (!(denom > 0.0)) throw std::invalid_argument("nmse: truth has zero norm");
  return (estimates - truth).squaredNorm() / denom;
}

double nmse(const Eigen::Ref<const Eigen::VectorXd>& estimates,
            const Eigen::Ref<const Eigen::VectorXd>& truth) {
  return nmse_conventional(estimates, truth) / static_cast<double>(truth.size());
}

std::optional<double> MethodResult::nmse_mean() const {
  if (nmse.empty()) return std::nullopt;
  return mean(nmse);
}

std::optional<double> MethodResult::nmse_std() const {
  if (nmse.empty()) return std::nullopt;
  return sample_std(nmse);
}

std::optional<double> MethodResult::nmse_conventional_mean() const {
  if (nmse_conventional.empty()) return std::nullopt;
  return mean(nmse_conventional);
}

const MethodResult* ExperimentResult::find(const std::string& method, Index sampled) const {
  for (const auto& m : methods) {
    if (m.method == method && m.sampled == sampled) return &m;
  }
  return nullptr;
}

const MethodResult* ExperimentResult::find(const std::string& method) const {
  for (const auto& m : methods) {
    if (m.method == method) return &m;
  }
  return nullptr;
}

// -- runners -------------------------------------------------------------------

ExperimentResult run_synthetic(const ExperimentConfig& config) {
  config.validate();
  if (config.graph != "er") throw std::invalid_argument("synthetic runs need graph = er");
  std::vector<Index> counts = config.sample_counts;
  if (counts.empty()) counts.push_back(sample_count_for(config, config.n));
  for (Index m : counts) {
    if (m < 1 || m > config.n) throw std::invalid_argument("sample count must be in [1, n]");
  }

  ExperimentResult out;
  std::map<std::string, MethodResult> acc;
  for (Index m : counts) {
    for (std::size_t trial = 0; trial < config.trials; ++trial) {
      const std::uint64_t ts = derive_seed(config.seed, trial);
      const Graph g = erdos_renyi(config.n, config.edge_prob, derive_seed(ts, 0));
      const Eigen::MatrixXd patterns = pattern_matrix(g, config);
      const GraphSignal signal = synth_signal(truth_kernel(config, g, patterns),
                                              config.noise_var, derive_seed(ts, 1));
      const GraphKernels gk = build_graph_kernels(config, g);
      TrialData data;
      data.graph = &g;
      data.patterns = &patterns;
      data.graph_kernels = &gk;
      data.truth = signal.values;
      data.pool.resize(g.size());
      std::iota(data.pool.begin(), data.pool.end(), Index{0});
      data.m = m;
      data.seed = ts;
      data.timed = trial == 0;
      run_trial(config, data, acc);
    }
    collect(config, acc, out);
  }
  return out;
}

ExperimentResult run_dataset(const ExperimentConfig& config) {
  config.validate();
  if (config.edges.empty()) throw std::invalid_argument("dataset runs need an edges file");
  if (config.labels.empty()) throw std::invalid_argument("dataset runs need a labels file");
  const Graph g = load_edge_list_file(config.edges, config.directed, config.weighted);
  const LabelTable table = load_labels_file(config.labels);
  if (!config.directed && config.pattern_mode != PatternMode::kColumn) {
    throw std::invalid_argument("row and concat patterns need a directed graph");
  }

  std::vector<Index> pool;
  std::vector<Eigen::Index> rows;
  for (std::size_t i = 0; i < table.nodes.size(); ++i) {
    const auto idx = g.index_of(table.nodes[i]);
    if (!idx) {
      throw std::runtime_error("label for node '" + table.nodes[i] + "' not in the graph");
    }
    pool.push_back(*idx);
    rows.push_back(static_cast<Eigen::Index>(i));
  }
  {
    std::vector<Index> sorted = pool;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw std::runtime_error("label file lists a node twice");
    }
  }

  const Eigen::MatrixXd patterns = pattern_matrix(g, config);
  const GraphKernels gk = build_graph_kernels(config, g);

  std::vector<Index> counts = config.sample_counts;
  if (counts.empty()) counts.push_back(sample_count_for(config, pool.size()));
  for (Index m : counts) {
    if (m < 1 || m > pool.size()) {
      throw std::invalid_argument("sample count must be in [1, labeled nodes]");
    }
  }

  ExperimentResult out;
  std::map<std::string, MethodResult> acc;
  for (Index m : counts) {
    std::size_t trial_index = 0;
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      Eigen::VectorXd truth = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(g.size()));
      for (std::size_t i = 0; i < pool.size(); ++i) {
        truth(static_cast<Eigen::Index>(pool[i])) = table.columns[c](rows[i]);
      }
      for (std::size_t trial = 0; trial < config.trials; ++trial, ++trial_index) {
        TrialData data;
        data.graph = &g;
        data.patterns = &patterns;
        data.graph_kernels = &gk;
        data.truth = truth;
        data.pool = pool;
        data.m = m;
        data.seed = derive_seed(config.seed, trial_index);
        data.timed = trial_index == 0;
        run_trial(config, data, acc);
      }
    }
    collect(config, acc, out);
  }
  return out;
}

std::optional<double> RegretResult::mean_growth_exponent() const {
  std::vector<double> xs;
  for (const auto& t : trials) {
    if (t.growth_exponent) xs.push_back(*t.growth_exponent);
  }
  if (xs.empty()) return std::nullopt;
  return mean(xs);
}

bool RegretResult::lemma_holds() const {
  for (const auto& t : trials) {
    for (const auto& c : t.lemma) {
      if (!(c.lhs <= c.bound)) return false;
    }
  }
  return true;
}

RegretResult run_regret(const ExperimentConfig& config) {
  config.validate();
  if (config.loss != LossType::kLeastSquares) {
    throw std::invalid_argument("regret runs need the least-squares loss");
  }
  if (config.graph != "er") throw std::invalid_argument("regret runs need graph = er");
  if (config.horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  const double eta = config.regret_eta.value_or(1.0 / std::sqrt(static_cast<double>(config.horizon)));
  const std::size_t horizon = config.horizon;

  RegretResult out;
  for (std::size_t trial = 0; trial < config.trials; ++trial) {
    const std::uint64_t ts = derive_seed(config.seed, trial);
    const Graph g = erdos_renyi(config.n, config.edge_prob, derive_seed(ts, 0));
    const Eigen::MatrixXd patterns = pattern_matrix(g, config);
    Eigen::VectorXd x = synth_signal(truth_kernel(config, g, patterns), config.noise_var,
                                     derive_seed(ts, 1))
                            .values;
    if (config.label_scale == "max_abs") {
      const double s = x.cwiseAbs().maxCoeff();
      if (s > 0.0) x /= s;
    }

    Rng rng(derive_seed(ts, 2));
    std::uniform_int_distribution<Index> pick(0, g.size() - 1);
    std::vector<Index> draws(horizon);
    for (auto& d : draws) d = pick(rng);

    MklModel model = MklModel::init(config.kernels, config.regret_rf_d, patterns.rows(), eta,
                                    LossKind{LossType::kLeastSquares, config.regret_mu},
                                    derive_seed(ts, 3));
    // Encode every node once; draws repeat nodes.
    std::vector<EncodedSample> encoded;
    encoded.reserve(g.size());
    for (Index i = 0; i < g.size(); ++i) {
      encoded.push_back(model.encode(patterns.col(static_cast<Eigen::Index>(i))));
    }
    std::vector<EncodedSample> stream;
    std::vector<double> labels;
    stream.reserve(horizon);
    for (Index d : draws) {
      stream.push_back(encoded[d]);
      labels.push_back(x(static_cast<Eigen::Index>(d)));
    }
    const MklTrainResult trained = mkl_train(model, stream, labels);
    const std::vector<double> online = trained.trace.combined_losses();

    const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(labels.data(),
                                                                static_cast<Eigen::Index>(horizon));
    std::vector<double> best(horizon, std::numeric_limits<double>::infinity());
    std::vector<PrefixOracle> oracles;
    for (std::size_t p = 0; p < model.kernel_count(); ++p) {
      std::vector<RfFeatures> rows;
      rows.reserve(horizon);
      for (const auto& s : stream) rows.push_back(s.per_kernel[p]);
      oracles.push_back(least_squares_prefix_oracle(stack_features(rows), y, config.regret_mu));
      for (std::size_t t = 0; t < horizon; ++t) {
        best[t] = std::min(best[t], oracles.back().prefix_loss[t]);
      }
    }

    const RegretReport report = static_regret(online, best);
    RegretTrial rt;
    rt.seed = ts;
    rt.eta = eta;
    rt.cumulative_online_loss = report.cumulative_online_loss;
    rt.best_fixed_loss = report.best_fixed_loss;
    rt.regret = report.regret;
    rt.growth_exponent = report.growth_exponent;
    rt.lipschitz = trained.trace.max_grad_norm();
    for (std::size_t p = 0; p < oracles.size(); ++p) {
      LemmaCheck c;
      c.kernel = config.kernels[p];
      c.theta_star_norm2 = oracles[p].theta_star.squaredNorm();
      c.lhs = report.cumulative_online_loss.back() - oracles[p].prefix_loss.back();
      c.bound = lemma_regret_bound(oracles.size(), eta, c.theta_star_norm2, rt.lipschitz, horizon);
      rt.lemma.push_back(c);
    }
    std::ostringstream w;
    trained.trace.write_tsv(w);
    rt.weights_trace = w.str();
    out.trials.push_back(std::move(rt));
  }
  return out;
}

std::optional<double> BenchResult::seconds(const std::string& method, Index n) const {
  for (const auto& r : rows) {
    if (r.method == method && r.n == n) return r.seconds_per_node;
  }
  return std::nullopt;
}

std::optional<double> BenchResult::ratio(const std::string& method) const {
  std::optional<BenchRow> lo;
  std::optional<BenchRow> hi;
  for (const auto& r : rows) {
    if (r.method != method) continue;
    if (!lo || r.n < lo->n) lo = r;
    if (!hi || r.n > hi->n) hi = r;
  }
  if (!lo || !hi || !(lo->seconds_per_node > 0.0)) return std::nullopt;
  return hi->seconds_per_node / lo->seconds_per_node;
}

BenchResult bench_newnode(const ExperimentConfig& config) {
  config.validate();
  BenchResult out;
  const std::size_t reps = config.timing_reps;
  for (std::size_t si = 0; si < config.bench_sizes.size(); ++si) {
    const Index n = config.bench_sizes[si];
    if (n < 2) throw std::invalid_argument("bench_sizes entries must be >= 2");
    const std::uint64_t ts = derive_seed(config.seed, si);
    const Graph g = erdos_renyi(n, config.edge_prob, derive_seed(ts, 0));
    const Eigen::MatrixXd patterns = pattern_matrix(g, config);
    const Eigen::VectorXd x =
        synth_signal(truth_kernel(config, g, patterns), config.noise_var, derive_seed(ts, 1))
            .values;
    const Index m = sample_count_for(config, n);
    const SamplingPlan plan = sample_nodes(n, m, derive_seed(ts, 2));
    const Eigen::VectorXd y = gather(x, plan.sampled);
    if (plan.unsampled.empty()) throw std::invalid_argument("bench needs unsampled nodes");
    std::vector<Index> queries(plan.unsampled.begin(),
                               plan.unsampled.begin() +
                                   std::min<std::size_t>(config.timing_nodes, plan.unsampled.size()));
    const double mu = config.mu_grid.front();

    auto record = [&](const std::string& method, const std::vector<double>& per_node) {
      out.rows.push_back({method, n, median(per_node), per_node.size()});
    };
    const double q = static_cast<double>(queries.size());

    if (config.method_enabled("gradraker")) {
      MklModel model = MklModel::init(config.kernels, config.rf_d, patterns.rows(), config.eta,
                                      LossKind{config.loss, mu}, derive_seed(ts, 3));
      for (std::size_t t = 0; t < plan.sampled.size(); ++t) {
        const auto node = static_cast<Eigen::Index>(plan.sampled[t]);
        model.update(model.encode(patterns.col(node)), y(static_cast<Eigen::Index>(t)));
      }
      std::vector<double> t = time_reps(reps, [&] {
        volatile double sink = 0.0;
        for (Index v : queries) sink = sink + model.predict(patterns.col(static_cast<Eigen::Index>(v)));
      });
      for (double& s : t) s /= q;
      record("gradraker", t);
    }
    if (config.method_enabled("kl")) {
      const Eigen::MatrixXd train = select_columns(patterns, plan.sampled);
      const Eigen::VectorXd alpha =
          batch_kernel_ridge(kernel_matrix(config.kl_kernel, train), y, mu);
      std::vector<double> t = time_reps(reps, [&] {
        volatile double sink = 0.0;
        for (Index v : queries) {
          const Eigen::MatrixXd row =
              cross_kernel(config.kl_kernel, patterns.col(static_cast<Eigen::Index>(v)), train);
          sink = sink + (row * alpha)(0);
        }
      });
      for (double& s : t) s /= q;
      record("kl", t);
    }
    auto gk = [&](const std::string& name, const GraphKernelSpec& spec) {
      if (g.directed()) return;
      // Each new node changes the Laplacian: rebuild, re-solve, read one row.
      std::vector<double> t = time_reps(reps, [&] {
        const Eigen::MatrixXd k = graph_kernel_matrix(g, spec);
        const Eigen::VectorXd alpha =
            batch_kernel_ridge(select(k, plan.sampled, plan.sampled), y, mu);
        volatile double sink = select(k, {queries.front()}, plan.sampled).row(0).dot(alpha);
        (void)sink;
      });
      record(name, t);
    };
    if (config.method_enabled("gk_df")) gk("gk_df", GraphKernelSpec::diffusion(config.gk_df_sigma2));
    if (config.method_enabled("gk_bl")) {
      gk("gk_bl", GraphKernelSpec::bandlimited(std::min(config.gk_bl_band, n)));
    }
    if (config.method_enabled("knn")) {
      std::map<Index, double> labeled;
      for (std::size_t i = 0; i < plan.sampled.size(); ++i) {
        labeled[plan.sampled[i]] = y(static_cast<Eigen::Index>(i));
      }
      std::vector<double> t = time_reps(reps, [&] {
        volatile double sink = 0.0;
        for (Index v : queries) {
          try {
            sink = sink + knn_predict(g, labeled, v, config.knn_k);
          } catch (const KnnInapplicable&) {
          }
        }
      });
      for (double& s : t) s /= q;
      record("knn", t);
    }
  }
  return out;
}

// -- reports -------------------------------------------------------------------

void Table::write_tsv(std::ostream& out) const {
  for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "\t" : "") << columns[i];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "\t" : "") << row[i];
    out << '\n';
  }
}

nlohmann::json Table::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& row : rows) {
    nlohmann::json obj = nlohmann::json::object();
    for (std::size_t i = 0; i < columns.size() && i < row.size(); ++i) {
      obj[columns[i]] = row[i];
    }
    arr.push_back(obj);
  }
  return arr;
}

nlohmann::json Report::to_json() const {
  nlohmann::json j;
  j["command"] = command;
  j["seed"] = seed;
  nlohmann::json cfg = nlohmann::json::object();
  for (const auto& [k, v] : config) cfg[k] = v;
  j["config"] = cfg;
  j["results"] = summary;
  j["timing"] = timing_summary;
  return j;
}

void Report::write(const std::string& dir) const {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  auto open = [](const fs::path& p) {
    std::ofstream f(p);
    if (!f) throw std::runtime_error("cannot write '" + p.string() + "'");
    return f;
  };
  {
    auto f = open(fs::path(dir) / "report.tsv");
    results.write_tsv(f);
  }
  if (!timing.columns.empty()) {
    auto f = open(fs::path(dir) / "timing.tsv");
    timing.write_tsv(f);
  }
  {
    auto f = open(fs::path(dir) / "summary.json");
    f << to_json().dump(2) << '\n';
  }
  for (const auto& [rel, body] : traces) {
    const fs::path p = fs::path(dir) / "traces" / rel;
    fs::create_directories(p.parent_path());
    auto f = open(p);
    f << body;
  }
}

Report make_report(const ExperimentConfig& config, const std::string& command,
                   const ExperimentResult& result) {
  Report r;
  r.command = command;
  r.config = config.echo();
  r.seed = config.seed;
  r.results.columns = {"method",    "sampled",       "unsampled",   "trials",
                       "nmse_mean", "nmse_std",      "nmse_conventional_mean",
                       "mu_median", "knn_inapplicable"};
  r.timing.columns = {"method", "sampled", "train_seconds_median", "newnode_seconds_median",
                      "reps"};
  nlohmann::json methods = nlohmann::json::array();
  nlohmann::json timing = nlohmann::json::array();
  for (const auto& m : result.methods) {
    r.results.rows.push_back({m.method, std::to_string(m.sampled), std::to_string(m.unsampled),
                              std::to_string(m.trials), fmt_opt(m.nmse_mean()),
                              fmt_opt(m.nmse_std()), fmt_opt(m.nmse_conventional_mean()),
                              fmt_median(m.mu), std::to_string(m.knn_inapplicable)});
    nlohmann::json j;
    j["method"] = m.method;
    j["sampled"] = m.sampled;
    j["unsampled"] = m.unsampled;
    j["trials"] = m.trials;
    j["nmse_mean"] = json_opt(m.nmse_mean());
    j["nmse_std"] = json_opt(m.nmse_std());
    j["nmse_conventional_mean"] = json_opt(m.nmse_conventional_mean());
    j["nmse_per_trial"] = m.nmse;
    j["mu_per_trial"] = m.mu;
    j["knn_inapplicable"] = m.knn_inapplicable;
    if (m.nmse.empty()) j["nmse_note"] = "undefined: no unsampled nodes";
    if (!m.note.empty()) j["note"] = m.note;
    methods.push_back(j);

    r.timing.rows.push_back({m.method, std::to_string(m.sampled), fmt_median(m.train_seconds),
                             fmt_median(m.newnode_seconds),
                             std::to_string(m.newnode_seconds.size())});
    nlohmann::json tj;
    tj["method"] = m.method;
    tj["sampled"] = m.sampled;
    tj["train_seconds_median"] = json_median(m.train_seconds);
    tj["newnode_seconds_median"] = json_median(m.newnode_seconds);
    tj["reps"] = m.newnode_seconds.size();
    timing.push_back(tj);
  }
  r.summary["methods"] = methods;
  r.timing_summary["methods"] = timing;
  return r;
}

Report make_report(const ExperimentConfig& config, const RegretResult& result) {
  Report r;
  r.command = "regret";
  r.config = config.echo();
  r.seed = config.seed;
  r.results.columns = {"trial", "kernel", "lemma_lhs", "lemma_bound", "theta_star_norm2",
                       "lipschitz", "final_regret", "growth_exponent"};
  nlohmann::json trials = nlohmann::json::array();
  for (std::size_t i = 0; i < result.trials.size(); ++i) {
    const auto& t = result.trials[i];
    nlohmann::json tj;
    tj["trial"] = i;
    tj["seed"] = t.seed;
    tj["eta"] = t.eta;
    tj["final_regret"] = t.regret.back();
    tj["growth_exponent"] = json_opt(t.growth_exponent);
    tj["lipschitz"] = t.lipschitz;
    nlohmann::json lemma = nlohmann::json::array();
    for (const auto& c : t.lemma) {
      r.results.rows.push_back({std::to_string(i), c.kernel.to_string(), format_exact(c.lhs),
                                format_exact(c.bound), format_exact(c.theta_star_norm2),
                                format_exact(t.lipschitz), format_exact(t.regret.back()),
                                fmt_opt(t.growth_exponent)});
      lemma.push_back({{"kernel", c.kernel.to_string()},
                       {"lhs", c.lhs},
                       {"bound", c.bound},
                       {"theta_star_norm2", c.theta_star_norm2},
                       {"holds", c.lhs <= c.bound}});
    }
    tj["lemma"] = lemma;
    trials.push_back(tj);

    std::ostringstream series;
    series << "t\tcumulative_online_loss\tbest_fixed_loss\tregret\n";
    for (std::size_t s = 0; s < t.regret.size(); ++s) {
      series << s + 1 << '\t' << format_exact(t.cumulative_online_loss[s]) << '\t'
             << format_exact(t.best_fixed_loss[s]) << '\t' << format_exact(t.regret[s]) << '\n';
    }
    r.traces.emplace_back("regret_trial" + std::to_string(i) + ".tsv", series.str());
    r.traces.emplace_back("weights_trial" + std::to_string(i) + ".tsv", t.weights_trace);
  }
  r.summary["trials"] = trials;
  r.summary["mean_growth_exponent"] = json_opt(result.mean_growth_exponent());
  r.summary["lemma_holds"] = result.lemma_holds();
  return r;
}

Report make_report(const ExperimentConfig& config, const BenchResult& result) {
  Report r;
  r.command = "bench-newnode";
  r.config = config.echo();
  r.seed = config.seed;
  r.results.columns = {"method", "n", "seconds_per_node_median", "reps"};
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : result.rows) {
    r.results.rows.push_back(
        {row.method, std::to_string(row.n), format_exact(row.seconds_per_node),
         std::to_string(row.reps)});
    rows.push_back({{"method", row.method},
                    {"n", row.n},
                    {"seconds_per_node_median", row.seconds_per_node},
                    {"reps", row.reps}});
  }
  nlohmann::json ratios = nlohmann::json::object();
  for (const auto& name : kKnownMethods) {
    if (auto x = result.ratio(name)) ratios[name] = *x;
  }
  // Every number here is a wall-clock measurement.
  r.timing_summary["rows"] = rows;
  r.timing_summary["ratio_largest_to_smallest"] = ratios;
  return r;
}

}  // namespace gradraker
