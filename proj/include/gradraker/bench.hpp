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

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "gradraker/graph.hpp"
#include "gradraker/kernels.hpp"
#include "gradraker/online_learner.hpp"

namespace gradraker {

/// Flat key = value experiment description. Unknown keys are rejected.
///
/// Graph:    graph (er|file), n, edge_prob, edges, labels, directed, weighted,
///           pattern_mode (column|row|concat), pattern_scale (none|max_norm)
/// Signal:   signal (connectivity_gaussian|diffusion|identity), signal_sigma2,
///           noise_var
/// Learner:  kernels, rf_d, eta, loss, mu_grid, label_scale (none|max_abs)
/// Protocol: sample_fraction, sample_counts, trials, seed, methods,
///           gk_df_sigma2, gk_bl_band, kl_kernel, knn_k, newnode_connectivity
///           (full|arrival), cv_fraction, timing_reps
/// Regret:   horizon, regret_rf_d, regret_eta (auto = 1/sqrt(T)), regret_mu
/// Bench:    bench_sizes, timing_nodes
struct ExperimentConfig {
  std::string graph = "er";
  Index n = 1000;
  double edge_prob = 0.005;
  std::string edges;
  std::string labels;
  bool directed = false;
  bool weighted = false;
  PatternMode pattern_mode = PatternMode::kColumn;
  std::string pattern_scale = "none";

  std::string signal = "connectivity_gaussian";
  double signal_sigma2 = 5.0;
  double noise_var = 0.01;

  std::vector<KernelSpec> kernels = {KernelSpec::gaussian(1.0), KernelSpec::gaussian(5.0)};
  Index rf_d = 400;
  double eta = 0.5;
  LossType loss = LossType::kLeastSquares;
  std::vector<double> mu_grid = {1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1e0};
  std::string label_scale = "max_abs";

  double sample_fraction = 0.05;
  std::vector<Index> sample_counts;
  std::size_t trials = 20;
  std::uint64_t seed = 1;
  std::vector<std::string> methods = {"gradraker", "kl", "gk_df", "gk_bl", "knn"};
  double gk_df_sigma2 = 5.0;
  Index gk_bl_band = 20;
  KernelSpec kl_kernel = KernelSpec::gaussian(5.0);
  Index knn_k = 0;
  std::string newnode_connectivity = "full";
  double cv_fraction = 0.25;
  std::size_t timing_reps = 5;

  std::size_t horizon = 2000;
  Index regret_rf_d = 50;
  std::optional<double> regret_eta;
  double regret_mu = 1e-3;

  std::vector<Index> bench_sizes = {500, 1000, 2000};
  Index timing_nodes = 200;

  /// Applies one key = value pair; throws std::invalid_argument on an
  /// unknown key or a malformed value.
  void set(const std::string& key, const std::string& value);
  /// Reads key = value lines; '#' starts a comment.
  static ExperimentConfig parse(std::istream& in);
  static ExperimentConfig from_file(const std::string& path);
  /// Every key with its current value, in a fixed order.
  std::vector<std::pair<std::string, std::string>> echo() const;
  /// Cross-field checks; throws std::invalid_argument.
  void validate() const;

  bool method_enabled(const std::string& name) const;
};

/// (1/|S^c|) |est - truth|^2 / |truth|^2. Throws on a length mismatch, an
/// empty set or a zero-norm truth.
double nmse(const Eigen::Ref<const Eigen::VectorXd>& estimates,
            const Eigen::Ref<const Eigen::VectorXd>& truth);
/// |est - truth|^2 / |truth|^2.
double nmse_conventional(const Eigen::Ref<const Eigen::VectorXd>& estimates,
                         const Eigen::Ref<const Eigen::VectorXd>& truth);

/// One method at one training-set size, aggregated over trials.
struct MethodResult {
  std::string method;
  Index sampled = 0;
  Index unsampled = 0;
  std::size_t trials = 0;
  /// Per trial; empty when the unsampled set is empty.
  std::vector<double> nmse;
  std::vector<double> nmse_conventional;
  /// Regularization picked by cross validation, per trial.
  std::vector<double> mu;
  /// Unsampled nodes without a labeled neighbor, summed over trials.
  std::size_t knn_inapplicable = 0;
  /// Timing samples in seconds (not part of the deterministic output).
  std::vector<double> train_seconds;
  std::vector<double> newnode_seconds;
  std::string note;

  std::optional<double> nmse_mean() const;
  std::optional<double> nmse_std() const;
  std::optional<double> nmse_conventional_mean() const;
};

struct ExperimentResult {
  std::vector<MethodResult> methods;

  const MethodResult* find(const std::string& method, Index sampled) const;
  const MethodResult* find(const std::string& method) const;
};

/// Synthetic suite: ER graph, ground-truth kernel, signal, sampling,
/// training on sampled nodes, prediction of the rest as new nodes.
ExperimentResult run_synthetic(const ExperimentConfig& config);

/// Same protocol on a loaded edge list; each label column is one signal.
ExperimentResult run_dataset(const ExperimentConfig& config);

/// Per-kernel Lemma check for one regret trial.
struct LemmaCheck {
  KernelSpec kernel;
  double lhs = 0.0;
  double bound = 0.0;
  double theta_star_norm2 = 0.0;
};

struct RegretTrial {
  std::uint64_t seed = 0;
  double eta = 0.0;
  std::vector<double> cumulative_online_loss;
  std::vector<double> best_fixed_loss;
  std::vector<double> regret;
  std::optional<double> growth_exponent;
  double lipschitz = 0.0;
  std::vector<LemmaCheck> lemma;
  std::string weights_trace;
};

struct RegretResult {
  std::vector<RegretTrial> trials;
  std::optional<double> mean_growth_exponent() const;
  bool lemma_holds() const;
};

/// Streams `horizon` i.i.d. node draws through the multi-kernel learner and
/// compares against the best fixed RF least-squares function per prefix.
RegretResult run_regret(const ExperimentConfig& config);

struct BenchRow {
  std::string method;
  Index n = 0;
  /// Median seconds to serve one new node.
  double seconds_per_node = 0.0;
  std::size_t reps = 0;
};

struct BenchResult {
  std::vector<BenchRow> rows;
  std::optional<double> seconds(const std::string& method, Index n) const;
  /// t(largest N) / t(smallest N).
  std::optional<double> ratio(const std::string& method) const;
};

/// New-node inference cost over ER graphs of the configured sizes.
BenchResult bench_newnode(const ExperimentConfig& config);

/// Rectangular string table written as TSV or as a JSON array of objects.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void write_tsv(std::ostream& out) const;
  nlohmann::json to_json() const;
};

/// What a subcommand writes: deterministic results, timings, extra summary
/// fields and trace files (relative path, contents).
struct Report {
  std::string command;
  std::vector<std::pair<std::string, std::string>> config;
  std::uint64_t seed = 0;
  Table results;
  Table timing;
  nlohmann::json summary = nlohmann::json::object();
  nlohmann::json timing_summary = nlohmann::json::object();
  std::vector<std::pair<std::string, std::string>> traces;

  nlohmann::json to_json() const;
  /// report.tsv, timing.tsv, summary.json and traces/ under `dir`.
  void write(const std::string& dir) const;
};

Report make_report(const ExperimentConfig& config, const std::string& command,
                   const ExperimentResult& result);
Report make_report(const ExperimentConfig& config, const RegretResult& result);
Report make_report(const ExperimentConfig& config, const BenchResult& result);

}  // namespace gradraker
