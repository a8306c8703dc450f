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
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gradraker/graph.hpp"
#include "gradraker/online_learner.hpp"
#include "gradraker/random_features.hpp"

namespace gradraker {

/// One node as the learner sees it: its encoding under every kernel map.
struct EncodedSample {
  std::vector<RfFeatures> per_kernel;
};

/// Everything recorded for one online step, measured before the update.
struct MklStep {
  double prediction = 0.0;
  double combined_loss = 0.0;
  Eigen::VectorXd kernel_predictions;
  Eigen::VectorXd kernel_losses;
  /// Normalized weights used for `prediction`.
  Eigen::VectorXd weights;
  /// Largest per-kernel gradient norm seen in this step.
  double max_grad_norm = 0.0;
};

/// Multi-kernel online learner over random features.
///
/// Each kernel p owns a frozen RfMap and a SingleKernelState. The combined
/// estimate is sum_p wbar_p theta_p . z_p(a). After every sample each
/// learner takes an OGD step and each weight is multiplied by
/// exp(-eta * clip(loss_p, 0, 1)). Weights live in the log domain and are
/// shifted so the largest is 1 after every update; only ratios matter.
class MklModel {
 public:
  /// Zero thetas, equal weights. Kernel p's map uses derive_seed(seed, p).
  static MklModel init(std::span<const KernelSpec> kernels, Eigen::Index d, Eigen::Index dim,
                       double eta, LossKind loss, std::uint64_t seed);

  std::size_t kernel_count() const { return maps_.size(); }
  Eigen::Index dim() const { return maps_.front().dim(); }
  double eta() const { return eta_; }
  const LossKind& loss() const { return learners_.front().loss; }
  const std::vector<RfMap>& maps() const { return maps_; }
  const std::vector<SingleKernelState>& learners() const { return learners_; }

  Eigen::VectorXd normalized_weights() const;
  /// Un-normalized weights, scaled so the largest equals 1.
  Eigen::VectorXd weights() const;
  /// Multiplies every un-normalized weight by `factor` > 0.
  void rescale_weights(double factor);

  /// Node-side encoding under every kernel map.
  EncodedSample encode(const Eigen::Ref<const Eigen::VectorXd>& pattern) const;

  Eigen::VectorXd kernel_predictions(const EncodedSample& sample) const;
  double predict(const EncodedSample& sample) const;
  double predict(const Eigen::Ref<const Eigen::VectorXd>& pattern) const;

  /// Regularizer of the combined function: sum_p wbar_p^2 |theta_p|^2.
  double combined_norm2() const;

  /// One online step on an encoded sample. Throws on a non-finite loss.
  MklStep update(const EncodedSample& sample, double label);

  void save(std::ostream& out) const;
  static MklModel load(std::istream& in);

 private:
  std::vector<RfMap> maps_;
  std::vector<SingleKernelState> learners_;
  Eigen::VectorXd log_weights_;
  double eta_ = 0.5;
};

/// Per-step record of a training pass.
struct MklTrace {
  std::vector<MklStep> steps;

  std::vector<double> combined_losses() const;
  double max_grad_norm() const;
  /// Tab separated: t, combined loss, P kernel losses, P weights.
  void write_tsv(std::ostream& out) const;
};

/// Maps a node index to its feature vector (connectivity column, a column
/// of A^h, a layer adjacency column, or external nodal features).
struct FeatureProvider {
  std::string name;
  Eigen::Index dim = 0;
  std::function<Eigen::VectorXd(Index)> extract;

  Eigen::VectorXd operator()(Index node) const;

  /// Connectivity pattern of `g`, multiplied by `scale`.
  static FeatureProvider connectivity(const Graph& g, PatternMode mode = PatternMode::kColumn,
                                      double scale = 1.0);
  /// Columns of A^hops.
  static FeatureProvider multi_hop(const Graph& g, unsigned hops, double scale = 1.0);
  /// Columns of a dim x N feature matrix.
  static FeatureProvider nodal_features(std::string name, Eigen::MatrixXd features);
};

struct LabeledNode {
  Index node = 0;
  double label = 0.0;
};

struct MklTrainResult {
  MklModel model;
  MklTrace trace;
};

/// Sequential pass: encode, predict, record, update.
MklTrainResult mkl_train(MklModel model, std::span<const LabeledNode> samples,
                         const FeatureProvider& provider);
MklTrainResult mkl_train(MklModel model, std::span<const EncodedSample> samples,
                         std::span<const double> labels);

struct EnsembleSample {
  std::vector<EncodedSample> per_provider;
};

struct EnsembleStep {
  double prediction = 0.0;
  Eigen::VectorXd learner_losses;
  Eigen::VectorXd beta;
};

/// Weighted ensemble of MKL learners over different feature providers;
/// beta follows the same multiplicative rule one level up.
class EnsembleModel {
 public:
  EnsembleModel(std::vector<FeatureProvider> providers, std::vector<MklModel> models,
                double eta);

  std::size_t size() const { return models_.size(); }
  const std::vector<MklModel>& models() const { return models_; }
  Eigen::VectorXd beta() const;

  EnsembleSample encode(Index node) const;
  double predict(const EnsembleSample& sample) const;
  EnsembleStep update(const EnsembleSample& sample, double label);

 private:
  std::vector<FeatureProvider> providers_;
  std::vector<MklModel> models_;
  Eigen::VectorXd log_beta_;
  double eta_;
};

EnsembleModel ensemble_combine(std::vector<FeatureProvider> providers,
                               std::vector<MklModel> models, double eta);

struct RegretReport {
  std::vector<double> cumulative_online_loss;
  std::vector<double> best_fixed_loss;
  std::vector<double> regret;
  /// Slope of log regret against log t; empty when undefined.
  std::optional<double> growth_exponent;
};

/// regret[t] = sum_{tau<=t} online[tau] - oracle_prefix[t], where
/// oracle_prefix[t] is the best fixed loss over the first t+1 steps.
RegretReport static_regret(std::span<const double> online_losses,
                           std::span<const double> oracle_prefix_loss);

/// Least-squares slope of log(regret) on log(t) over log-spaced t in
/// [t_min, T] with positive regret. Needs at least three such points.
std::optional<double> fit_growth_exponent(std::span<const double> regret, std::size_t t_min);

/// Best fixed RF-space comparator for least squares, for every prefix:
/// min_theta sum_{tau<=t} (theta.z_tau - y_tau)^2 + mu (t+1) |theta|^2.
struct PrefixOracle {
  std::vector<double> prefix_loss;
  /// Full-horizon minimizer.
  Eigen::VectorXd theta_star;
};

PrefixOracle least_squares_prefix_oracle(const Eigen::MatrixXd& z, const Eigen::VectorXd& y,
                                         double mu);

/// ln P / eta + |theta*|^2 / (2 eta) + eta L^2 T / 2 + eta T.
double lemma_regret_bound(std::size_t kernels, double eta, double theta_star_norm2,
                          double lipschitz, std::size_t horizon);

}  // namespace gradraker
