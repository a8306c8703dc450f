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

#include "gradraker/mkl.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <memory>
#include <ostream>
#include <stdexcept>

#include "gradraker/baselines.hpp"
#include "gradraker/io_util.hpp"
#include "gradraker/random.hpp"

namespace gradraker {

namespace {

Eigen::VectorXd softmax(const Eigen::VectorXd& logw) {
  Eigen::VectorXd w = (logw.array() - logw.maxCoeff()).exp();
  return w / w.sum();
}

void check_eta(double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) {
    throw std::invalid_argument("weight step size eta must lie in (0, 1]");
  }
}

}  // namespace

// -- MklModel ---------------------------------------------------------------

MklModel MklModel::init(std::span<const KernelSpec> kernels, Eigen::Index d,
                        Eigen::Index dim, double eta, LossKind loss, std::uint64_t seed) {
  if (kernels.empty()) throw std::invalid_argument("mkl_init: empty kernel dictionary");
  check_eta(eta);
  MklModel m;
  m.eta_ = eta;
  for (std::size_t p = 0; p < kernels.size(); ++p) {
    m.maps_.emplace_back(kernels[p], d, dim, derive_seed(seed, p));
    m.learners_.push_back(SingleKernelState::init(m.maps_.back(), eta, loss));
  }
  m.log_weights_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(kernels.size()));
  return m;
}

Eigen::VectorXd MklModel::normalized_weights() const { return softmax(log_weights_); }

Eigen::VectorXd MklModel::weights() const {
  return (log_weights_.array() - log_weights_.maxCoeff()).exp();
}

void MklModel::rescale_weights(double factor) {
  if (!(factor > 0.0)) throw std::invalid_argument("rescale_weights: factor must be > 0");
  log_weights_.array() += std::log(factor);
}

EncodedSample MklModel::encode(const Eigen::Ref<const Eigen::VectorXd>& pattern) const {
  EncodedSample s;
  s.per_kernel.reserve(maps_.size());
  for (const auto& map : maps_) s.per_kernel.push_back(map.encode(pattern));
  return s;
}

Eigen::VectorXd MklModel::kernel_predictions(const EncodedSample& sample) const {
  if (sample.per_kernel.size() != learners_.size()) {
    throw std::invalid_argument("encoded sample has the wrong number of kernels");
  }
  Eigen::VectorXd f(static_cast<Eigen::Index>(learners_.size()));
  for (std::size_t p = 0; p < learners_.size(); ++p) {
    f(static_cast<Eigen::Index>(p)) = learners_[p].predict(sample.per_kernel[p]);
  }
  return f;
}

double MklModel::predict(const EncodedSample& sample) const {
  return normalized_weights().dot(kernel_predictions(sample));
}

double MklModel::predict(const Eigen::Ref<const Eigen::VectorXd>& pattern) const {
  return predict(encode(pattern));
}

double MklModel::combined_norm2() const {
  const Eigen::VectorXd w = normalized_weights();
  double acc = 0.0;
  for (std::size_t p = 0; p < learners_.size(); ++p) {
    const double wp = w(static_cast<Eigen::Index>(p));
    acc += wp * wp * learners_[p].theta.squaredNorm();
  }
  return acc;
}

MklStep MklModel::update(const EncodedSample& sample, double label) {
  if (!std::isfinite(label)) throw std::invalid_argument("mkl_update: label must be finite");
  MklStep step;
  step.weights = normalized_weights();
  step.kernel_predictions = kernel_predictions(sample);
  step.prediction = step.weights.dot(step.kernel_predictions);
  step.combined_loss = loss_value(loss(), step.prediction, label, combined_norm2());

  const auto p_count = static_cast<Eigen::Index>(learners_.size());
  step.kernel_losses.resize(p_count);
  for (Eigen::Index p = 0; p < p_count; ++p) {
    auto& learner = learners_[static_cast<std::size_t>(p)];
    const double lp = loss_value(learner.loss, step.kernel_predictions(p), label,
                                 learner.theta.squaredNorm());
    if (!std::isfinite(lp)) throw std::runtime_error("mkl_update: non-finite loss");
    step.kernel_losses(p) = lp;
    const double g = apply_ogd_step(learner, sample.per_kernel[static_cast<std::size_t>(p)],
                                    label);
    step.max_grad_norm = std::max(step.max_grad_norm, g);
    log_weights_(p) -= eta_ * clipped_loss(lp);
  }
  log_weights_.array() -= log_weights_.maxCoeff();
  return step;
}

void MklModel::save(std::ostream& out) const {
  // Config hash ties the bundle to its maps and hyperparameters.
  std::uint64_t hash = mix64(std::bit_cast<std::uint64_t>(eta_));
  for (const auto& m : maps_) hash = mix64(hash ^ m.tag());
  out << "gradraker-checkpoint 1\n"
      << "config_hash " << hash << '\n'
      << "eta " << format_exact(eta_) << '\n'
      << "kernels " << maps_.size() << '\n';
  for (std::size_t p = 0; p < maps_.size(); ++p) {
    maps_[p].save(out);
    save_checkpoint(out, learners_[p]);
  }
  out << "log_weights";
  for (Eigen::Index p = 0; p < log_weights_.size(); ++p) {
    out << ' ' << format_exact(log_weights_(p));
  }
  out << '\n';
}

MklModel MklModel::load(std::istream& in) {
  expect_token(in, "gradraker-checkpoint");
  if (read_token(in) != "1") throw std::runtime_error("checkpoint: unsupported version");
  expect_token(in, "config_hash");
  const std::uint64_t stored = std::stoull(read_token(in));
  MklModel m;
  expect_token(in, "eta");
  m.eta_ = parse_exact(read_token(in));
  expect_token(in, "kernels");
  const long p_count = std::stol(read_token(in));
  if (p_count < 1) throw std::runtime_error("checkpoint: no kernels");
  for (long p = 0; p < p_count; ++p) {
    m.maps_.push_back(RfMap::load(in));
    m.learners_.push_back(load_checkpoint(in));
    if (m.learners_.back().map_ref != m.maps_.back().tag()) {
      throw std::runtime_error("checkpoint: learner does not match its map");
    }
  }
  expect_token(in, "log_weights");
  m.log_weights_.resize(p_count);
  for (long p = 0; p < p_count; ++p) m.log_weights_(p) = parse_exact(read_token(in));
  std::uint64_t hash = mix64(std::bit_cast<std::uint64_t>(m.eta_));
  for (const auto& map : m.maps_) hash = mix64(hash ^ map.tag());
  if (hash != stored) throw std::runtime_error("checkpoint: config hash mismatch");
  return m;
}

// -- traces -----------------------------------------------------------------

std::vector<double> MklTrace::combined_losses() const {
  std::vector<double> out;
  out.reserve(steps.size());
  for (const auto& s : steps) out.push_back(s.combined_loss);
  return out;
}

double MklTrace::max_grad_norm() const {
  double g = 0.0;
  for (const auto& s : steps) g = std::max(g, s.max_grad_norm);
  return g;
}

void MklTrace::write_tsv(std::ostream& out) const {
  const Eigen::Index p = steps.empty() ? 0 : steps.front().weights.size();
  out << "t\tcombined_loss";
  for (Eigen::Index i = 0; i < p; ++i) out << "\tloss_" << i;
  for (Eigen::Index i = 0; i < p; ++i) out << "\tweight_" << i;
  out << '\n';
  for (std::size_t t = 0; t < steps.size(); ++t) {
    const auto& s = steps[t];
    out << t + 1 << '\t' << format_exact(s.combined_loss);
    for (Eigen::Index i = 0; i < p; ++i) out << '\t' << format_exact(s.kernel_losses(i));
    for (Eigen::Index i = 0; i < p; ++i) out << '\t' << format_exact(s.weights(i));
    out << '\n';
  }
}

// -- feature providers --------------------------------------------------------

Eigen::VectorXd FeatureProvider::operator()(Index node) const {
  Eigen::VectorXd v = extract(node);
  if (v.size() != dim) {
    throw std::runtime_error("feature provider '" + name + "' returned the wrong dimension");
  }
  return v;
}

FeatureProvider FeatureProvider::connectivity(const Graph& g, PatternMode mode, double scale) {
  auto graph = std::make_shared<const Graph>(g);
  FeatureProvider p;
  p.name = "connectivity";
  p.dim = static_cast<Eigen::Index>(mode == PatternMode::kConcat ? 2 * g.size() : g.size());
  p.extract = [graph, mode, scale](Index node) -> Eigen::VectorXd {
    return scale * connectivity_pattern(*graph, node, mode).vector;
  };
  return p;
}

FeatureProvider FeatureProvider::multi_hop(const Graph& g, unsigned hops, double scale) {
  auto power = std::make_shared<const Eigen::MatrixXd>(power_adjacency(g, hops));
  FeatureProvider p;
  p.name = "hop" + std::to_string(hops);
  p.dim = power->rows();
  p.extract = [power, scale](Index node) -> Eigen::VectorXd {
    if (static_cast<Eigen::Index>(node) >= power->cols()) {
      throw std::out_of_range("multi_hop provider: node out of range");
    }
    return scale * power->col(static_cast<Eigen::Index>(node));
  };
  return p;
}

FeatureProvider FeatureProvider::nodal_features(std::string name, Eigen::MatrixXd features) {
  auto table = std::make_shared<const Eigen::MatrixXd>(std::move(features));
  FeatureProvider p;
  p.name = std::move(name);
  p.dim = table->rows();
  p.extract = [table](Index node) -> Eigen::VectorXd {
    if (static_cast<Eigen::Index>(node) >= table->cols()) {
      throw std::out_of_range("nodal feature provider: node out of range");
    }
    return table->col(static_cast<Eigen::Index>(node));
  };
  return p;
}

// -- training -----------------------------------------------------------------

MklTrainResult mkl_train(MklModel model, std::span<const EncodedSample> samples,
                         std::span<const double> labels) {
  if (samples.size() != labels.size()) {
    throw std::invalid_argument("mkl_train: sample and label counts differ");
  }
  MklTrace trace;
  trace.steps.reserve(samples.size());
  for (std::size_t t = 0; t < samples.size(); ++t) {
    trace.steps.push_back(model.update(samples[t], labels[t]));
  }
  return {std::move(model), std::move(trace)};
}

MklTrainResult mkl_train(MklModel model, std::span<const LabeledNode> samples,
                         const FeatureProvider& provider) {
  if (provider.dim != model.dim()) {
    throw std::invalid_argument("mkl_train: provider dimension does not match the model");
  }
  MklTrace trace;
  trace.steps.reserve(samples.size());
  for (const auto& s : samples) {
    const EncodedSample enc = model.encode(provider(s.node));
    trace.steps.push_back(model.update(enc, s.label));
  }
  return {std::move(model), std::move(trace)};
}

// -- ensemble -------------------------------------------------------------------

EnsembleModel::EnsembleModel(std::vector<FeatureProvider> providers,
                             std::vector<MklModel> models, double eta)
    : providers_(std::move(providers)), models_(std::move(models)), eta_(eta) {
  if (providers_.empty() || providers_.size() != models_.size()) {
    throw std::invalid_argument("ensemble: need one model per provider");
  }
  check_eta(eta_);
  for (std::size_t i = 0; i < providers_.size(); ++i) {
    if (providers_[i].dim != models_[i].dim()) {
      throw std::invalid_argument("ensemble: provider '" + providers_[i].name +
                                  "' dimension does not match its model");
    }
  }
  log_beta_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(models_.size()));
}

Eigen::VectorXd EnsembleModel::beta() const { return softmax(log_beta_); }

EnsembleSample EnsembleModel::encode(Index node) const {
  EnsembleSample s;
  s.per_provider.reserve(providers_.size());
  for (std::size_t i = 0; i < providers_.size(); ++i) {
    s.per_provider.push_back(models_[i].encode(providers_[i](node)));
  }
  return s;
}

double EnsembleModel::predict(const EnsembleSample& sample) const {
  if (sample.per_provider.size() != models_.size()) {
    throw std::invalid_argument("ensemble: sample has the wrong number of providers");
  }
  const Eigen::VectorXd b = beta();
  double acc = 0.0;
  for (std::size_t i = 0; i < models_.size(); ++i) {
    acc += b(static_cast<Eigen::Index>(i)) * models_[i].predict(sample.per_provider[i]);
  }
  return acc;
}

EnsembleStep EnsembleModel::update(const EnsembleSample& sample, double label) {
  EnsembleStep step;
  step.beta = beta();
  step.prediction = predict(sample);
  const auto n = static_cast<Eigen::Index>(models_.size());
  step.learner_losses.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    MklStep inner = models_[static_cast<std::size_t>(i)].update(
        sample.per_provider[static_cast<std::size_t>(i)], label);
    step.learner_losses(i) = inner.combined_loss;
    log_beta_(i) -= eta_ * clipped_loss(inner.combined_loss);
  }
  log_beta_.array() -= log_beta_.maxCoeff();
  return step;
}

EnsembleModel ensemble_combine(std::vector<FeatureProvider> providers,
                               std::vector<MklModel> models, double eta) {
  return EnsembleModel(std::move(providers), std::move(models), eta);
}

// -- regret -----------------------------------------------------------------------

RegretReport static_regret(std::span<const double> online_losses,
                           std::span<const double> oracle_prefix_loss) {
  if (online_losses.size() != oracle_prefix_loss.size()) {
    throw std::invalid_argument("static_regret: trace and oracle lengths differ");
  }
  RegretReport r;
  const std::size_t t_max = online_losses.size();
  r.cumulative_online_loss.resize(t_max);
  r.best_fixed_loss.assign(oracle_prefix_loss.begin(), oracle_prefix_loss.end());
  r.regret.resize(t_max);
  double acc = 0.0;
  for (std::size_t t = 0; t < t_max; ++t) {
    acc += online_losses[t];
    r.cumulative_online_loss[t] = acc;
    r.regret[t] = acc - oracle_prefix_loss[t];
  }
  r.growth_exponent = fit_growth_exponent(r.regret, std::min<std::size_t>(10, t_max));
  return r;
}

std::optional<double> fit_growth_exponent(std::span<const double> regret, std::size_t t_min) {
  const std::size_t t_max = regret.size();
  if (t_min < 1) t_min = 1;
  if (t_max < t_min + 1) return std::nullopt;
  // 50 log-spaced horizons so late steps do not dominate the fit.
  std::vector<std::size_t> ts;
  const double lo = std::log(static_cast<double>(t_min));
  const double hi = std::log(static_cast<double>(t_max));
  for (int i = 0; i < 50; ++i) {
    const auto t = static_cast<std::size_t>(std::lround(std::exp(lo + (hi - lo) * i / 49.0)));
    if (ts.empty() || ts.back() != t) ts.push_back(t);
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (std::size_t t : ts) {
    const double r = regret[t - 1];
    if (!(r > 0.0)) continue;
    const double x = std::log(static_cast<double>(t));
    const double y = std::log(r);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 3) return std::nullopt;
  const double denom = static_cast<double>(n) * sxx - sx * sx;
  if (denom <= 0.0) return std::nullopt;
  return (static_cast<double>(n) * sxy - sx * sy) / denom;
}

PrefixOracle least_squares_prefix_oracle(const Eigen::MatrixXd& z, const Eigen::VectorXd& y,
                                         double mu) {
  if (z.rows() != y.size()) throw std::invalid_argument("prefix oracle: size mismatch");
  if (!(mu >= 0.0)) throw std::invalid_argument("prefix oracle: mu must be >= 0");
  const Eigen::Index t_max = z.rows();
  const Eigen::Index k = z.cols();
  PrefixOracle out;
  out.prefix_loss.resize(static_cast<std::size_t>(t_max));
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(k, k);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(k);
  double yy = 0.0;
  for (Eigen::Index t = 0; t < t_max; ++t) {
    gram.selfadjointView<Eigen::Lower>().rankUpdate(z.row(t).transpose());
    b += y(t) * z.row(t).transpose();
    yy += y(t) * y(t);
    Eigen::MatrixXd system = gram.selfadjointView<Eigen::Lower>();
    system.diagonal().array() += mu * static_cast<double>(t + 1);
    Eigen::VectorXd theta;
    if (mu > 0.0) {
      theta = system.llt().solve(b);
    } else {
      theta = system.completeOrthogonalDecomposition().solve(b);
    }
    // At the minimizer the objective collapses to y'y - b'theta.
    out.prefix_loss[static_cast<std::size_t>(t)] = std::max(0.0, yy - b.dot(theta));
  }
  out.theta_star = batch_rf_ls(z, y, mu);
  return out;
}

double lemma_regret_bound(std::size_t kernels, double eta, double theta_star_norm2,
                          double lipschitz, std::size_t horizon) {
  const double t = static_cast<double>(horizon);
  return std::log(static_cast<double>(kernels)) / eta + theta_star_norm2 / (2.0 * eta) +
         eta * lipschitz * lipschitz * t / 2.0 + eta * t;
}

}  // namespace gradraker
