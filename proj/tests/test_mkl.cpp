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

#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <type_traits>

#include "doctest.h"
#include "gradraker/baselines.hpp"
#include "gradraker/io_util.hpp"
#include "gradraker/mkl.hpp"
#include "gradraker/random.hpp"
#include "test_util.hpp"

using namespace gradraker;

// The multi-kernel update and prediction paths take encodings only.
static_assert(!std::is_invocable_v<decltype(&MklModel::update), MklModel&, Eigen::VectorXd, double>);
static_assert(std::is_invocable_v<decltype(&MklModel::update), MklModel&, EncodedSample, double>);
static_assert(!std::is_constructible_v<EncodedSample, Eigen::VectorXd>);

namespace {

// Rewrites the theta lines and log weights of a saved model. The config hash
// covers maps and eta only, so the edited bundle still loads.
MklModel with_state(const MklModel& model, const std::vector<Eigen::VectorXd>& thetas,
                    const Eigen::VectorXd& log_weights) {
  std::stringstream saved;
  model.save(saved);
  std::ostringstream edited;
  std::string line;
  std::size_t next = 0;
  while (std::getline(saved, line)) {
    if (line.rfind("theta ", 0) == 0) {
      const Eigen::VectorXd& t = thetas.at(next++);
      edited << "theta " << t.size();
      for (double x : t) edited << ' ' << format_exact(x);
      edited << '\n';
    } else if (line.rfind("log_weights", 0) == 0) {
      edited << "log_weights";
      for (double x : log_weights) edited << ' ' << format_exact(x);
      edited << '\n';
    } else {
      edited << line << '\n';
    }
  }
  std::istringstream in(edited.str());
  return MklModel::load(in);
}

std::vector<KernelSpec> two_kernels() { return {KernelSpec::gaussian(1.0), KernelSpec::gaussian(5.0)}; }

}  // namespace

TEST_CASE("mkl_init: weights, thetas, errors") {
  const auto k = two_kernels();
  const MklModel m = MklModel::init(k, 8, 5, 0.5, LossKind{}, 3);
  CHECK(m.kernel_count() == 2);
  CHECK(m.normalized_weights().isApprox(Eigen::Vector2d(0.5, 0.5), 1e-15));
  for (const auto& l : m.learners()) CHECK(l.theta.isZero());
  CHECK(m.maps()[0].tag() != m.maps()[1].tag());
  CHECK(m.maps()[0].seed() == derive_seed(3, 0));
  CHECK_THROWS(MklModel::init(std::vector<KernelSpec>{}, 8, 5, 0.5, LossKind{}, 3));
  CHECK_THROWS(MklModel::init(k, 8, 5, 0.0, LossKind{}, 3));
  CHECK_THROWS(MklModel::init(k, 8, 5, 1.5, LossKind{}, 3));
}

TEST_CASE("mkl_predict: zero thetas and a hand-built convex combination") {
  const MklModel fresh = MklModel::init(two_kernels(), 1, 1, 0.5, LossKind{}, 1);
  CHECK(fresh.predict(Eigen::VectorXd::Ones(1)) == 0.0);
  // The zero pattern encodes to (0, 1) under every one-feature map.
  const MklModel m = with_state(fresh, {Eigen::Vector2d(0, 1), Eigen::Vector2d(0, 3)},
                                Eigen::Vector2d(std::log(0.25), std::log(0.75)));
  const EncodedSample s = m.encode(Eigen::VectorXd::Zero(1));
  CHECK(m.kernel_predictions(s).isApprox(Eigen::Vector2d(1, 3), 1e-15));
  CHECK(m.predict(s) == doctest::Approx(2.5).epsilon(1e-14));
}

TEST_CASE("mkl_update: hand-evaluated weight step") {
  const MklModel fresh = MklModel::init(two_kernels(), 1, 1, 0.5, LossKind{}, 1);
  // Kernel 0 predicts 2 (loss 4, clipped to 1), kernel 1 predicts 0 (loss 0).
  MklModel m = with_state(fresh, {Eigen::Vector2d(0, 2), Eigen::Vector2d(0, 0)},
                          Eigen::Vector2d::Zero());
  const MklStep step = m.update(m.encode(Eigen::VectorXd::Zero(1)), 0.0);
  CHECK(step.weights.isApprox(Eigen::Vector2d(0.5, 0.5), 1e-15));
  CHECK(step.kernel_losses.isApprox(Eigen::Vector2d(4, 0), 1e-15));
  CHECK(step.prediction == doctest::Approx(1.0));
  const double w0 = std::exp(-0.5) / (1 + std::exp(-0.5));
  CHECK(m.normalized_weights()(0) == doctest::Approx(w0).epsilon(1e-14));
  CHECK(w0 == doctest::Approx(0.377541).epsilon(1e-6));
  // The learners stepped on their own unclipped losses: theta_0 = 2 - 0.5 * 2 * 2 = 0.
  CHECK(m.learners()[0].theta.isZero(1e-15));
}

TEST_CASE("mkl_update: equal losses leave the weights alone") {
  const std::vector<KernelSpec> k = {KernelSpec::gaussian(1.0), KernelSpec::gaussian(1.0),
                                     KernelSpec::gaussian(1.0)};
  MklModel m = MklModel::init(k, 4, 3, 0.7, LossKind{}, 2);
  // All thetas are zero, so every kernel loses y^2 on the first step.
  m.update(m.encode(Eigen::Vector3d(1, 0, 1)), 0.9);
  CHECK(m.normalized_weights().isApprox(Eigen::Vector3d::Constant(1.0 / 3), 1e-15));
}

TEST_CASE("mkl_update: a uniformly better kernel gains weight monotonically") {
  const MklModel fresh = MklModel::init(two_kernels(), 1, 1, 0.3, LossKind{}, 4);
  // Kernel 0 is exact on label 0 and stays there; kernel 1 starts at 1.
  MklModel m = with_state(fresh, {Eigen::Vector2d::Zero(), Eigen::Vector2d(0, 1)},
                          Eigen::Vector2d::Zero());
  const EncodedSample s = m.encode(Eigen::VectorXd::Zero(1));
  double previous = m.normalized_weights()(0);
  for (int t = 0; t < 50; ++t) {
    // Kernel 1 decays toward the label, so late steps may round to no change.
    const double loss1 = m.kernel_predictions(s)(1) * m.kernel_predictions(s)(1);
    m.update(s, 0.0);
    const double w = m.normalized_weights()(0);
    CHECK(w >= previous);
    if (loss1 > 1e-10) CHECK(w > previous);
    previous = w;
  }
  CHECK(previous > 0.5);
}

TEST_CASE("mkl: simplex invariant and rescaling invariance") {
  std::mt19937_64 rng(6);
  const std::vector<KernelSpec> k = {KernelSpec::gaussian(0.5), KernelSpec::laplacian(2.0),
                                     KernelSpec::cauchy(1.0)};
  MklModel a = MklModel::init(k, 16, 6, 0.9, LossKind{LossType::kLeastSquares, 1e-3}, 9);
  MklModel b = a;
  b.rescale_weights(1e-200);
  for (int t = 0; t < 300; ++t) {
    const Eigen::VectorXd pat = testutil::random_binary(6, rng);
    const double y = 3.0 * testutil::random_vector(1, rng)(0);
    const EncodedSample sa = a.encode(pat);
    const EncodedSample sb = b.encode(pat);
    CHECK(a.predict(sa) == b.predict(sb));
    a.update(sa, y);
    b.update(sb, y);
    const Eigen::VectorXd w = a.normalized_weights();
    CHECK(std::abs(w.sum() - 1.0) <= 1e-12);
    CHECK(w.minCoeff() > 0.0);
    CHECK(w == b.normalized_weights());
    CHECK(a.weights().maxCoeff() == 1.0);
  }
  CHECK_THROWS(a.rescale_weights(0.0));
}

TEST_CASE("mkl: predictions stay between the per-kernel extremes") {
  std::mt19937_64 rng(8);
  MklModel m = MklModel::init(two_kernels(), 10, 5, 0.5, LossKind{}, 1);
  for (int t = 0; t < 100; ++t) {
    const EncodedSample s = m.encode(testutil::random_binary(5, rng));
    const Eigen::VectorXd f = m.kernel_predictions(s);
    const double p = m.predict(s);
    CHECK(p >= f.minCoeff() - 1e-12);
    CHECK(p <= f.maxCoeff() + 1e-12);
    m.update(s, testutil::random_vector(1, rng)(0));
  }
}

TEST_CASE("mkl with one kernel reduces to the single-kernel learner bit for bit") {
  std::mt19937_64 rng(12);
  const Graph g = erdos_renyi(30, 0.2, 5);
  std::vector<LabeledNode> nodes;
  for (int t = 0; t < 60; ++t) {
    nodes.push_back({static_cast<Index>(t % 30), testutil::random_vector(1, rng)(0)});
  }
  const LossKind loss{LossType::kLeastSquares, 1e-3};
  const std::vector<KernelSpec> k = {KernelSpec::gaussian(5.0)};
  const MklTrainResult mkl =
      mkl_train(MklModel::init(k, 20, 30, 0.4, loss, 77), nodes, FeatureProvider::connectivity(g));

  const RfMap map(k[0], 20, 30, derive_seed(77, 0));
  std::vector<LabeledPattern> stream;
  for (const auto& n : nodes) stream.push_back({connectivity_pattern(g, n.node).vector, n.label});
  const StreamResult single = train_stream(SingleKernelState::init(map, 0.4, loss), map, stream);

  CHECK(mkl.trace.combined_losses() == single.losses);
  CHECK(mkl.model.learners()[0].theta == single.state.theta);
  for (const auto& s : mkl.trace.steps) CHECK(s.weights(0) == 1.0);
}

TEST_CASE("mkl_train: deterministic traces recorded before each update") {
  std::mt19937_64 rng(3);
  const Graph g = erdos_renyi(25, 0.3, 1);
  std::vector<LabeledNode> nodes;
  for (int t = 0; t < 40; ++t) nodes.push_back({static_cast<Index>(t % 25), 1.0 + 0.1 * t});
  const auto provider = FeatureProvider::connectivity(g);
  const MklModel init = MklModel::init(two_kernels(), 12, 25, 0.5, LossKind{}, 5);
  const MklTrainResult a = mkl_train(init, nodes, provider);
  const MklTrainResult b = mkl_train(init, nodes, provider);
  std::ostringstream ta, tb;
  a.trace.write_tsv(ta);
  b.trace.write_tsv(tb);
  CHECK(ta.str() == tb.str());
  CHECK(ta.str().rfind("t\tcombined_loss\tloss_0\tloss_1\tweight_0\tweight_1\n", 0) == 0);
  // First step: all thetas are zero, so the loss is the squared label.
  CHECK(a.trace.steps[0].combined_loss == 1.0);
  CHECK(a.trace.steps[0].weights.isApprox(Eigen::Vector2d(0.5, 0.5)));

  MklModel replay = init;
  for (std::size_t t = 0; t < nodes.size(); ++t) {
    const EncodedSample s = replay.encode(provider(nodes[t].node));
    CHECK(replay.predict(s) == a.trace.steps[t].prediction);
    replay.update(s, nodes[t].label);
  }
  CHECK_THROWS(mkl_train(init, nodes, FeatureProvider::connectivity(erdos_renyi(5, 0.3, 1))));
}

TEST_CASE("mkl checkpoint round trip") {
  std::mt19937_64 rng(4);
  MklModel m = MklModel::init(two_kernels(), 6, 4, 0.5, LossKind{LossType::kLeastSquares, 0.01}, 2);
  for (int t = 0; t < 20; ++t) {
    m.update(m.encode(testutil::random_binary(4, rng)), testutil::random_vector(1, rng)(0));
  }
  std::stringstream buf;
  m.save(buf);
  const MklModel back = MklModel::load(buf);
  for (int t = 0; t < 10; ++t) {
    const Eigen::VectorXd a = testutil::random_binary(4, rng);
    CHECK(back.predict(a) == m.predict(a));
  }
  CHECK(back.normalized_weights() == m.normalized_weights());

  std::stringstream tampered;
  m.save(tampered);
  std::string text = tampered.str();
  text.replace(text.find("eta "), 4, "eta 0.25 #");
  std::istringstream bad(text);
  CHECK_THROWS(MklModel::load(bad));
}

TEST_CASE("feature providers") {
  const Graph g = testutil::from_edges("0 1\n1 2\n");
  const auto hop = FeatureProvider::multi_hop(g, 2);
  CHECK(hop(0) == power_adjacency(g, 2).col(0));
  CHECK(hop.dim == Eigen::Index{3});
  Eigen::MatrixXd f(2, 3);
  f << 1, 2, 3, 4, 5, 6;
  const auto nodal = FeatureProvider::nodal_features("attrs", f);
  CHECK(nodal(2) == Eigen::Vector2d(3, 6));
  CHECK_THROWS(nodal(3));
  const auto conn = FeatureProvider::connectivity(g, PatternMode::kColumn, 0.5);
  CHECK(conn(1) == Eigen::Vector3d(0.5, 0, 0.5));
}

TEST_CASE("ensemble: single provider matches its model, beta on the simplex") {
  std::mt19937_64 rng(10);
  const Graph g = erdos_renyi(20, 0.3, 3);
  const auto provider = FeatureProvider::connectivity(g);
  MklModel alone = MklModel::init(two_kernels(), 10, 20, 0.5, LossKind{}, 8);
  EnsembleModel ens = ensemble_combine({provider}, {alone}, 0.5);
  for (int t = 0; t < 30; ++t) {
    const Index node = static_cast<Index>(t % 20);
    const double y = testutil::random_vector(1, rng)(0);
    const EnsembleSample s = ens.encode(node);
    const EncodedSample e = alone.encode(provider(node));
    CHECK(ens.predict(s) == alone.predict(e));
    ens.update(s, y);
    alone.update(e, y);
    CHECK(ens.beta()(0) == 1.0);
  }
  CHECK_THROWS(ensemble_combine({provider}, {}, 0.5));
  CHECK_THROWS(ensemble_combine({FeatureProvider::multi_hop(erdos_renyi(5, 0.3, 1), 2)},
                                {MklModel::init(two_kernels(), 4, 20, 0.5, LossKind{}, 1)}, 0.5));
}

TEST_CASE("ensemble: the informative provider outweighs a pure-noise provider") {
  const Index n = 200;
  const Graph g = erdos_renyi(n, 0.02, 21);
  const auto conn = FeatureProvider::connectivity(g);
  const GraphSignal x = synth_signal(kernel_matrix(KernelSpec::gaussian(5.0), g.adjacency()), 0.01, 22);
  const double scale = x.values.cwiseAbs().maxCoeff();
  std::mt19937_64 rng(23);
  Eigen::MatrixXd noise(20, n);
  for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(n); ++j) noise.col(j) = testutil::random_vector(20, rng);
  const auto junk = FeatureProvider::nodal_features("noise", noise);
  const std::vector<KernelSpec> k = {KernelSpec::gaussian(5.0)};
  EnsembleModel ens = ensemble_combine(
      {conn, junk},
      {MklModel::init(k, 100, n, 0.5, LossKind{}, 1), MklModel::init(k, 100, 20, 0.5, LossKind{}, 2)},
      0.5);
  std::uniform_int_distribution<Index> pick(0, n - 1);
  for (int t = 0; t < 1000; ++t) {
    const Index v = pick(rng);
    const EnsembleStep step = ens.update(ens.encode(v), x.values(v) / scale);
    CHECK(std::abs(step.beta.sum() - 1.0) <= 1e-12);
  }
  CHECK(ens.beta()(0) > 0.5);
}

TEST_CASE("static regret: identical oracle, mismatch, prefix oracle") {
  const std::vector<double> losses = {0.5, 0.2, 0.1, 0.4};
  std::vector<double> cum;
  double acc = 0;
  for (double l : losses) cum.push_back(acc += l);
  const RegretReport zero = static_regret(losses, cum);
  for (double r : zero.regret) CHECK(r == 0.0);
  CHECK_FALSE(zero.growth_exponent.has_value());
  CHECK_THROWS(static_regret(losses, std::vector<double>{1.0}));
}

TEST_CASE("growth exponent recovers a power law") {
  std::vector<double> r;
  for (int t = 1; t <= 2000; ++t) r.push_back(3.0 * std::pow(t, 0.5));
  const auto e = fit_growth_exponent(r, 10);
  REQUIRE(e.has_value());
  CHECK(*e == doctest::Approx(0.5).epsilon(1e-9));
  CHECK_FALSE(fit_growth_exponent(std::vector<double>(100, 0.0), 10).has_value());
}

TEST_CASE("prefix oracle matches brute-force batch solves and is optimal") {
  std::mt19937_64 rng(14);
  const Eigen::Index t_max = 40, k = 6;
  Eigen::MatrixXd z(t_max, k);
  for (Eigen::Index i = 0; i < t_max; ++i) z.row(i) = testutil::random_vector(k, rng).transpose();
  const Eigen::VectorXd y = testutil::random_vector(t_max, rng);
  const double mu = 0.05;
  const PrefixOracle o = least_squares_prefix_oracle(z, y, mu);
  for (Eigen::Index t = 1; t <= t_max; ++t) {
    const Eigen::MatrixXd zt = z.topRows(t);
    const Eigen::VectorXd yt = y.head(t);
    const Eigen::VectorXd th = batch_rf_ls(zt, yt, mu);
    const double best = rf_ls_objective(zt, yt, mu, th);
    CHECK(o.prefix_loss[t - 1] == doctest::Approx(best).epsilon(1e-9));
    for (int trial = 0; trial < 5; ++trial) {
      const Eigen::VectorXd other = th + 0.1 * testutil::random_vector(k, rng);
      CHECK(o.prefix_loss[t - 1] <= rf_ls_objective(zt, yt, mu, other) + 1e-12);
    }
  }
  CHECK(o.theta_star.isApprox(batch_rf_ls(z, y, mu)));
}

TEST_CASE("lemma bound formula") {
  const double b = lemma_regret_bound(2, 0.1, 4.0, 3.0, 100);
  CHECK(b == doctest::Approx(std::log(2.0) / 0.1 + 4.0 / 0.2 + 0.1 * 9 * 100 / 2 + 0.1 * 100));
}

TEST_CASE("zero labels from a zero start give zero regret") {
  MklModel m = MklModel::init(two_kernels(), 5, 4, 0.5, LossKind{}, 1);
  std::mt19937_64 rng(2);
  std::vector<EncodedSample> samples;
  std::vector<RfFeatures> rows;
  for (int t = 0; t < 50; ++t) {
    samples.push_back(m.encode(testutil::random_binary(4, rng)));
    rows.push_back(samples.back().per_kernel[0]);
  }
  const std::vector<double> labels(50, 0.0);
  const MklTrainResult r = mkl_train(m, samples, labels);
  const PrefixOracle o = least_squares_prefix_oracle(stack_features(rows), Eigen::VectorXd::Zero(50), 0.0);
  const RegretReport rep = static_regret(r.trace.combined_losses(), o.prefix_loss);
  for (double x : rep.regret) CHECK(x == 0.0);
}
