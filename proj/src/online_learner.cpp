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

#include "gradraker/online_learner.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "gradraker/io_util.hpp"

namespace gradraker {

namespace {

void require_binary_label(double label) {
  if (label != 1.0 && label != -1.0) {
    throw std::invalid_argument("classification losses need labels in {-1, +1}");
  }
}

// log(1 + exp(x)) without overflow.
double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

// 1 / (1 + exp(x)) without overflow.
double logistic_tail(double x) {
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(x));
}

}  // namespace

LossType LossKind::parse_type(const std::string& name) {
  if (name == "least_squares" || name == "ls") return LossType::kLeastSquares;
  if (name == "hinge") return LossType::kHinge;
  if (name == "logistic") return LossType::kLogistic;
  throw std::invalid_argument("unknown loss '" + name + "'");
}

std::string LossKind::name() const {
  switch (type) {
    case LossType::kLeastSquares: return "least_squares";
    case LossType::kHinge: return "hinge";
    case LossType::kLogistic: return "logistic";
  }
  return "unknown";
}

double loss_value(const LossKind& loss, double prediction, double label,
                  double theta_norm2) {
  const double reg = loss.mu * theta_norm2;
  switch (loss.type) {
    case LossType::kLeastSquares: {
      const double r = prediction - label;
      return r * r + reg;
    }
    case LossType::kHinge:
      require_binary_label(label);
      return std::max(0.0, 1.0 - label * prediction) + reg;
    case LossType::kLogistic:
      require_binary_label(label);
      return softplus(-label * prediction) + reg;
  }
  throw std::invalid_argument("loss_value: unknown loss");
}

Eigen::VectorXd loss_grad(const LossKind& loss, const Eigen::Ref<const Eigen::VectorXd>& z,
                          const Eigen::Ref<const Eigen::VectorXd>& theta, double label) {
  if (z.size() != theta.size()) {
    throw std::invalid_argument("loss_grad: z and theta lengths differ");
  }
  const double f = theta.dot(z);
  double coef = 0.0;
  switch (loss.type) {
    case LossType::kLeastSquares:
      coef = 2.0 * (f - label);
      break;
    case LossType::kHinge:
      require_binary_label(label);
      coef = label * f < 1.0 ? -label : 0.0;
      break;
    case LossType::kLogistic:
      require_binary_label(label);
      coef = -label * logistic_tail(label * f);
      break;
  }
  return coef * z + 2.0 * loss.mu * theta;
}

SingleKernelState SingleKernelState::init(const RfMap& map, double eta, LossKind loss) {
  if (!(eta >= 0.0) || !std::isfinite(eta)) {
    throw std::invalid_argument("learner step size must be finite and >= 0");
  }
  if (!(loss.mu >= 0.0)) throw std::invalid_argument("mu must be >= 0");
  SingleKernelState s;
  s.theta = Eigen::VectorXd::Zero(map.feature_size());
  s.eta = eta;
  s.loss = loss;
  s.map_ref = map.tag();
  return s;
}

double SingleKernelState::predict(const RfFeatures& z) const {
  if (z.map_tag() != map_ref) {
    throw std::invalid_argument("encoding produced by a different RF map");
  }
  if (z.size() != theta.size()) throw std::invalid_argument("feature size mismatch");
  return theta.dot(z.values());
}

double apply_ogd_step(SingleKernelState& state, const RfFeatures& z, double label) {
  if (z.map_tag() != state.map_ref) {
    throw std::invalid_argument("ogd_step: encoding produced by a different RF map");
  }
  if (z.size() != state.theta.size()) {
    throw std::invalid_argument("ogd_step: feature size mismatch");
  }
  Eigen::VectorXd g = loss_grad(state.loss, z.values(), state.theta, label);
  if (!g.allFinite()) throw std::runtime_error("ogd_step: non-finite gradient");
  state.theta.noalias() -= state.eta * g;
  return g.norm();
}

SingleKernelState ogd_step(SingleKernelState state, const RfFeatures& z, double label) {
  apply_ogd_step(state, z, label);
  return state;
}

StreamResult train_stream(SingleKernelState state, std::span<const EncodedExample> samples) {
  StreamResult out;
  out.losses.reserve(samples.size());
  for (const auto& s : samples) {
    const double f = state.predict(s.z);
    out.losses.push_back(loss_value(state.loss, f, s.label, state.theta.squaredNorm()));
    state = ogd_step(std::move(state), s.z, s.label);
  }
  out.state = std::move(state);
  return out;
}

StreamResult train_stream(SingleKernelState state, const RfMap& map,
                          std::span<const LabeledPattern> samples) {
  std::vector<EncodedExample> encoded;
  encoded.reserve(samples.size());
  for (const auto& s : samples) encoded.push_back({map.encode(s.pattern), s.label});
  return train_stream(std::move(state), encoded);
}

double predict(const SingleKernelState& state, const RfMap& map,
               const Eigen::Ref<const Eigen::VectorXd>& pattern) {
  return state.predict(map.encode(pattern));
}

AbsorbResult absorb_new_node(SingleKernelState state, const RfMap& map,
                             const Eigen::Ref<const Eigen::VectorXd>& pattern,
                             std::optional<double> label) {
  RfFeatures z = map.encode(pattern);
  AbsorbResult r;
  r.prediction = state.predict(z);
  r.state = label ? ogd_step(std::move(state), z, *label) : std::move(state);
  return r;
}

void save_checkpoint(std::ostream& out, const SingleKernelState& state) {
  out << "okl-checkpoint 1\n"
      << "map_ref " << state.map_ref << '\n'
      << "loss " << state.loss.name() << '\n'
      << "mu " << format_exact(state.loss.mu) << '\n'
      << "eta " << format_exact(state.eta) << '\n'
      << "theta " << state.theta.size();
  for (Eigen::Index i = 0; i < state.theta.size(); ++i) {
    out << ' ' << format_exact(state.theta(i));
  }
  out << '\n';
}

SingleKernelState load_checkpoint(std::istream& in) {
  expect_token(in, "okl-checkpoint");
  if (read_token(in) != "1") throw std::runtime_error("checkpoint: unsupported version");
  SingleKernelState s;
  expect_token(in, "map_ref");
  s.map_ref = std::stoull(read_token(in));
  expect_token(in, "loss");
  s.loss.type = LossKind::parse_type(read_token(in));
  expect_token(in, "mu");
  s.loss.mu = parse_exact(read_token(in));
  expect_token(in, "eta");
  s.eta = parse_exact(read_token(in));
  expect_token(in, "theta");
  const long n = std::stol(read_token(in));
  if (n < 0) throw std::runtime_error("checkpoint: negative theta size");
  s.theta.resize(n);
  for (long i = 0; i < n; ++i) s.theta(i) = parse_exact(read_token(in));
  return s;
}

}  // namespace gradraker
