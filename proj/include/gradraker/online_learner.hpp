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
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gradraker/random_features.hpp"

namespace gradraker {

enum class LossType { kLeastSquares, kHinge, kLogistic };

/// Per-sample loss C(f, y) + mu |theta|^2.
///
/// Hinge and logistic expect labels in {-1, +1}. Logistic uses
/// Pr(y = 1) = 1 / (1 + exp(-f)).
struct LossKind {
  LossType type = LossType::kLeastSquares;
  double mu = 0.0;

  static LossType parse_type(const std::string& name);
  std::string name() const;
};

double loss_value(const LossKind& loss, double prediction, double label,
                  double theta_norm2);

/// Gradient of loss_value(theta.z, label, |theta|^2) with respect to theta.
/// The hinge branch is the subgradient -y z on y theta.z < 1 and zero
/// otherwise (including the tie at exactly 1).
Eigen::VectorXd loss_grad(const LossKind& loss, const Eigen::Ref<const Eigen::VectorXd>& z,
                          const Eigen::Ref<const Eigen::VectorXd>& theta, double label);

/// Loss value as seen by the multiplicative weight update: clamped to [0, 1].
inline double clipped_loss(double value) {
  return value < 0.0 ? 0.0 : (value > 1.0 ? 1.0 : value);
}

/// One kernel's RF-space learner: f(a) = theta . z(a).
struct SingleKernelState {
  Eigen::VectorXd theta;
  double eta = 0.1;
  LossKind loss;
  /// RfMap::tag() of the map whose encodings this state consumes.
  std::uint64_t map_ref = 0;

  /// theta = 0 sized for `map`.
  static SingleKernelState init(const RfMap& map, double eta, LossKind loss);

  double predict(const RfFeatures& z) const;
};

/// theta <- theta - eta * grad L(theta.z, label). Throws on a foreign
/// encoding, a size mismatch, or a non-finite gradient.
SingleKernelState ogd_step(SingleKernelState state, const RfFeatures& z, double label);

/// In-place form of ogd_step; returns the gradient norm.
double apply_ogd_step(SingleKernelState& state, const RfFeatures& z, double label);

struct EncodedExample {
  RfFeatures z;
  double label = 0.0;
};

struct LabeledPattern {
  Eigen::VectorXd pattern;
  double label = 0.0;
};

struct StreamResult {
  SingleKernelState state;
  /// Loss at the pre-update iterate for each step.
  std::vector<double> losses;
};

StreamResult train_stream(SingleKernelState state, std::span<const EncodedExample> samples);

/// Encodes each pattern with `map` at the node boundary, then trains on the
/// encodings only.
StreamResult train_stream(SingleKernelState state, const RfMap& map,
                          std::span<const LabeledPattern> samples);

double predict(const SingleKernelState& state, const RfMap& map,
               const Eigen::Ref<const Eigen::VectorXd>& pattern);

struct AbsorbResult {
  double prediction = 0.0;
  SingleKernelState state;
};

/// Predicts a node that was absent during training; when its label is known
/// the state also takes one OGD step on it.
AbsorbResult absorb_new_node(SingleKernelState state, const RfMap& map,
                             const Eigen::Ref<const Eigen::VectorXd>& pattern,
                             std::optional<double> label);

/// Text checkpoint: "okl-checkpoint 1", map_ref, loss, mu, eta, theta size
/// and values, all doubles in shortest round-trip form.
void save_checkpoint(std::ostream& out, const SingleKernelState& state);
SingleKernelState load_checkpoint(std::istream& in);

}  // namespace gradraker
