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
#include <span>
#include <string>

#include <Eigen/Dense>

#include "gradraker/kernels.hpp"

namespace gradraker {

class RfMap;

/// Random-feature encoding z(a) of one connectivity pattern.
///
/// Only RfMap::encode can produce one, so anything accepting RfFeatures
/// never sees the raw pattern. Carries the tag of the map that produced it.
class RfFeatures {
 public:
  const Eigen::VectorXd& values() const { return z_; }
  Eigen::Index size() const { return z_.size(); }
  std::uint64_t map_tag() const { return map_tag_; }

 private:
  friend class RfMap;
  RfFeatures(Eigen::VectorXd z, std::uint64_t tag) : z_(std::move(z)), map_tag_(tag) {}

  Eigen::VectorXd z_;
  std::uint64_t map_tag_ = 0;
};

/// Frozen spectral sample V (d x dim) for one kernel.
///
///   z(a) = d^{-1/2} [sin(v_1.a) .. sin(v_d.a), cos(v_1.a) .. cos(v_d.a)]
///
/// Sines come first. |z(a)| = 1 for every a. Immutable; encode is safe to
/// call from many threads.
class RfMap {
 public:
  static constexpr int kLayoutVersion = 1;

  RfMap(const KernelSpec& kernel, Eigen::Index d, Eigen::Index dim, std::uint64_t seed);
  /// Wraps an explicit V, e.g. a degenerate or deserialized one.
  static RfMap from_matrix(const KernelSpec& kernel, Eigen::MatrixXd v, std::uint64_t seed);

  RfFeatures encode(const Eigen::Ref<const Eigen::VectorXd>& pattern) const;

  Eigen::Index d() const { return v_.rows(); }
  Eigen::Index dim() const { return v_.cols(); }
  Eigen::Index feature_size() const { return 2 * v_.rows(); }
  const KernelSpec& kernel() const { return kernel_; }
  std::uint64_t seed() const { return seed_; }
  const Eigen::MatrixXd& v() const { return v_; }
  /// Identifies (kernel, d, dim, seed, V); learners record it as map_ref.
  std::uint64_t tag() const { return tag_; }

  /// Text record: header lines then d rows of dim shortest-round-trip
  /// doubles. load(save(m)) reproduces V bit for bit.
  void save(std::ostream& out) const;
  static RfMap load(std::istream& in);

 private:
  RfMap(const KernelSpec& kernel, Eigen::MatrixXd v, std::uint64_t seed);

  KernelSpec kernel_;
  Eigen::MatrixXd v_;
  std::uint64_t seed_ = 0;
  std::uint64_t tag_ = 0;
};

/// Stacks encodings as rows of an M x 2d matrix.
Eigen::MatrixXd stack_features(std::span<const RfFeatures> rows);

/// z(a).z(b), an unbiased estimate of eval_kernel(map.kernel(), a, b).
double approx_kernel(const RfMap& map, const Eigen::Ref<const Eigen::VectorXd>& a,
                     const Eigen::Ref<const Eigen::VectorXd>& b);

/// Returns a' != a with V a' = V a, hence encode(a') == encode(a) up to
/// rounding in the matrix product. Throws std::invalid_argument when V has
/// a trivial null space.
Eigen::VectorXd null_space_collision(const RfMap& map,
                                     const Eigen::Ref<const Eigen::VectorXd>& a);

}  // namespace gradraker
