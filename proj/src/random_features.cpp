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

#include "gradraker/random_features.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

#include "gradraker/io_util.hpp"
#include "gradraker/random.hpp"

namespace gradraker {

namespace {

std::uint64_t hash_map(const KernelSpec& kernel, const Eigen::MatrixXd& v,
                       std::uint64_t seed) {
  std::uint64_t h = mix64(seed);
  h = mix64(h ^ static_cast<std::uint64_t>(kernel.family));
  h = mix64(h ^ std::bit_cast<std::uint64_t>(kernel.bandwidth));
  h = mix64(h ^ static_cast<std::uint64_t>(v.rows()));
  h = mix64(h ^ static_cast<std::uint64_t>(v.cols()));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    h = mix64(h ^ std::bit_cast<std::uint64_t>(v.data()[i]));
  }
  return h;
}

}  // namespace

RfMap::RfMap(const KernelSpec& kernel, Eigen::MatrixXd v, std::uint64_t seed)
    : kernel_(kernel), v_(std::move(v)), seed_(seed), tag_(hash_map(kernel_, v_, seed_)) {}

RfMap::RfMap(const KernelSpec& kernel, Eigen::Index d, Eigen::Index dim,
             std::uint64_t seed)
    : RfMap(kernel, spectral_sample(kernel, d, dim, seed), seed) {}

RfMap RfMap::from_matrix(const KernelSpec& kernel, Eigen::MatrixXd v,
                         std::uint64_t seed) {
  if (v.rows() < 1 || v.cols() < 1) {
    throw std::invalid_argument("RfMap: V must be non-empty");
  }
  return RfMap(kernel, std::move(v), seed);
}

RfFeatures RfMap::encode(const Eigen::Ref<const Eigen::VectorXd>& pattern) const {
  if (pattern.size() != dim()) {
    throw std::invalid_argument("encode: pattern length " + std::to_string(pattern.size()) +
                                " does not match map dimension " + std::to_string(dim()));
  }
  const Eigen::Index d = v_.rows();
  const Eigen::VectorXd phase = v_ * pattern;
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  Eigen::VectorXd z(2 * d);
  for (Eigen::Index i = 0; i < d; ++i) {
    z(i) = scale * std::sin(phase(i));
    z(d + i) = scale * std::cos(phase(i));
  }
  return RfFeatures(std::move(z), tag_);
}

void RfMap::save(std::ostream& out) const {
  out << "rfmap " << kLayoutVersion << '\n'
      << "layout sin-cos\n"
      << "family " << to_string(kernel_.family) << '\n'
      << "bandwidth " << format_exact(kernel_.bandwidth) << '\n'
      << "d " << v_.rows() << "\nn " << v_.cols() << "\nseed " << seed_ << '\n';
  for (Eigen::Index i = 0; i < v_.rows(); ++i) {
    for (Eigen::Index j = 0; j < v_.cols(); ++j) {
      if (j) out << ' ';
      out << format_exact(v_(i, j));
    }
    out << '\n';
  }
}

RfMap RfMap::load(std::istream& in) {
  expect_token(in, "rfmap");
  if (read_token(in) != std::to_string(kLayoutVersion)) {
    throw std::runtime_error("rfmap: unsupported layout version");
  }
  expect_token(in, "layout");
  if (read_token(in) != "sin-cos") throw std::runtime_error("rfmap: unsupported feature layout");
  KernelSpec kernel;
  expect_token(in, "family");
  kernel.family = kernel_family_from_string(read_token(in));
  expect_token(in, "bandwidth");
  kernel.bandwidth = parse_exact(read_token(in));
  expect_token(in, "d");
  const long d = std::stol(read_token(in));
  expect_token(in, "n");
  const long n = std::stol(read_token(in));
  expect_token(in, "seed");
  const std::uint64_t seed = std::stoull(read_token(in));
  if (d < 1 || n < 1) throw std::runtime_error("rfmap: bad dimensions");
  Eigen::MatrixXd v(d, n);
  for (long i = 0; i < d; ++i) {
    for (long j = 0; j < n; ++j) v(i, j) = parse_exact(read_token(in));
  }
  return RfMap(kernel, std::move(v), seed);
}

Eigen::MatrixXd stack_features(std::span<const RfFeatures> rows) {
  if (rows.empty()) return {};
  Eigen::MatrixXd z(static_cast<Eigen::Index>(rows.size()), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != z.cols()) {
      throw std::invalid_argument("stack_features: mixed feature sizes");
    }
    z.row(static_cast<Eigen::Index>(i)) = rows[i].values().transpose();
  }
  return z;
}

double approx_kernel(const RfMap& map, const Eigen::Ref<const Eigen::VectorXd>& a,
                     const Eigen::Ref<const Eigen::VectorXd>& b) {
  return map.encode(a).values().dot(map.encode(b).values());
}

Eigen::VectorXd null_space_collision(const RfMap& map,
                                     const Eigen::Ref<const Eigen::VectorXd>& a) {
  if (a.size() != map.dim()) {
    throw std::invalid_argument("null_space_collision: pattern length mismatch");
  }
  const Eigen::MatrixXd& v = map.v();
  // Full V from the SVD spans R^dim; columns past the numerical rank span ker(V).
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(v, Eigen::ComputeFullV);
  const double tol = std::max(v.rows(), v.cols()) *
                     std::numeric_limits<double>::epsilon() *
                     (svd.singularValues().size() ? svd.singularValues()(0) : 0.0);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
    if (svd.singularValues()(i) > tol) ++rank;
  }
  if (rank >= v.cols()) {
    throw std::invalid_argument(
        "null_space_collision: V has full column rank, no collision exists");
  }
  Eigen::VectorXd direction = svd.matrixV().col(rank);
  const double scale = std::max(1.0, a.norm());
  return a + scale * direction;
}

}  // namespace gradraker
