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
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gradraker/graph.hpp"

namespace gradraker {

enum class KernelFamily { kGaussian, kLaplacian, kCauchy };

std::string to_string(KernelFamily family);
KernelFamily kernel_family_from_string(const std::string& name);

/// Standardized shift-invariant kernel on connectivity patterns.
///
///   gaussian   exp(-|d|_2^2 / (2 bandwidth))        bandwidth is sigma^2
///   laplacian  exp(-|d|_1 / bandwidth)              bandwidth is a scale
///   cauchy     prod_i 1 / (1 + d_i^2 / bandwidth^2)  bandwidth is a scale
///
/// All three satisfy k(a, a) = 1 and 0 < k <= 1.
struct KernelSpec {
  KernelFamily family = KernelFamily::kGaussian;
  double bandwidth = 1.0;

  static KernelSpec gaussian(double sigma2) { return {KernelFamily::kGaussian, sigma2}; }
  static KernelSpec laplacian(double scale) { return {KernelFamily::kLaplacian, scale}; }
  static KernelSpec cauchy(double scale) { return {KernelFamily::kCauchy, scale}; }

  /// "gaussian:5", "laplacian:2", ...
  static KernelSpec parse(const std::string& text);
  std::string to_string() const;

  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

double eval_kernel(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& a,
                   const Eigen::Ref<const Eigen::VectorXd>& b);

/// Gram matrix over the columns of `features` (one node per column).
Eigen::MatrixXd kernel_matrix(const KernelSpec& spec, const Eigen::MatrixXd& features);

/// Cross kernel between the columns of `left` and `right`.
Eigen::MatrixXd cross_kernel(const KernelSpec& spec, const Eigen::MatrixXd& left,
                             const Eigen::MatrixXd& right);

/// d x dim matrix whose rows are i.i.d. draws from the kernel's normalized
/// Fourier transform: normal(0, 1/sigma^2) for gaussian, Cauchy(0, 1/scale)
/// for laplacian, Laplace(0, 1/scale) for cauchy.
Eigen::MatrixXd spectral_sample(const KernelSpec& spec, Eigen::Index d,
                                Eigen::Index dim, std::uint64_t seed);

enum class GraphKernelFamily { kDiffusion, kBandlimited };

/// Spectral graph kernel K = U r^+(Lambda) U^T over the normalized Laplacian.
struct GraphKernelSpec {
  GraphKernelFamily family = GraphKernelFamily::kDiffusion;
  /// Diffusion: r(lambda) = exp(sigma2 * lambda / 2).
  double sigma2 = 1.0;
  /// Band-limited: unit response on the `band` smallest eigenvalues,
  /// 1 / band_floor elsewhere.
  Index band = 1;
  double band_floor = 1e-6;
  /// r^+(lambda) = 1 / r(lambda) when r(lambda) > pinv_threshold, else 0.
  double pinv_threshold = 1e-10;

  static GraphKernelSpec diffusion(double sigma2) {
    GraphKernelSpec s;
    s.family = GraphKernelFamily::kDiffusion;
    s.sigma2 = sigma2;
    return s;
  }
  static GraphKernelSpec bandlimited(Index band, double floor = 1e-6) {
    GraphKernelSpec s;
    s.family = GraphKernelFamily::kBandlimited;
    s.band = band;
    s.band_floor = floor;
    return s;
  }
  std::string to_string() const;
};

/// Kernel built from a precomputed Laplacian eigendecomposition.
Eigen::MatrixXd graph_kernel_from_spectrum(const Eigen::VectorXd& eigenvalues,
                                           const Eigen::MatrixXd& eigenvectors,
                                           const GraphKernelSpec& spec);

/// Eigendecomposes the normalized Laplacian and applies the spectral map.
/// Throws std::invalid_argument for directed graphs.
Eigen::MatrixXd graph_kernel_matrix(const Graph& g, const GraphKernelSpec& spec);

}  // namespace gradraker
