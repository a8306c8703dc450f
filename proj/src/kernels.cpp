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

#include "gradraker/kernels.hpp"

#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "gradraker/random.hpp"

namespace gradraker {

namespace {

void check_bandwidth(const KernelSpec& spec) {
  if (!(spec.bandwidth > 0.0) || !std::isfinite(spec.bandwidth)) {
    throw std::invalid_argument("kernel bandwidth must be positive and finite");
  }
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

std::string to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::kGaussian: return "gaussian";
    case KernelFamily::kLaplacian: return "laplacian";
    case KernelFamily::kCauchy: return "cauchy";
  }
  return "unknown";
}

KernelFamily kernel_family_from_string(const std::string& name) {
  if (name == "gaussian") return KernelFamily::kGaussian;
  if (name == "laplacian") return KernelFamily::kLaplacian;
  if (name == "cauchy") return KernelFamily::kCauchy;
  throw std::invalid_argument("unsupported kernel family '" + name + "'");
}

KernelSpec KernelSpec::parse(const std::string& text) {
  auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw std::invalid_argument("kernel spec '" + text + "' is not family:bandwidth");
  }
  KernelSpec spec;
  spec.family = kernel_family_from_string(text.substr(0, colon));
  const std::string bw = text.substr(colon + 1);
  auto [ptr, ec] = std::from_chars(bw.data(), bw.data() + bw.size(), spec.bandwidth);
  if (ec != std::errc() || ptr != bw.data() + bw.size()) {
    throw std::invalid_argument("kernel spec '" + text + "' has a bad bandwidth");
  }
  check_bandwidth(spec);
  return spec;
}

std::string KernelSpec::to_string() const {
  return gradraker::to_string(family) + ":" + format_double(bandwidth);
}

double eval_kernel(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& a,
                   const Eigen::Ref<const Eigen::VectorXd>& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("eval_kernel: vector lengths differ");
  }
  check_bandwidth(spec);
  switch (spec.family) {
    case KernelFamily::kGaussian:
      return std::exp(-(a - b).squaredNorm() / (2.0 * spec.bandwidth));
    case KernelFamily::kLaplacian:
      return std::exp(-(a - b).lpNorm<1>() / spec.bandwidth);
    case KernelFamily::kCauchy: {
      const double s2 = spec.bandwidth * spec.bandwidth;
      double k = 1.0;
      for (Eigen::Index i = 0; i < a.size(); ++i) {
        const double d = a(i) - b(i);
        k /= 1.0 + d * d / s2;
      }
      return k;
    }
  }
  throw std::invalid_argument("eval_kernel: unsupported family");
}

Eigen::MatrixXd cross_kernel(const KernelSpec& spec, const Eigen::MatrixXd& left,
                             const Eigen::MatrixXd& right) {
  if (left.rows() != right.rows()) {
    throw std::invalid_argument("cross_kernel: feature dimensions differ");
  }
  check_bandwidth(spec);
  if (spec.family == KernelFamily::kGaussian) {
    // |a-b|^2 = |a|^2 + |b|^2 - 2 a.b, clamped at zero against cancellation.
    Eigen::MatrixXd d2 = -2.0 * (left.transpose() * right);
    d2.colwise() += left.colwise().squaredNorm().transpose();
    d2.rowwise() += right.colwise().squaredNorm();
    return (-(d2.array().max(0.0)) / (2.0 * spec.bandwidth)).exp().matrix();
  }
  Eigen::MatrixXd k(left.cols(), right.cols());
  for (Eigen::Index j = 0; j < right.cols(); ++j) {
    for (Eigen::Index i = 0; i < left.cols(); ++i) {
      k(i, j) = eval_kernel(spec, left.col(i), right.col(j));
    }
  }
  return k;
}

Eigen::MatrixXd kernel_matrix(const KernelSpec& spec, const Eigen::MatrixXd& features) {
  Eigen::MatrixXd k = cross_kernel(spec, features, features);
  k.diagonal().setOnes();
  return 0.5 * (k + k.transpose());
}

Eigen::MatrixXd spectral_sample(const KernelSpec& spec, Eigen::Index d,
                                Eigen::Index dim, std::uint64_t seed) {
  if (d < 1 || dim < 1) {
    throw std::invalid_argument("spectral_sample: d and dim must be >= 1");
  }
  check_bandwidth(spec);
  Rng rng(seed);
  Eigen::MatrixXd v(d, dim);
  auto fill = [&](auto&& draw) {
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index j = 0; j < dim; ++j) v(i, j) = draw();
    }
  };
  switch (spec.family) {
    case KernelFamily::kGaussian: {
      std::normal_distribution<double> dist(0.0, 1.0 / std::sqrt(spec.bandwidth));
      fill([&] { return dist(rng); });
      break;
    }
    case KernelFamily::kLaplacian: {
      std::cauchy_distribution<double> dist(0.0, 1.0 / spec.bandwidth);
      fill([&] { return dist(rng); });
      break;
    }
    case KernelFamily::kCauchy: {
      std::exponential_distribution<double> mag(spec.bandwidth);
      std::bernoulli_distribution sign(0.5);
      fill([&] {
        const double m = mag(rng);
        return sign(rng) ? m : -m;
      });
      break;
    }
  }
  return v;
}

std::string GraphKernelSpec::to_string() const {
  if (family == GraphKernelFamily::kDiffusion) {
    return "diffusion:" + format_double(sigma2);
  }
  return "bandlimited:" + std::to_string(band);
}

Eigen::MatrixXd graph_kernel_from_spectrum(const Eigen::VectorXd& eigenvalues,
                                           const Eigen::MatrixXd& eigenvectors,
                                           const GraphKernelSpec& spec) {
  const Eigen::Index n = eigenvalues.size();
  Eigen::VectorXd response(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double r = 0.0;
    if (spec.family == GraphKernelFamily::kDiffusion) {
      r = std::exp(spec.sigma2 * eigenvalues(i) / 2.0);
    } else {
      // Eigenvalues arrive ascending from the self-adjoint solver.
      r = static_cast<Index>(i) < spec.band ? 1.0 : 1.0 / spec.band_floor;
    }
    response(i) = r > spec.pinv_threshold ? 1.0 / r : 0.0;
  }
  Eigen::MatrixXd k = eigenvectors * response.asDiagonal() * eigenvectors.transpose();
  return 0.5 * (k + k.transpose());
}

Eigen::MatrixXd graph_kernel_matrix(const Graph& g, const GraphKernelSpec& spec) {
  if (g.directed()) {
    throw std::invalid_argument("graph_kernel_matrix: graph must be undirected");
  }
  if (spec.family == GraphKernelFamily::kDiffusion && !(spec.sigma2 >= 0.0)) {
    throw std::invalid_argument("graph_kernel_matrix: sigma2 must be >= 0");
  }
  if (spec.family == GraphKernelFamily::kBandlimited &&
      !(spec.band_floor > 0.0 && spec.band >= 1)) {
    throw std::invalid_argument("graph_kernel_matrix: band >= 1 and floor > 0 required");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(normalized_laplacian(g));
  if (eig.info() != Eigen::Success) {
    throw std::runtime_error("graph_kernel_matrix: eigendecomposition failed");
  }
  return graph_kernel_from_spectrum(eig.eigenvalues(), eig.eigenvectors(), spec);
}

}  // namespace gradraker
