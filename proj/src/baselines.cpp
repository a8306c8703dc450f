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

#include "gradraker/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gradraker {

Eigen::VectorXd batch_kernel_ridge(const Eigen::MatrixXd& k, const Eigen::VectorXd& y,
                                   double mu) {
  const Eigen::Index m = k.rows();
  if (k.cols() != m || y.size() != m) {
    throw std::invalid_argument("batch_kernel_ridge: K must be M x M with |y| = M");
  }
  if (!(mu >= 0.0)) throw std::invalid_argument("batch_kernel_ridge: mu must be >= 0");
  Eigen::MatrixXd system = k;
  system.diagonal().array() += mu * static_cast<double>(m);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(system);
  Eigen::VectorXd alpha;
  if (ldlt.info() == Eigen::Success) alpha = ldlt.solve(y);
  const double tol = 1e-8 * std::max(1.0, y.norm());
  if (ldlt.info() != Eigen::Success || !alpha.allFinite() ||
      (system * alpha - y).norm() > tol) {
    // Semidefinite pivoting can lose accuracy; retry with a rank revealing QR.
    alpha = system.colPivHouseholderQr().solve(y);
    if (!alpha.allFinite() || (system * alpha - y).norm() > tol) {
      throw std::runtime_error(
          "batch_kernel_ridge: singular system, increase mu");
    }
  }
  return alpha;
}

double kernel_ridge_objective(const Eigen::MatrixXd& k, const Eigen::VectorXd& y,
                              double mu, const Eigen::VectorXd& alpha) {
  const double m = static_cast<double>(y.size());
  return (k * alpha - y).squaredNorm() / m + mu * alpha.dot(k * alpha);
}

double batch_predict(const BatchKernelModel& model,
                     const Eigen::Ref<const Eigen::VectorXd>& row) {
  if (row.size() != model.alpha.size()) {
    throw std::invalid_argument("batch_predict: kernel row length mismatch");
  }
  return model.alpha.dot(row);
}

double knn_predict(const Graph& g, const std::map<Index, double>& labeled, Index node,
                   Index k) {
  if (node >= g.size()) throw std::out_of_range("knn_predict: node out of range");
  const auto& a = g.adjacency();
  const auto n = static_cast<Eigen::Index>(node);
  struct Neighbor {
    double weight;
    Index index;
    double value;
  };
  std::vector<Neighbor> hits;
  for (const auto& [idx, value] : labeled) {
    if (idx == node || idx >= g.size()) continue;
    const auto j = static_cast<Eigen::Index>(idx);
    const double w = g.directed() ? a(j, n) + a(n, j) : a(j, n);
    if (w > 0.0) hits.push_back({w, idx, value});
  }
  if (hits.empty()) {
    throw KnnInapplicable("kNN inapplicable: node " + std::to_string(node) +
                          " has no labeled neighbor");
  }
  if (k > 0 && hits.size() > k) {
    std::stable_sort(hits.begin(), hits.end(), [](const Neighbor& x, const Neighbor& y) {
      return x.weight > y.weight;
    });
    hits.resize(k);
  }
  double wsum = 0.0;
  double acc = 0.0;
  for (const auto& h : hits) {
    wsum += h.weight;
    acc += h.weight * h.value;
  }
  return acc / wsum;
}

Eigen::VectorXd batch_rf_ls(const Eigen::MatrixXd& z, const Eigen::VectorXd& y, double mu) {
  if (z.rows() != y.size()) {
    throw std::invalid_argument("batch_rf_ls: Z rows must match |y|");
  }
  if (!(mu >= 0.0)) throw std::invalid_argument("batch_rf_ls: mu must be >= 0");
  if (z.rows() == 0) return Eigen::VectorXd::Zero(z.cols());
  if (mu == 0.0) return z.completeOrthogonalDecomposition().solve(y);
  Eigen::MatrixXd gram = z.transpose() * z;
  gram.diagonal().array() += mu * static_cast<double>(z.rows());
  return gram.llt().solve(z.transpose() * y);
}

double rf_ls_objective(const Eigen::MatrixXd& z, const Eigen::VectorXd& y, double mu,
                       const Eigen::VectorXd& theta) {
  return (z * theta - y).squaredNorm() +
         mu * static_cast<double>(z.rows()) * theta.squaredNorm();
}

Eigen::VectorXd rf_ls_gradient(const Eigen::MatrixXd& z, const Eigen::VectorXd& y,
                               double mu, const Eigen::VectorXd& theta) {
  return 2.0 * z.transpose() * (z * theta - y) +
         2.0 * mu * static_cast<double>(z.rows()) * theta;
}

}  // namespace gradraker
