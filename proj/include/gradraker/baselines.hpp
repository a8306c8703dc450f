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

#include <map>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "gradraker/graph.hpp"

namespace gradraker {

/// Kernel ridge coefficients alpha = (K + mu M I)^{-1} y for an M x M
/// training kernel. Throws std::runtime_error when the system is singular
/// (mu too small for a rank deficient K).
Eigen::VectorXd batch_kernel_ridge(const Eigen::MatrixXd& k, const Eigen::VectorXd& y,
                                   double mu);

/// Objective (1/M)|K alpha - y|^2 + mu alpha' K alpha minimized by
/// batch_kernel_ridge.
double kernel_ridge_objective(const Eigen::MatrixXd& k, const Eigen::VectorXd& y,
                              double mu, const Eigen::VectorXd& alpha);

struct BatchKernelModel {
  Eigen::VectorXd alpha;
  std::vector<Index> sampled;
};

/// alpha . row, where row holds k(v, v_m) for the training nodes in order.
double batch_predict(const BatchKernelModel& model, const Eigen::Ref<const Eigen::VectorXd>& row);

/// Raised when a node has no labeled neighbor.
class KnnInapplicable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Weighted mean of the labeled neighbors' values with weights
/// a_il / sum_j a_ij, taken over labeled neighbors only. In directed graphs
/// an edge in either direction counts with weight a_il + a_li. k = 0 keeps
/// every labeled neighbor; otherwise the k heaviest are used (ties by index).
double knn_predict(const Graph& g, const std::map<Index, double>& labeled, Index node,
                   Index k = 0);

/// theta = (Z'Z + mu M I)^{-1} Z'y for an M x 2D feature matrix. mu = 0
/// falls back to the minimum-norm least-squares solution.
Eigen::VectorXd batch_rf_ls(const Eigen::MatrixXd& z, const Eigen::VectorXd& y, double mu);

/// |Z theta - y|^2 + mu M |theta|^2 and its gradient.
double rf_ls_objective(const Eigen::MatrixXd& z, const Eigen::VectorXd& y, double mu,
                       const Eigen::VectorXd& theta);
Eigen::VectorXd rf_ls_gradient(const Eigen::MatrixXd& z, const Eigen::VectorXd& y,
                               double mu, const Eigen::VectorXd& theta);

}  // namespace gradraker
