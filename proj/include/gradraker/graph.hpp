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
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace gradraker {

using Index = std::size_t;

/// Dense adjacency graph. Entry (src, dst) holds the weight of the edge
/// src -> dst, so column n lists the nodes pointing into n.
///
/// Immutable after construction; every accessor is safe for concurrent reads.
class Graph {
 public:
  Graph() = default;

  /// Takes ownership of `adjacency`. Throws std::invalid_argument if the
  /// matrix is not square, has negative or non-finite entries, or is
  /// declared undirected but is not exactly symmetric.
  Graph(Eigen::MatrixXd adjacency, bool directed,
        std::vector<std::string> node_names = {});

  Index size() const { return static_cast<Index>(adjacency_.rows()); }
  bool directed() const { return directed_; }
  const Eigen::MatrixXd& adjacency() const { return adjacency_; }

  /// Out-degree (row sums). Equal to the in-degree for undirected graphs.
  Eigen::VectorXd degrees() const;
  /// Number of nonzero off-diagonal entries; undirected edges count once.
  std::size_t edge_count() const;

  const std::vector<std::string>& node_names() const { return names_; }
  std::optional<Index> index_of(const std::string& name) const;

 private:
  Eigen::MatrixXd adjacency_;
  bool directed_ = false;
  std::vector<std::string> names_;
  std::map<std::string, Index> name_index_;
};

enum class PatternMode { kColumn, kRow, kConcat };

/// A node's connectivity used as its feature vector.
struct ConnectivityPattern {
  Eigen::VectorXd vector;
  PatternMode source_mode = PatternMode::kColumn;
};

/// Ordered training nodes plus the complement. `sampled` keeps the draw
/// order because online training is order dependent; `unsampled` is ascending.
struct SamplingPlan {
  std::vector<Index> sampled;
  std::vector<Index> unsampled;
};

struct GraphSignal {
  Eigen::VectorXd values;
  double noise_var = 0.0;
};

/// Whitespace separated "src dst [weight]" lines; '#' starts a comment.
/// Node tokens are mapped to dense indices in first-seen order. Duplicate
/// edges keep the last weight. Throws std::runtime_error carrying the
/// offending line number on malformed input.
Graph load_edge_list(std::istream& in, bool directed, bool weighted);
Graph load_edge_list_file(const std::string& path, bool directed,
                          bool weighted);

/// Parsed "node value [value ...]" label table. Each value column is one
/// signal over the listed nodes.
struct LabelTable {
  std::vector<std::string> nodes;
  std::vector<Eigen::VectorXd> columns;
};

LabelTable load_labels(std::istream& in);
LabelTable load_labels_file(const std::string& path);

/// Binary A0 with independent off-diagonal edges, then A = min(A0 + A0^T, 1).
/// The effective undirected edge probability is 1 - (1 - edge_prob)^2.
Graph erdos_renyi(Index n, double edge_prob, std::uint64_t seed);

ConnectivityPattern connectivity_pattern(const Graph& g, Index node,
                                         PatternMode mode = PatternMode::kColumn);

/// I - D^{-1/2} A D^{-1/2}. Isolated nodes get an identity row and column.
Eigen::MatrixXd normalized_laplacian(const Graph& g);

/// A^hops by repeated multiplication.
Eigen::MatrixXd power_adjacency(const Graph& g, unsigned hops);

SamplingPlan sample_nodes(Index n_nodes, Index m, std::uint64_t seed);
inline SamplingPlan sample_nodes(const Graph& g, Index m, std::uint64_t seed) {
  return sample_nodes(g.size(), m, seed);
}

/// x = K alpha + e, alpha_i ~ U[0.5, 1], e_i ~ N(0, noise_var).
GraphSignal synth_signal(const Eigen::MatrixXd& kernel_matrix, double noise_var,
                         std::uint64_t seed);

/// y = values[sampled], in plan order.
Eigen::VectorXd gather(const Eigen::VectorXd& values,
                       const std::vector<Index>& indices);

}  // namespace gradraker
