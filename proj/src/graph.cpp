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

#include "gradraker/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "gradraker/random.hpp"

namespace gradraker {

namespace {

std::vector<std::string> split_tokens(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

std::string strip_comment(const std::string& line) {
  auto pos = line.find('#');
  return pos == std::string::npos ? line : line.substr(0, pos);
}

bool parse_double(const std::string& tok, double& out) {
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

std::runtime_error line_error(std::size_t line_no, const std::string& what) {
  return std::runtime_error("line " + std::to_string(line_no) + ": " + what);
}

}  // namespace

Graph::Graph(Eigen::MatrixXd adjacency, bool directed,
             std::vector<std::string> node_names)
    : adjacency_(std::move(adjacency)),
      directed_(directed),
      names_(std::move(node_names)) {
  if (adjacency_.rows() != adjacency_.cols()) {
    throw std::invalid_argument("adjacency must be square");
  }
  if (!adjacency_.allFinite() || (adjacency_.array() < 0.0).any()) {
    throw std::invalid_argument("adjacency entries must be finite and >= 0");
  }
  if (!directed_ && adjacency_ != adjacency_.transpose()) {
    throw std::invalid_argument("undirected adjacency must be symmetric");
  }
  if (!names_.empty()) {
    if (names_.size() != size()) {
      throw std::invalid_argument("node name count does not match adjacency");
    }
    for (Index i = 0; i < names_.size(); ++i) name_index_.emplace(names_[i], i);
  }
}

Eigen::VectorXd Graph::degrees() const { return adjacency_.rowwise().sum(); }

std::size_t Graph::edge_count() const {
  std::size_t count = 0;
  const Index n = size();
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      if (i != j && adjacency_(i, j) != 0.0) ++count;
    }
  }
  return directed_ ? count : count / 2;
}

std::optional<Index> Graph::index_of(const std::string& name) const {
  auto it = name_index_.find(name);
  if (it == name_index_.end()) return std::nullopt;
  return it->second;
}

Graph load_edge_list(std::istream& in, bool directed, bool weighted) {
  struct Edge {
    Index src, dst;
    double w;
  };
  std::map<std::string, Index> ids;
  std::vector<std::string> names;
  std::vector<Edge> edges;
  auto intern = [&](const std::string& tok) {
    auto [it, inserted] = ids.emplace(tok, names.size());
    if (inserted) names.push_back(tok);
    return it->second;
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto toks = split_tokens(strip_comment(line));
    if (toks.empty()) continue;
    if (toks.size() != 2 && toks.size() != 3) {
      throw line_error(line_no, "expected 'src dst [weight]'");
    }
    double w = 1.0;
    if (toks.size() == 3) {
      if (!parse_double(toks[2], w) || w < 0.0) {
        throw line_error(line_no, "unparseable weight '" + toks[2] + "'");
      }
      if (!weighted) w = 1.0;
    }
    Index s = intern(toks[0]);
    Index d = intern(toks[1]);
    edges.push_back({s, d, w});
  }
  if (names.empty()) throw std::runtime_error("edge list is empty");

  const auto n = static_cast<Eigen::Index>(names.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : edges) {
    a(e.src, e.dst) = e.w;
    if (!directed) a(e.dst, e.src) = e.w;
  }
  return Graph(std::move(a), directed, std::move(names));
}

Graph load_edge_list_file(const std::string& path, bool directed,
                          bool weighted) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open edge list '" + path + "'");
  return load_edge_list(in, directed, weighted);
}

LabelTable load_labels(std::istream& in) {
  LabelTable table;
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto toks = split_tokens(strip_comment(line));
    if (toks.empty()) continue;
    if (toks.size() < 2) throw line_error(line_no, "expected 'node value'");
    if (width == 0) width = toks.size() - 1;
    if (toks.size() - 1 != width) {
      throw line_error(line_no, "inconsistent number of label columns");
    }
    std::vector<double> vals(width);
    for (std::size_t c = 0; c < width; ++c) {
      if (!parse_double(toks[c + 1], vals[c])) {
        throw line_error(line_no, "unparseable label '" + toks[c + 1] + "'");
      }
    }
    table.nodes.push_back(toks[0]);
    rows.push_back(std::move(vals));
  }
  if (rows.empty()) throw std::runtime_error("label file is empty");
  table.columns.assign(width, Eigen::VectorXd(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      table.columns[c](static_cast<Eigen::Index>(r)) = rows[r][c];
    }
  }
  return table;
}

LabelTable load_labels_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open label file '" + path + "'");
  return load_labels(in);
}

Graph erdos_renyi(Index n, double edge_prob, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("erdos_renyi: n must be >= 1");
  if (!(edge_prob >= 0.0 && edge_prob <= 1.0)) {
    throw std::invalid_argument("erdos_renyi: edge_prob outside [0, 1]");
  }
  Rng rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const auto nn = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(nn, nn);
  // Row-major draw order over ordered pairs keeps the stream layout stable.
  for (Eigen::Index i = 0; i < nn; ++i) {
    for (Eigen::Index j = 0; j < nn; ++j) {
      if (i == j) continue;
      if (unif(rng) < edge_prob) {
        a(i, j) = 1.0;
        a(j, i) = 1.0;
      }
    }
  }
  return Graph(std::move(a), false);
}

ConnectivityPattern connectivity_pattern(const Graph& g, Index node,
                                         PatternMode mode) {
  if (node >= g.size()) {
    throw std::out_of_range("connectivity_pattern: node " +
                            std::to_string(node) + " out of range");
  }
  const auto& a = g.adjacency();
  const auto k = static_cast<Eigen::Index>(node);
  ConnectivityPattern p;
  p.source_mode = mode;
  switch (mode) {
    case PatternMode::kColumn:
      p.vector = a.col(k);
      break;
    case PatternMode::kRow:
      p.vector = a.row(k).transpose();
      break;
    case PatternMode::kConcat:
      p.vector.resize(2 * a.rows());
      p.vector << a.col(k), a.row(k).transpose();
      break;
  }
  return p;
}

Eigen::MatrixXd normalized_laplacian(const Graph& g) {
  if (g.directed()) {
    throw std::invalid_argument(
        "normalized_laplacian: graph kernels need an undirected graph");
  }
  const auto& a = g.adjacency();
  const Eigen::Index n = a.rows();
  Eigen::VectorXd deg = a.rowwise().sum();
  Eigen::VectorXd inv_sqrt(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    inv_sqrt(i) = deg(i) > 0.0 ? 1.0 / std::sqrt(deg(i)) : 0.0;
  }
  Eigen::MatrixXd l = -(inv_sqrt.asDiagonal() * a * inv_sqrt.asDiagonal());
  l.diagonal().array() += 1.0;
  // Symmetrize away rounding so downstream eigensolvers see an exact mirror.
  l = 0.5 * (l + l.transpose()).eval();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (deg(i) == 0.0) {
      l.row(i).setZero();
      l.col(i).setZero();
      l(i, i) = 1.0;
    }
  }
  return l;
}

Eigen::MatrixXd power_adjacency(const Graph& g, unsigned hops) {
  if (hops < 1) throw std::invalid_argument("power_adjacency: hops must be >= 1");
  const auto& a = g.adjacency();
  Eigen::MatrixXd p = a;
  for (unsigned h = 1; h < hops; ++h) p = (p * a).eval();
  return p;
}

SamplingPlan sample_nodes(Index n_nodes, Index m, std::uint64_t seed) {
  if (m < 1 || m > n_nodes) {
    throw std::invalid_argument("sample_nodes: need 1 <= m <= N (m=" +
                                std::to_string(m) + ", N=" +
                                std::to_string(n_nodes) + ")");
  }
  std::vector<Index> perm(n_nodes);
  std::iota(perm.begin(), perm.end(), Index{0});
  Rng rng(seed);
  // Partial Fisher-Yates: only the first m positions are drawn.
  for (Index i = 0; i < m; ++i) {
    std::uniform_int_distribution<Index> pick(i, n_nodes - 1);
    std::swap(perm[i], perm[pick(rng)]);
  }
  SamplingPlan plan;
  plan.sampled.assign(perm.begin(), perm.begin() + static_cast<long>(m));
  plan.unsampled.assign(perm.begin() + static_cast<long>(m), perm.end());
  std::sort(plan.unsampled.begin(), plan.unsampled.end());
  return plan;
}

GraphSignal synth_signal(const Eigen::MatrixXd& kernel_matrix, double noise_var,
                         std::uint64_t seed) {
  if (kernel_matrix.rows() != kernel_matrix.cols()) {
    throw std::invalid_argument("synth_signal: kernel matrix must be square");
  }
  if (!(noise_var >= 0.0)) {
    throw std::invalid_argument("synth_signal: noise_var must be >= 0");
  }
  const Eigen::Index n = kernel_matrix.rows();
  Rng rng(seed);
  std::uniform_real_distribution<double> coef(0.5, 1.0);
  Eigen::VectorXd alpha(n);
  for (Eigen::Index i = 0; i < n; ++i) alpha(i) = coef(rng);
  GraphSignal s;
  s.values = kernel_matrix * alpha;
  s.noise_var = noise_var;
  if (noise_var > 0.0) {
    std::normal_distribution<double> noise(0.0, std::sqrt(noise_var));
    for (Eigen::Index i = 0; i < n; ++i) s.values(i) += noise(rng);
  }
  return s;
}

Eigen::VectorXd gather(const Eigen::VectorXd& values,
                       const std::vector<Index>& indices) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(indices.size()));
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(indices[i]);
    if (k >= values.size()) throw std::out_of_range("gather: index out of range");
    out(static_cast<Eigen::Index>(i)) = values(k);
  }
  return out;
}

}  // namespace gradraker
