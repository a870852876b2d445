// Copyright 2026 The cdnes Authors. All Rights Reserved.
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
// =============================================================================

#include "cdnes/graph.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <queue>
#include <set>
#include <sstream>
#include <string>

#include "cdnes/errors.h"
#include "cdnes/rng.h"

namespace cdnes {

std::vector<std::vector<int>> Topology::Neighbors() const {
  std::vector<std::vector<int>> nbrs(n);
  for (const auto& [i, j] : edges) {
    nbrs[i].push_back(j);
    nbrs[j].push_back(i);
  }
  for (auto& v : nbrs) std::sort(v.begin(), v.end());
  return nbrs;
}

std::vector<int> Topology::Degrees() const {
  std::vector<int> deg(n, 0);
  for (const auto& [i, j] : edges) {
    ++deg[i];
    ++deg[j];
  }
  return deg;
}

bool Topology::IsConnected() const {
  if (n <= 0) return false;
  const auto nbrs = Neighbors();
  std::vector<char> seen(n, 0);
  std::queue<int> frontier;
  frontier.push(0);
  seen[0] = 1;
  int reached = 1;
  while (!frontier.empty()) {
    const int u = frontier.front();
    frontier.pop();
    for (int v : nbrs[u]) {
      if (!seen[v]) {
        seen[v] = 1;
        ++reached;
        frontier.push(v);
      }
    }
  }
  return reached == n;
}

void Validate(const Topology& topo) {
  if (topo.n < 1) throw InvalidArgument("topology: agent count must be positive");
  std::set<std::pair<int, int>> seen;
  for (const auto& [i, j] : topo.edges) {
    if (i < 0 || j < 0 || i >= topo.n || j >= topo.n) {
      throw InvalidArgument("topology: edge (" + std::to_string(i + 1) + ", " +
                            std::to_string(j + 1) + ") has an endpoint outside 1.." +
                            std::to_string(topo.n));
    }
    if (i == j) {
      throw InvalidArgument("topology: self-loop at agent " + std::to_string(i + 1));
    }
    if (!seen.insert({std::min(i, j), std::max(i, j)}).second) {
      throw InvalidArgument("topology: duplicate edge (" + std::to_string(i + 1) + ", " +
                            std::to_string(j + 1) + ")");
    }
  }
  if (!topo.IsConnected()) throw InvalidArgument("topology: graph is not connected");
}

Topology PathGraph(int n) {
  if (n < 1) throw InvalidArgument("path graph: n must be positive");
  Topology t{n, {}};
  for (int i = 0; i + 1 < n; ++i) t.edges.emplace_back(i, i + 1);
  return t;
}

Topology CompleteGraph(int n) {
  if (n < 1) throw InvalidArgument("complete graph: n must be positive");
  Topology t{n, {}};
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) t.edges.emplace_back(i, j);
  return t;
}

Topology RingGraph(int n) {
  if (n < 3) return PathGraph(n);
  Topology t = PathGraph(n);
  t.edges.emplace_back(0, n - 1);
  return t;
}

Topology RandomConnectedGraph(int n, double edge_prob, uint64_t seed) {
  if (n < 2) throw InvalidArgument("random graph: n must be at least 2");
  if (!(edge_prob > 0.0 && edge_prob <= 1.0)) {
    throw InvalidArgument("random graph: edge_prob must lie in (0, 1]");
  }
  for (int attempt = 0; attempt < kMaxGraphAttempts; ++attempt) {
    Stream rng = Substream(seed, static_cast<uint64_t>(attempt), kInitStreamTag - 1);
    Topology t{n, {}};
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (rng.Uniform() < edge_prob) t.edges.emplace_back(i, j);
      }
    }
    if (t.IsConnected()) return t;
  }
  std::ostringstream msg;
  msg << "random graph: no connected sample in " << kMaxGraphAttempts
      << " attempts for n=" << n << ", edge_prob=" << edge_prob
      << " (connectivity needs roughly edge_prob > ln(n)/n = " << std::log(n) / n << ")";
  throw InvalidArgument(msg.str());
}

SpectralGap ComputeSpectralGap(const Eigen::MatrixXd& w) {
  if (w.rows() != w.cols() || w.rows() == 0) {
    throw InvalidArgument("spectral gap: matrix must be square and non-empty");
  }
  const double asym = (w - w.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12) {
    throw InvalidArgument("spectral gap: matrix is not symmetric (max |w - w^T| = " +
                          std::to_string(asym) + ")");
  }
  const Eigen::Index n = w.rows();
  const Eigen::MatrixXd deflated =
      w - Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(deflated, Eigen::EigenvaluesOnly);
  SpectralGap out;
  out.rho_w = eig.eigenvalues().cwiseAbs().maxCoeff();
  out.s = 1.0 - out.rho_w;
  return out;
}

namespace {

MixingMatrix Finish(Eigen::MatrixXd w) {
  MixingMatrix mix;
  const SpectralGap gap = ComputeSpectralGap(w);
  mix.w = std::move(w);
  mix.rho_w = gap.rho_w;
  mix.s = gap.s;
  return mix;
}

}  // namespace

MixingMatrix MaxDegreeWeights(const Topology& topo) {
  Validate(topo);
  const auto deg = topo.Degrees();
  const int max_deg = *std::max_element(deg.begin(), deg.end());
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(topo.n, topo.n);
  if (max_deg > 0) {
    const double off = 1.0 / max_deg;
    for (const auto& [i, j] : topo.edges) {
      w(i, j) = off;
      w(j, i) = off;
    }
  }
  // (max_deg - deg_i) / max_deg is exact where 1 - deg_i / max_deg can round
  // below zero at the highest-degree node.
  for (int i = 0; i < topo.n; ++i) {
    w(i, i) = max_deg > 0 ? static_cast<double>(max_deg - deg[i]) / max_deg : 1.0;
  }
  return Finish(std::move(w));
}

MixingMatrix MetropolisWeights(const Topology& topo) {
  Validate(topo);
  const auto deg = topo.Degrees();
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(topo.n, topo.n);
  for (const auto& [i, j] : topo.edges) {
    const double v = 1.0 / (1.0 + std::max(deg[i], deg[j]));
    w(i, j) = v;
    w(j, i) = v;
  }
  for (int i = 0; i < topo.n; ++i) w(i, i) = 1.0 - (w.row(i).sum() - w(i, i));
  return Finish(std::move(w));
}

void ValidateMixing(const MixingMatrix& mix, const Topology& topo) {
  const Eigen::MatrixXd& w = mix.w;
  if (w.rows() != topo.n || w.cols() != topo.n) {
    throw InvalidArgument("mixing matrix: size does not match the topology");
  }
  if ((w - w.transpose()).cwiseAbs().maxCoeff() > kStochasticTol) {
    throw InvalidArgument("mixing matrix: not symmetric");
  }
  if (w.minCoeff() < 0.0) throw InvalidArgument("mixing matrix: negative entry");
  const double row_err = (w.rowwise().sum().array() - 1.0).abs().maxCoeff();
  const double col_err = (w.colwise().sum().array() - 1.0).abs().maxCoeff();
  if (row_err > kStochasticTol || col_err > kStochasticTol) {
    throw InvalidArgument("mixing matrix: not doubly stochastic (row err " +
                          std::to_string(row_err) + ", col err " + std::to_string(col_err) +
                          ")");
  }
  Eigen::MatrixXi allowed = Eigen::MatrixXi::Identity(topo.n, topo.n);
  for (const auto& [i, j] : topo.edges) {
    allowed(i, j) = 1;
    allowed(j, i) = 1;
  }
  for (int i = 0; i < topo.n; ++i) {
    for (int j = 0; j < topo.n; ++j) {
      if (w(i, j) > 0.0 && !allowed(i, j)) {
        throw InvalidArgument("mixing matrix: weight on non-edge (" + std::to_string(i + 1) +
                              ", " + std::to_string(j + 1) + ")");
      }
    }
  }
  if (!(mix.s > 1e-12)) {
    throw InvalidArgument("mixing matrix: spectral gap s = " + std::to_string(mix.s) +
                          " (rho_w = " + std::to_string(mix.rho_w) +
                          "); consensus cannot contract");
  }
}

void WriteEdgeList(std::ostream& os, const Topology& topo) {
  for (const auto& [i, j] : topo.edges) os << (i + 1) << ' ' << (j + 1) << '\n';
}

Topology ReadEdgeList(std::istream& is, int n) {
  Topology t{0, {}};
  int max_id = 0;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    int a = 0, b = 0;
    if (!(ls >> a)) continue;
    std::string rest;
    if (!(ls >> b) || (ls >> rest)) {
      throw InvalidArgument("edge list: line " + std::to_string(lineno) +
                            " is not an `i j` pair");
    }
    if (a < 1 || b < 1) {
      throw InvalidArgument("edge list: line " + std::to_string(lineno) +
                            " has a non-positive agent id");
    }
    max_id = std::max({max_id, a, b});
    t.edges.emplace_back(std::min(a, b) - 1, std::max(a, b) - 1);
  }
  t.n = n > 0 ? n : max_id;
  Validate(t);
  return t;
}

void WriteMatrixCsv(std::ostream& os, const Eigen::MatrixXd& m) {
  const auto old = os.precision(17);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) os << ',';
      os << m(i, j);
    }
    os << '\n';
  }
  os.precision(old);
}

}  // namespace cdnes
