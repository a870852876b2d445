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

#ifndef CDNES_GRAPH_H_
#define CDNES_GRAPH_H_

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace cdnes {

// Undirected communication graph. Agents are 0-indexed in memory; the
// edge-list text format is 1-indexed.
struct Topology {
  int n = 0;
  // Each unordered pair appears once with first < second.
  std::vector<std::pair<int, int>> edges;

  std::vector<std::vector<int>> Neighbors() const;
  std::vector<int> Degrees() const;
  bool IsConnected() const;
};

// Throws InvalidArgument on self-loops, out-of-range endpoints, duplicate
// edges or a disconnected graph.
void Validate(const Topology& topo);

Topology PathGraph(int n);
Topology CompleteGraph(int n);
Topology RingGraph(int n);

inline constexpr int kMaxGraphAttempts = 1000;

// Erdos-Renyi G(n, p), resampled until connected. Deterministic in `seed`.
// Throws InvalidArgument after kMaxGraphAttempts failed draws.
Topology RandomConnectedGraph(int n, double edge_prob, uint64_t seed);

struct SpectralGap {
  double rho_w = 0.0;  // spectral radius of W - (1/n) 1 1^T
  double s = 0.0;      // 1 - rho_w
};

// Symmetric eigendecomposition of the deflated matrix. Rejects non-square or
// non-symmetric input.
SpectralGap ComputeSpectralGap(const Eigen::MatrixXd& w);

struct MixingMatrix {
  Eigen::MatrixXd w;
  double rho_w = 0.0;
  double s = 0.0;

  int n() const { return static_cast<int>(w.rows()); }
};

inline constexpr double kStochasticTol = 1e-12;

// w_ij = 1 / max_degree on edges, w_ii = 1 - sum_j w_ij, zero elsewhere.
MixingMatrix MaxDegreeWeights(const Topology& topo);

// Metropolis-Hastings weights w_ij = 1 / (1 + max(deg_i, deg_j)). A common
// alternative rule, useful when the max-degree rule is degenerate (the
// two-node path gives the swap matrix with zero spectral gap).
MixingMatrix MetropolisWeights(const Topology& topo);

// Checks symmetry, nonnegativity, unit row/column sums (kStochasticTol),
// sparsity against `topo`, and a strictly positive spectral gap. A zero gap
// makes the matrix unusable for consensus even though it is doubly
// stochastic.
void ValidateMixing(const MixingMatrix& mix, const Topology& topo);

void WriteEdgeList(std::ostream& os, const Topology& topo);
Topology ReadEdgeList(std::istream& is, int n = 0);
void WriteMatrixCsv(std::ostream& os, const Eigen::MatrixXd& m);

}  // namespace cdnes

#endif  // CDNES_GRAPH_H_
