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

#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Dense>
#include <doctest.h>

#include "cdnes/errors.h"
#include "cdnes/graph.h"
#include "cdnes/rng.h"

using namespace cdnes;

namespace {

// Independent oracle: spectral radius of the deflated matrix from the
// general (nonsymmetric) eigensolver.
double DeflatedRadius(const Eigen::MatrixXd& w) {
  const int n = static_cast<int>(w.rows());
  const Eigen::MatrixXd dfl = w - Eigen::MatrixXd::Constant(n, n, 1.0 / n);
  return Eigen::EigenSolver<Eigen::MatrixXd>(dfl).eigenvalues().cwiseAbs().maxCoeff();
}

// Independent connectivity oracle by union-find.
bool ConnectedByUnionFind(const Topology& t) {
  std::vector<int> parent(t.n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& [a, b] : t.edges) parent[find(a)] = find(b);
  for (int i = 1; i < t.n; ++i) {
    if (find(i) != find(0)) return false;
  }
  return true;
}

void CheckAverageContraction(const MixingMatrix& mix, uint64_t seed) {
  Stream rng(seed);
  const int n = mix.n();
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::MatrixXd omega(n, 3);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < 3; ++j) omega(i, j) = rng.Normal();
    }
    const Eigen::RowVectorXd mean = omega.colwise().mean();
    const Eigen::MatrixXd centered = omega.rowwise() - mean;
    const double lhs = ((mix.w * omega).rowwise() - mean).norm();
    CHECK(lhs <= mix.rho_w * centered.norm() + 1e-10);
    for (double gamma : {0.1, 0.5, 1.0}) {
      const Eigen::MatrixXd wt =
          (1.0 - gamma) * Eigen::MatrixXd::Identity(n, n) + gamma * mix.w;
      const double lhs_t = ((wt * omega).rowwise() - mean).norm();
      CHECK(lhs_t <= (1.0 - gamma * mix.s) * centered.norm() + 1e-10);
    }
  }
}

}  // namespace

TEST_CASE("max-degree weights on the 3-node path") {
  const MixingMatrix mix = MaxDegreeWeights(PathGraph(3));
  Eigen::MatrixXd expected(3, 3);
  expected << 0.5, 0.5, 0.0, 0.5, 0.0, 0.5, 0.0, 0.5, 0.5;
  CHECK((mix.w - expected).cwiseAbs().maxCoeff() == 0.0);
  // Eigenvalues of W are {1, 0.5, -0.5}.
  CHECK(mix.rho_w == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(mix.s == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(DeflatedRadius(mix.w) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("complete graph on two nodes is flagged as degenerate") {
  const Topology topo = CompleteGraph(2);
  const MixingMatrix mix = MaxDegreeWeights(topo);
  Eigen::MatrixXd expected(2, 2);
  expected << 0.0, 1.0, 1.0, 0.0;
  CHECK((mix.w - expected).cwiseAbs().maxCoeff() == 0.0);
  CHECK(mix.rho_w == doctest::Approx(1.0));
  CHECK(mix.s == doctest::Approx(0.0).epsilon(1e-12));
  CHECK_THROWS_AS(ValidateMixing(mix, topo), InvalidArgument);
}

TEST_CASE("spectral gap of special matrices") {
  const int n = 6;
  const SpectralGap avg = ComputeSpectralGap(Eigen::MatrixXd::Constant(n, n, 1.0 / n));
  CHECK(avg.rho_w == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(avg.s == doctest::Approx(1.0).epsilon(1e-12));

  const SpectralGap id = ComputeSpectralGap(Eigen::MatrixXd::Identity(n, n));
  CHECK(id.rho_w == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(id.s == doctest::Approx(0.0).epsilon(1e-12));

  Eigen::MatrixXd asym = Eigen::MatrixXd::Constant(3, 3, 1.0 / 3);
  asym(0, 1) += 0.1;
  asym(0, 2) -= 0.1;
  CHECK_THROWS_AS(ComputeSpectralGap(asym), InvalidArgument);
}

TEST_CASE("spectral gap agrees with the general eigensolver") {
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    const Topology topo = RandomConnectedGraph(20, 0.2, seed);
    for (const MixingMatrix& mix : {MaxDegreeWeights(topo), MetropolisWeights(topo)}) {
      CHECK(mix.rho_w == doctest::Approx(DeflatedRadius(mix.w)).epsilon(1e-10));
      CHECK(mix.s == doctest::Approx(1.0 - mix.rho_w).epsilon(1e-15));
    }
  }
}

TEST_CASE("random connected graphs") {
  SUBCASE("two nodes with p = 1 give the single edge") {
    const Topology t = RandomConnectedGraph(2, 1.0, 99);
    REQUIRE(t.edges.size() == 1);
    CHECK(t.edges[0] == std::pair<int, int>{0, 1});
  }
  SUBCASE("three nodes with p = 1 give the triangle") {
    CHECK(RandomConnectedGraph(3, 1.0, 3).edges.size() == 3);
  }
  SUBCASE("fifty nodes, p = 0.08, seed 7") {
    const Topology t = RandomConnectedGraph(50, 0.08, 7);
    CHECK(t.n == 50);
    CHECK(ConnectedByUnionFind(t));
    CHECK(t.IsConnected());
  }
  SUBCASE("deterministic for a fixed seed") {
    CHECK(RandomConnectedGraph(30, 0.15, 11).edges == RandomConnectedGraph(30, 0.15, 11).edges);
    CHECK(RandomConnectedGraph(30, 0.15, 11).edges != RandomConnectedGraph(30, 0.15, 12).edges);
  }
  SUBCASE("hopelessly sparse requests fail with a diagnostic") {
    try {
      RandomConnectedGraph(50, 0.001, 1);
      FAIL("expected an error");
    } catch (const InvalidArgument& e) {
      CHECK(std::string(e.what()).find("1000") != std::string::npos);
    }
  }
  SUBCASE("n < 2 is rejected") { CHECK_THROWS_AS(RandomConnectedGraph(1, 0.5, 1), InvalidArgument); }
}

TEST_CASE("topology validation") {
  Topology loop{3, {{0, 1}, {1, 1}}};
  CHECK_THROWS_AS(Validate(loop), InvalidArgument);
  Topology out_of_range{3, {{0, 1}, {1, 3}}};
  CHECK_THROWS_AS(Validate(out_of_range), InvalidArgument);
  Topology dup{3, {{0, 1}, {1, 0}, {1, 2}}};
  CHECK_THROWS_AS(Validate(dup), InvalidArgument);
  Topology split{4, {{0, 1}, {2, 3}}};
  CHECK_FALSE(split.IsConnected());
  CHECK_THROWS_AS(Validate(split), InvalidArgument);
  CHECK_NOTHROW(Validate(RingGraph(5)));
}

TEST_CASE("mixing matrices are doubly stochastic and respect sparsity") {
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    const Topology topo = RandomConnectedGraph(25, 0.15, seed);
    for (const MixingMatrix& mix : {MaxDegreeWeights(topo), MetropolisWeights(topo)}) {
      CHECK_NOTHROW(ValidateMixing(mix, topo));
      CHECK((mix.w.rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-12);
      CHECK((mix.w.colwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-12);
      CHECK(mix.w.minCoeff() >= 0.0);
      CHECK(mix.rho_w < 1.0);
    }
  }
}

TEST_CASE("contraction toward the average (sampled)") {
  CheckAverageContraction(MaxDegreeWeights(PathGraph(3)), 1);
  CheckAverageContraction(MaxDegreeWeights(RingGraph(8)), 2);
  CheckAverageContraction(MaxDegreeWeights(RandomConnectedGraph(50, 0.08, 7)), 3);
  CheckAverageContraction(MetropolisWeights(RandomConnectedGraph(30, 0.1, 4)), 4);
}

TEST_CASE("edge list and matrix export") {
  const Topology t = RandomConnectedGraph(12, 0.3, 8);
  std::stringstream ss;
  WriteEdgeList(ss, t);
  const std::string text = ss.str();
  // 1-indexed output: node 0 never appears as a token.
  std::istringstream tokens(text);
  std::string tok;
  int min_id = 1000;
  while (tokens >> tok) {
    if (tok[0] != '#') min_id = std::min(min_id, std::stoi(tok));
  }
  CHECK(min_id >= 1);
  std::istringstream back(text);
  const Topology u = ReadEdgeList(back, 12);
  CHECK(u.edges == t.edges);

  std::istringstream commented("# a path\n1 2\n2 3  # trailing\n");
  const Topology p = ReadEdgeList(commented);
  CHECK(p.n == 3);
  CHECK(p.edges.size() == 2);

  std::stringstream csv;
  WriteMatrixCsv(csv, MaxDegreeWeights(PathGraph(3)).w);
  CHECK(csv.str() == "0.5,0.5,0\n0.5,0,0.5\n0,0.5,0.5\n");
}
