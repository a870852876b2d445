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
#include <vector>

#include <Eigen/Dense>
#include <doctest.h>

#include "cdnes/errors.h"
#include "cdnes/games.h"
#include "cdnes/rng.h"

using namespace cdnes;

namespace {

// Jacobian of the game mapping by central differences.
Eigen::MatrixXd FiniteDifferenceJacobian(const Game& g, const Eigen::VectorXd& x0) {
  const int d = g.total_dim();
  Eigen::MatrixXd jac(d, d);
  const double h = 1e-5;
  for (int j = 0; j < d; ++j) {
    Eigen::VectorXd xp = x0, xm = x0;
    xp[j] += h;
    xm[j] -= h;
    jac.col(j) = (GameMapping(g, {xp.data(), static_cast<size_t>(d)}) -
                  GameMapping(g, {xm.data(), static_cast<size_t>(d)})) /
                 (2 * h);
  }
  return jac;
}

}  // namespace

TEST_CASE("connectivity game gradient matches finite differences of the cost") {
  const Game g = ConnectivityGame(6);
  Stream rng(4);
  Eigen::VectorXd x(g.total_dim());
  for (int i = 0; i < x.size(); ++i) x[i] = rng.Uniform(-1, 1);
  REQUIRE(g.has_cost());
  const double h = 1e-6;
  for (int p = 0; p < g.num_players(); ++p) {
    std::vector<double> grad(2);
    g.Grad({x.data(), static_cast<size_t>(x.size())}, p, grad);
    for (int c = 0; c < 2; ++c) {
      Eigen::VectorXd xp = x, xm = x;
      xp[g.offset(p) + c] += h;
      xm[g.offset(p) + c] -= h;
      const double fd = (g.Cost({xp.data(), static_cast<size_t>(x.size())}, p) -
                         g.Cost({xm.data(), static_cast<size_t>(x.size())}, p)) /
                        (2 * h);
      CHECK(grad[c] == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("connectivity game equilibrium and constants") {
  for (int n : {2, 5, 50}) {
    const Game g = ConnectivityGame(n);
    REQUIRE(g.known_ne());
    CHECK(g.known_ne()->isApproxToConstant(-0.5));
    const Eigen::VectorXd& xs = *g.known_ne();
    CHECK(GameMapping(g, {xs.data(), static_cast<size_t>(xs.size())}).norm() < 1e-12);

    const Eigen::MatrixXd jac = FiniteDifferenceJacobian(g, Eigen::VectorXd::Zero(2 * n));
    const Eigen::MatrixXd sym = 0.5 * (jac + jac.transpose());
    const double mu = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sym).eigenvalues().minCoeff();
    double lip = 0.0;
    for (int p = 0; p < n; ++p) {
      lip = std::max(lip, Eigen::JacobiSVD<Eigen::MatrixXd>(jac.middleRows(2 * p, 2))
                              .singularValues()(0));
    }
    CHECK(g.mu() == doctest::Approx(mu).epsilon(1e-6));
    CHECK(g.L() == doctest::Approx(lip).epsilon(1e-6));
    CHECK(g.mu() > 0.0);
  }
  CHECK_THROWS_AS(ConnectivityGame(1), InvalidArgument);
}

TEST_CASE("lq game solves M x = -b") {
  Eigen::MatrixXd m(2, 2);
  m << 2, 1, 0, 2;
  const Eigen::Vector2d b(-3, -4);
  const Game g = LqGame(m, b);
  REQUIRE(g.known_ne());
  CHECK((*g.known_ne() - Eigen::Vector2d(0.5, 2.0)).norm() < 1e-14);
  // (M + M')/2 = [[2, 0.5], [0.5, 2]] has smallest eigenvalue 1.5; row norms
  // of M are sqrt(5) and 2.
  CHECK(g.mu() == doctest::Approx(1.5));
  CHECK(g.L() == doctest::Approx(std::sqrt(5.0)));
  CHECK((AffineJacobian(g) - m).norm() < 1e-12);
  CHECK(g.has_cost());
}

TEST_CASE("lq game rejects non-monotone mappings and bad shapes") {
  Eigen::MatrixXd rot(2, 2);
  rot << 0, 1, -1, 0;
  try {
    LqGame(rot, Eigen::Vector2d::Zero());
    FAIL("expected an error");
  } catch (const InvalidArgument& e) {
    CHECK(std::string(e.what()).find("lambda_min") != std::string::npos);
  }
  CHECK_THROWS_AS(LqGame(Eigen::MatrixXd::Identity(3, 3), Eigen::Vector2d::Zero()), InvalidArgument);
  CHECK_THROWS_AS(LqGame(Eigen::MatrixXd::Identity(3, 3), Eigen::Vector3d::Zero(), {1, 1}),
                  InvalidArgument);
}

TEST_CASE("lq game blocks") {
  Eigen::MatrixXd m(3, 3);
  m << 3, 1, 0, 0, 3, 0.5, 0.2, 0, 2;
  const Game g = LqGame(m, Eigen::Vector3d(1, -1, 2), {2, 1});
  CHECK(g.num_players() == 2);
  CHECK(g.dim(0) == 2);
  CHECK(g.offset(1) == 2);
  // Player 0's diagonal block [[3, 1], [0, 3]] is not symmetric, so no cost.
  CHECK_FALSE(g.has_cost());
  const Eigen::VectorXd& xs = *g.known_ne();
  CHECK(GameMapping(g, {xs.data(), 3}).norm() < 1e-12);
}

TEST_CASE("sampled constants bracket the exact ones") {
  Stream rng(8);
  for (const Game& g : {ConnectivityGame(5), LqGame((Eigen::MatrixXd(2, 2) << 2, 1, 0, 2).finished(),
                                                    Eigen::Vector2d(-3, -4))}) {
    const ConstantEstimate est = EstimateConstants(g, 400, 2.0, rng);
    CHECK(est.pairs > 0);
    // Strong monotonicity: every sampled ratio is at least mu.
    CHECK(est.mu_hat >= g.mu() * (1 - 1e-9));
    // Lipschitz continuity: every sampled ratio is at most L.
    CHECK(est.L_hat <= g.L() * (1 + 1e-9));
  }
}

TEST_CASE("known equilibrium is checked on assignment") {
  Game g = ConnectivityGame(3);
  CHECK_THROWS_AS(g.SetKnownNe(Eigen::VectorXd::Zero(6)), InvalidArgument);
  CHECK_THROWS_AS(g.SetConstants(-1.0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(g.SetConstants(2.0, 1.0), InvalidArgument);
}

TEST_CASE("affine form agrees with the gradient callback") {
  Eigen::MatrixXd m(3, 3);
  m << 3, 1, 0, -1, 2, 0.5, 0, 0.5, 4;
  const Game lq = LqGame(m, Eigen::Vector3d(1, -2, 0.5), {1, 2});
  for (const Game& g : {ConnectivityGame(6), lq}) {
    CAPTURE(g.name());
    REQUIRE(g.affine().has_value());
    Stream rng(5);
    for (int t = 0; t < 50; ++t) {
      Eigen::VectorXd x(g.total_dim());
      for (Eigen::Index j = 0; j < x.size(); ++j) x[j] = rng.Uniform(-3, 3);
      const Eigen::VectorXd f = GameMapping(g, {x.data(), static_cast<size_t>(x.size())});
      const Eigen::VectorXd affine = g.affine()->jac * x + g.affine()->b;
      CHECK((f - affine).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + f.cwiseAbs().maxCoeff()));
    }
  }
  Game custom("anon", {1}, [](std::span<const double> x, int, std::span<double> out) {
    out[0] = x[0];
  });
  CHECK_FALSE(custom.affine().has_value());
  CHECK_THROWS_AS(custom.SetAffine(Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Zero(2)),
                  InvalidArgument);
}
