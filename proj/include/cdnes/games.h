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

#ifndef CDNES_GAMES_H_
#define CDNES_GAMES_H_

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "cdnes/rng.h"

namespace cdnes {

// An n-player game with unconstrained actions x_i in R^{d_i}. The joint
// action is laid out block by block in R^D, D = sum d_i.
class Game {
 public:
  // Writes grad_{x_i} J_i(x) (d_i entries) into `out`.
  using GradFn =
      std::function<void(std::span<const double> x, int player, std::span<double> out)>;
  using CostFn = std::function<double(std::span<const double> x, int player)>;

  Game(std::string name, std::vector<int> dims, GradFn grad);

  const std::string& name() const { return name_; }
  int num_players() const { return static_cast<int>(dims_.size()); }
  int dim(int player) const { return dims_[player]; }
  int offset(int player) const { return offsets_[player]; }
  int total_dim() const { return offsets_.back(); }
  const std::vector<int>& dims() const { return dims_; }

  void Grad(std::span<const double> x, int player, std::span<double> out) const {
    grad_(x, player, out);
  }

  // Strong monotonicity and Lipschitz constants (L = max_i L_i).
  double mu() const { return mu_; }
  double L() const { return lipschitz_; }
  void SetConstants(double mu, double lipschitz);

  const std::optional<Eigen::VectorXd>& known_ne() const { return known_ne_; }
  // Throws InvalidArgument unless ||f(x*)|| <= 1e-9.
  void SetKnownNe(Eigen::VectorXd x_star);

  bool has_cost() const { return static_cast<bool>(cost_); }
  double Cost(std::span<const double> x, int player) const { return cost_(x, player); }
  void SetCost(CostFn cost) { cost_ = std::move(cost); }

  // f(x) = jac x + b, when the mapping is known to be affine. The engine
  // evaluates local gradients from it directly; it must agree with Grad.
  struct AffineForm {
    Eigen::SparseMatrix<double, Eigen::RowMajor> jac;
    Eigen::VectorXd b;
  };
  const std::optional<AffineForm>& affine() const { return affine_; }
  void SetAffine(const Eigen::MatrixXd& jac, Eigen::VectorXd b);

 private:
  std::string name_;
  std::vector<int> dims_;
  std::vector<int> offsets_;
  GradFn grad_;
  CostFn cost_;
  double mu_ = 0.0;
  double lipschitz_ = 0.0;
  std::optional<Eigen::VectorXd> known_ne_;
  std::optional<AffineForm> affine_;
};

// Stacked game mapping f(x) = [grad_1 J_1(x); ...; grad_n J_n(x)], every
// block evaluated at the same joint action.
Eigen::VectorXd GameMapping(const Game& game, std::span<const double> x);

// Jacobian of an affine mapping, recovered column by column from f(e_j) - f(0).
Eigen::MatrixXd AffineJacobian(const Game& game);

struct GameConstants {
  double mu = 0.0;  // lambda_min((J + J^T) / 2)
  double L = 0.0;   // max_i sigma_max(J[block_i, :])
};

// Exact constants of an affine mapping with Jacobian `jac` and block sizes `dims`.
GameConstants AffineConstants(const Eigen::MatrixXd& jac, const std::vector<int>& dims);

// Sensor connectivity-control game on n players with 2-D positions:
//   J_i(x) = x_i' (i I) x_i + x_i' (i, i)' + i + ||x_i - x_{i+1}||^2
// (player n couples to player 1). The unique NE is x* = -0.5 * 1.
Game ConnectivityGame(int n);

// Affine game f(x) = M x + b with block sizes `dims` (default: D scalar
// players). Requires (M + M^T)/2 positive definite; x* solves M x = -b.
Game LqGame(const Eigen::MatrixXd& m, const Eigen::VectorXd& b, std::vector<int> dims = {});

struct ConstantEstimate {
  double mu_hat = 0.0;  // min <x-y, f(x)-f(y)> / ||x-y||^2, an upper bound on mu
  double L_hat = 0.0;   // max ||f_i(x)-f_i(y)|| / ||x-y||, a lower bound on L
  int pairs = 0;
};

// Samples pairs uniformly in the box [-radius, radius]^D. Coincident pairs
// are skipped.
ConstantEstimate EstimateConstants(const Game& game, int samples, double radius, Stream& rng);

}  // namespace cdnes

#endif  // CDNES_GAMES_H_
