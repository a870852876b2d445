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

#include "cdnes/games.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "cdnes/errors.h"

namespace cdnes {

Game::Game(std::string name, std::vector<int> dims, GradFn grad)
    : name_(std::move(name)), dims_(std::move(dims)), grad_(std::move(grad)) {
  if (dims_.empty()) throw InvalidArgument("game: at least one player required");
  offsets_.assign(dims_.size() + 1, 0);
  for (size_t i = 0; i < dims_.size(); ++i) {
    if (dims_[i] < 1) throw InvalidArgument("game: action dimensions must be >= 1");
    offsets_[i + 1] = offsets_[i] + dims_[i];
  }
}

void Game::SetConstants(double mu, double lipschitz) {
  if (!(mu > 0.0)) throw InvalidArgument("game: mu must be positive");
  if (lipschitz < mu * (1.0 - 1e-12)) throw InvalidArgument("game: L must be >= mu");
  mu_ = mu;
  lipschitz_ = std::max(lipschitz, mu);
}

void Game::SetKnownNe(Eigen::VectorXd x_star) {
  if (x_star.size() != total_dim()) throw InvalidArgument("game: x* has the wrong dimension");
  const double res = GameMapping(*this, {x_star.data(), static_cast<size_t>(x_star.size())}).norm();
  if (res > 1e-9) {
    std::ostringstream msg;
    msg << "game: ||f(x*)|| = " << res << " exceeds 1e-9";
    throw InvalidArgument(msg.str());
  }
  known_ne_ = std::move(x_star);
}

void Game::SetAffine(const Eigen::MatrixXd& jac, Eigen::VectorXd b) {
  const int d = total_dim();
  if (jac.rows() != d || jac.cols() != d || b.size() != d) {
    throw InvalidArgument("game: affine form has the wrong dimension");
  }
  affine_ = AffineForm{jac.sparseView(0.0, 0.0), std::move(b)};
}

Eigen::VectorXd GameMapping(const Game& game, std::span<const double> x) {
  if (static_cast<int>(x.size()) != game.total_dim()) {
    throw InvalidArgument("game mapping: expected dimension " +
                          std::to_string(game.total_dim()));
  }
  Eigen::VectorXd f(game.total_dim());
  for (int i = 0; i < game.num_players(); ++i) {
    game.Grad(x, i, {f.data() + game.offset(i), static_cast<size_t>(game.dim(i))});
  }
  return f;
}

Eigen::MatrixXd AffineJacobian(const Game& game) {
  const int d = game.total_dim();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(d);
  const Eigen::VectorXd f0 = GameMapping(game, {x.data(), static_cast<size_t>(d)});
  Eigen::MatrixXd jac(d, d);
  for (int j = 0; j < d; ++j) {
    x[j] = 1.0;
    jac.col(j) = GameMapping(game, {x.data(), static_cast<size_t>(d)}) - f0;
    x[j] = 0.0;
  }
  return jac;
}

GameConstants AffineConstants(const Eigen::MatrixXd& jac, const std::vector<int>& dims) {
  GameConstants c;
  const Eigen::MatrixXd sym = 0.5 * (jac + jac.transpose());
  c.mu = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sym, Eigen::EigenvaluesOnly)
             .eigenvalues()
             .minCoeff();
  int off = 0;
  for (int di : dims) {
    const Eigen::MatrixXd block = jac.middleRows(off, di);
    const double sigma =
        Eigen::JacobiSVD<Eigen::MatrixXd>(block).singularValues()(0);
    c.L = std::max(c.L, sigma);
    off += di;
  }
  return c;
}

Game ConnectivityGame(int n) {
  if (n < 2) throw InvalidArgument("connectivity game: n must be at least 2");
  // Player i (1-based weight w = i+1 below) couples to S_i = {i+1}, S_n = {1}.
  auto grad = [n](std::span<const double> x, int i, std::span<double> out) {
    const double w = i + 1;
    const int j = (i + 1) % n;
    for (int c = 0; c < 2; ++c) {
      const double xi = x[2 * i + c];
      const double xj = x[2 * j + c];
      out[c] = 2.0 * w * xi + w + 2.0 * (xi - xj);
    }
  };
  auto cost = [n](std::span<const double> x, int i) {
    const double w = i + 1;
    const int j = (i + 1) % n;
    double v = w;
    for (int c = 0; c < 2; ++c) {
      const double xi = x[2 * i + c];
      const double diff = xi - x[2 * j + c];
      v += w * xi * xi + w * xi + diff * diff;
    }
    return v;
  };
  Game game("connectivity", std::vector<int>(n, 2), grad);
  game.SetCost(cost);
  const Eigen::MatrixXd jac = AffineJacobian(game);
  const GameConstants c = AffineConstants(jac, game.dims());
  game.SetConstants(c.mu, c.L);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(game.total_dim());
  game.SetAffine(jac, GameMapping(game, {zero.data(), static_cast<size_t>(zero.size())}));
  game.SetKnownNe(Eigen::VectorXd::Constant(2 * n, -0.5));
  return game;
}

Game LqGame(const Eigen::MatrixXd& m, const Eigen::VectorXd& b, std::vector<int> dims) {
  const Eigen::Index d = m.rows();
  if (d == 0 || m.cols() != d || b.size() != d) {
    throw InvalidArgument("lq game: M must be square and match b");
  }
  if (dims.empty()) dims.assign(static_cast<size_t>(d), 1);
  if (std::accumulate(dims.begin(), dims.end(), 0) != d) {
    throw InvalidArgument("lq game: block sizes do not sum to dim(M)");
  }
  const GameConstants c = AffineConstants(m, dims);
  if (!(c.mu > 0.0)) {
    std::ostringstream msg;
    msg << "lq game: mapping is not strongly monotone, lambda_min((M+M^T)/2) = " << c.mu;
    throw InvalidArgument(msg.str());
  }
  std::vector<int> offsets(dims.size() + 1, 0);
  for (size_t i = 0; i < dims.size(); ++i) offsets[i + 1] = offsets[i] + dims[i];

  // Row-major copy so each gradient entry is one contiguous dot product.
  using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  auto grad = [mr = RowMajorMatrix(m), b, offsets](std::span<const double> x, int i,
                                                  std::span<double> out) {
    const Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
    const int off = offsets[i];
    const int di = offsets[i + 1] - off;
    for (int r = 0; r < di; ++r) out[r] = mr.row(off + r).dot(xv) + b[off + r];
  };
  Game game("lq", dims, grad);
  game.SetAffine(m, b);

  // J_i(x) = 1/2 x_i' M_ii x_i + x_i' (sum_{j != i} M_ij x_j + b_i) has the
  // required partial gradient only when every diagonal block is symmetric.
  bool symmetric_blocks = true;
  for (size_t i = 0; i < dims.size(); ++i) {
    const auto blk = m.block(offsets[i], offsets[i], dims[i], dims[i]);
    if ((blk - blk.transpose()).cwiseAbs().maxCoeff() > 0.0) symmetric_blocks = false;
  }
  if (symmetric_blocks) {
    game.SetCost([m, b, offsets](std::span<const double> x, int i) {
      const Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
      const int off = offsets[i];
      const int di = offsets[i + 1] - off;
      const Eigen::VectorXd xi = xv.segment(off, di);
      const Eigen::VectorXd row = m.middleRows(off, di) * xv;
      const Eigen::VectorXd own = m.block(off, off, di, di) * xi;
      return 0.5 * xi.dot(own) + xi.dot(row - own + b.segment(off, di));
    });
  }
  game.SetConstants(c.mu, c.L);
  game.SetKnownNe(m.partialPivLu().solve(-b));
  return game;
}

ConstantEstimate EstimateConstants(const Game& game, int samples, double radius, Stream& rng) {
  if (samples < 2) throw InvalidArgument("estimate constants: samples must be >= 2");
  const int d = game.total_dim();
  ConstantEstimate est;
  est.mu_hat = std::numeric_limits<double>::infinity();
  Eigen::VectorXd x(d), y(d);
  for (int s = 0; s < samples; ++s) {
    for (int j = 0; j < d; ++j) {
      x[j] = rng.Uniform(-radius, radius);
      y[j] = rng.Uniform(-radius, radius);
    }
    const double dist2 = (x - y).squaredNorm();
    if (dist2 == 0.0) continue;
    const Eigen::VectorXd fx = GameMapping(game, {x.data(), static_cast<size_t>(d)});
    const Eigen::VectorXd fy = GameMapping(game, {y.data(), static_cast<size_t>(d)});
    const Eigen::VectorXd df = fx - fy;
    est.mu_hat = std::min(est.mu_hat, (x - y).dot(df) / dist2);
    const double dist = std::sqrt(dist2);
    for (int i = 0; i < game.num_players(); ++i) {
      est.L_hat = std::max(est.L_hat, df.segment(game.offset(i), game.dim(i)).norm() / dist);
    }
    ++est.pairs;
  }
  if (est.pairs == 0) est.mu_hat = 0.0;
  return est;
}

}  // namespace cdnes
