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

#include "cdnes/engine.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <string_view>

namespace cdnes {

void AlgoConfig::Validate() const {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw InvalidArgument("algo.eta must be positive");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw InvalidArgument("algo.gamma must lie in (0, 1]");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidArgument("algo.alpha must lie in (0, 1]");
  if (iterations < 0) throw InvalidArgument("algo.K must be >= 0");
  if (stop_tol && !(*stop_tol >= 0.0)) throw InvalidArgument("algo.stop_tol must be >= 0");
  if (!(divergence_limit > 0.0)) throw InvalidArgument("divergence limit must be positive");
}

bool AlphaWithinTheory(double alpha, const CompressionConstants& c) {
  return alpha > 0.0 && alpha * c.r <= 1.0 + 1e-12;
}

NetworkState InitWith(const MixingMatrix& mix, StateMatrix x0, std::optional<StateMatrix> h0) {
  if (x0.rows() != mix.n()) throw InvalidArgument("init: X0 must have one row per agent");
  NetworkState s;
  s.x = std::move(x0);
  s.h = h0 ? std::move(*h0) : StateMatrix::Zero(s.x.rows(), s.x.cols());
  if (s.h.rows() != s.x.rows() || s.h.cols() != s.x.cols()) {
    throw InvalidArgument("init: H0 must match the shape of X0");
  }
  s.hw = mix.w * s.h;
  return s;
}

NetworkState Init(const Game& game, const MixingMatrix& mix, const AlgoConfig& config) {
  if (game.num_players() != mix.n()) {
    throw InvalidArgument("init: game has " + std::to_string(game.num_players()) +
                          " players but the graph has " + std::to_string(mix.n()) + " agents");
  }
  const int n = mix.n();
  const int d = game.total_dim();
  StateMatrix x0(n, d);
  for (int i = 0; i < n; ++i) {
    Stream rng = Substream(config.seed, static_cast<uint64_t>(i), kInitStreamTag);
    for (int j = 0; j < d; ++j) x0(i, j) = rng.Uniform();
  }
  return InitWith(mix, std::move(x0));
}

namespace {

void LocalGradientsInto(const Game& game, const StateMatrix& x, StateMatrix& f) {
  f.setZero(x.rows(), x.cols());
  const size_t d = static_cast<size_t>(x.cols());
  if (const auto& affine = game.affine()) {
    const int* outer = affine->jac.outerIndexPtr();
    const int* cols = affine->jac.innerIndexPtr();
    const double* vals = affine->jac.valuePtr();
    for (int i = 0; i < game.num_players(); ++i) {
      const double* xi = x.row(i).data();
      double* fi = f.row(i).data();
      for (int r = game.offset(i); r < game.offset(i + 1); ++r) {
        double acc = 0.0;
        for (int p = outer[r]; p < outer[r + 1]; ++p) acc += vals[p] * xi[cols[p]];
        fi[r] = acc + affine->b[r];
      }
    }
    return;
  }
  for (int i = 0; i < game.num_players(); ++i) {
    game.Grad({x.row(i).data(), d}, i,
              {f.row(i).data() + game.offset(i), static_cast<size_t>(game.dim(i))});
  }
}

}  // namespace

StateMatrix LocalGradients(const Game& game, const StateMatrix& x) {
  StateMatrix f;
  LocalGradientsInto(game, x, f);
  return f;
}

Eigen::RowVectorXd AverageEstimate(const StateMatrix& x) { return x.colwise().mean(); }

namespace {

void CheckShapes(const NetworkState& state, const Game& game, const MixingMatrix& mix) {
  if (state.x.rows() != mix.n() || game.num_players() != mix.n() ||
      state.x.cols() != game.total_dim()) {
    throw InvalidArgument("step: state, game and mixing matrix dimensions disagree");
  }
}

void CheckFinite(const NetworkState& state, double limit) {
  const StateMatrix& x = state.x;
  if (x.size() == 0 || x.cwiseAbs().maxCoeff<Eigen::PropagateNaN>() <= limit) return;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const double v = x(i, j);
      if (!std::isfinite(v) || std::abs(v) > limit) {
        std::ostringstream msg;
        msg << "divergence at iteration " << state.k << ": agent " << (i + 1) << " entry "
            << (j + 1) << " = " << v << " (limit " << limit << ")";
        throw DivergenceError(msg.str(), state.k);
      }
    }
  }
}

int64_t MessagesPerRound(const MixingMatrix& mix, bool per_edge) {
  if (!per_edge) return mix.n();
  int64_t directed = 0;
  for (Eigen::Index i = 0; i < mix.w.rows(); ++i) {
    for (Eigen::Index j = 0; j < mix.w.cols(); ++j) {
      if (i != j && mix.w(i, j) > 0.0) ++directed;
    }
  }
  return directed;
}

void BindWorkspace(StepWorkspace& ws, const MixingMatrix& mix, const AlgoConfig& config) {
  if (ws.w_sparse.rows() != mix.w.rows()) ws.w_sparse = mix.w.sparseView(0.0, 0.0);
  if (ws.messages_per_round < 0 || ws.messages_per_edge != config.bits_per_edge) {
    ws.messages_per_round = MessagesPerRound(mix, config.bits_per_edge);
    ws.messages_per_edge = config.bits_per_edge;
  }
}

// out = W in, summing each agent's neighbours row by row.
void Mix(const StepWorkspace& ws, const StateMatrix& in, StateMatrix& out) {
  const Eigen::Index d = in.cols();
  out.resize(in.rows(), d);
  const int* outer = ws.w_sparse.outerIndexPtr();
  const int* cols = ws.w_sparse.innerIndexPtr();
  const double* vals = ws.w_sparse.valuePtr();
  const double* src = in.data();
  double* dst = out.data();
  for (Eigen::Index i = 0; i < in.rows(); ++i, dst += d) {
    std::fill(dst, dst + d, 0.0);
    for (int p = outer[i]; p < outer[i + 1]; ++p) {
      const double wij = vals[p];
      const double* row = src + cols[p] * d;
      for (Eigen::Index c = 0; c < d; ++c) dst[c] += wij * row[c];
    }
  }
}

// Shared by both updates so the identity compressor and the baseline
// produce bit-identical iterates.
// Returns false once any updated entry is non-finite or exceeds `limit`.
bool ConsensusGradientUpdate(StateMatrix& x, const StateMatrix& xhat_w, const StateMatrix& grads,
                             double gamma, double eta, double limit) {
  double* xp = x.data();
  const double* wp = xhat_w.data();
  const double* gp = grads.data();
  bool bounded = true;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    xp[j] -= gamma * (xp[j] - wp[j]) + eta * gp[j];
    bounded &= std::abs(xp[j]) <= limit;
  }
  return bounded;
}

}  // namespace

void Step(NetworkState& state, const Game& game, const MixingMatrix& mix,
          const CompressorSpec& compressor, const AlgoConfig& config, StepWorkspace& ws) {
  CheckShapes(state, game, mix);
  const Eigen::Index n = state.x.rows();
  const Eigen::Index d = state.x.cols();
  if (compressor.dim != d) {
    throw InvalidArgument("step: compressor dimension " + std::to_string(compressor.dim) +
                          " does not match D = " + std::to_string(d));
  }
  const double a = config.alpha;
  BindWorkspace(ws, mix, config);
  LocalGradientsInto(game, state.x, ws.grads);

  bool bounded = true;
  if (compressor.kind == CompressorKind::kIdentity) {
    // C(x - h) = x - h, so x-hat = h + q is x itself and x-hat_w = W x.
    Mix(ws, state.x, ws.wq);
    state.h = (1.0 - a) * state.h + a * state.x;
    state.hw = (1.0 - a) * state.hw + a * ws.wq;
    bounded = ConsensusGradientUpdate(state.x, ws.wq, ws.grads, config.gamma, config.eta,
                                      config.divergence_limit);
  } else {
    ws.diff.resize(n, d);
    ws.q.resize(n, d);
    for (Eigen::Index j = 0; j < ws.diff.size(); ++j) {
      ws.diff.data()[j] = state.x.data()[j] - state.h.data()[j];
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      Stream rng =
          Substream(config.seed, static_cast<uint64_t>(i), static_cast<uint64_t>(state.k));
      CompressInto(compressor, {ws.diff.row(i).data(), static_cast<size_t>(d)}, rng,
                   {ws.q.row(i).data(), static_cast<size_t>(d)});
    }
    Mix(ws, ws.q, ws.wq);
    double* x = state.x.data();
    double* h = state.h.data();
    double* hw = state.hw.data();
    const double* q = ws.q.data();
    const double* wq = ws.wq.data();
    const double* g = ws.grads.data();
    const double limit = config.divergence_limit;
    for (Eigen::Index j = 0; j < state.x.size(); ++j) {
      const double xhat = h[j] + q[j];
      const double xhat_w = hw[j] + wq[j];
      x[j] -= config.gamma * (xhat - xhat_w) + config.eta * g[j];
      h[j] = (1.0 - a) * h[j] + a * xhat;
      hw[j] = (1.0 - a) * hw[j] + a * xhat_w;
      bounded &= std::abs(x[j]) <= limit;
    }
  }

  state.cum_bits += ws.messages_per_round * BitCost(compressor);
  ++state.k;
  if (!bounded) CheckFinite(state, config.divergence_limit);
}

void Step(NetworkState& state, const Game& game, const MixingMatrix& mix,
          const CompressorSpec& compressor, const AlgoConfig& config) {
  StepWorkspace ws;
  Step(state, game, mix, compressor, config, ws);
}

void StepBaseline(NetworkState& state, const Game& game, const MixingMatrix& mix,
                  const AlgoConfig& config, StepWorkspace& ws) {
  CheckShapes(state, game, mix);
  BindWorkspace(ws, mix, config);
  LocalGradientsInto(game, state.x, ws.grads);
  Mix(ws, state.x, ws.wq);
  const bool bounded = ConsensusGradientUpdate(state.x, ws.wq, ws.grads, config.gamma,
                                               config.eta, config.divergence_limit);
  // No compression: the reference is the estimate itself.
  state.h = state.x;
  Mix(ws, state.h, state.hw);
  const int64_t d = state.x.cols();
  state.cum_bits += ws.messages_per_round * 32 * d;
  ++state.k;
  if (!bounded) CheckFinite(state, config.divergence_limit);
}

void StepBaseline(NetworkState& state, const Game& game, const MixingMatrix& mix,
                  const AlgoConfig& config) {
  StepWorkspace ws;
  StepBaseline(state, game, mix, config, ws);
}

void Advance(NetworkState& state, const Game& game, const MixingMatrix& mix,
             const CompressorSpec& compressor, const AlgoConfig& config, int64_t rounds) {
  compressor.Validate();
  StepWorkspace ws;
  for (int64_t r = 0; r < rounds; ++r) Step(state, game, mix, compressor, config, ws);
}

TraceRecord Measure(const NetworkState& state, const Game& game) {
  TraceRecord rec;
  rec.k = state.k;
  rec.cum_bits = state.cum_bits;
  const Eigen::RowVectorXd mean = AverageEstimate(state.x);
  rec.consensus_err = (state.x.rowwise() - mean).norm();
  rec.compress_err = (state.x - state.h).norm();
  rec.mapping_norm = LocalGradients(game, state.x).norm();
  if (game.known_ne()) {
    const Eigen::RowVectorXd xs = game.known_ne()->transpose();
    rec.residual = (state.x.rowwise() - xs).norm();
  }
  return rec;
}

namespace {

bool ShouldStop(const TraceRecord& rec, const AlgoConfig& config) {
  if (!config.stop_tol) return false;
  const double metric = rec.residual ? *rec.residual : rec.mapping_norm + rec.consensus_err;
  return metric <= *config.stop_tol;
}

template <typename StepFn>
Trace Drive(NetworkState state, const Game& game, const AlgoConfig& config,
            const StepObserver& observer, StepFn&& step, std::string label) {
  config.Validate();
  Trace trace;
  trace.label = std::move(label);
  trace.records.reserve(static_cast<size_t>(config.iterations) + 1);
  trace.records.push_back(Measure(state, game));
  for (int64_t it = 0; it < config.iterations; ++it) {
    if (ShouldStop(trace.records.back(), config)) break;
    std::optional<NetworkState> prev;
    if (observer) prev = state;
    try {
      step(state);
    } catch (const DivergenceError& err) {
      throw RunDivergence(err, std::move(trace));
    }
    if (observer) observer(*prev, state);
    trace.records.push_back(Measure(state, game));
  }
  return trace;
}

}  // namespace

Trace RunFrom(NetworkState state, const Game& game, const MixingMatrix& mix,
              const CompressorSpec& compressor, const AlgoConfig& config,
              const StepObserver& observer) {
  compressor.Validate();
  return Drive(
      std::move(state), game, config, observer,
      [&, ws = StepWorkspace{}](NetworkState& s) mutable {
        Step(s, game, mix, compressor, config, ws);
      },
      compressor.Name());
}

Trace Run(const Game& game, const MixingMatrix& mix, const CompressorSpec& compressor,
          const AlgoConfig& config, const StepObserver& observer) {
  config.Validate();
  return RunFrom(Init(game, mix, config), game, mix, compressor, config, observer);
}

Trace RunBaseline(const Game& game, const MixingMatrix& mix, const AlgoConfig& config,
                  const StepObserver& observer) {
  config.Validate();
  NetworkState state = Init(game, mix, config);
  state.h = state.x;
  state.hw = mix.w * state.h;
  return Drive(
      std::move(state), game, config, observer,
      [&, ws = StepWorkspace{}](NetworkState& s) mutable { StepBaseline(s, game, mix, config, ws); },
      "baseline");
}

void Trace::WriteCsv(std::ostream& os) const {
  os << kCsvHeader << '\n';
  char buf[40];
  auto num = [&buf](double v) -> std::string_view {
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return {buf, static_cast<size_t>(res.ptr - buf)};
  };
  for (const TraceRecord& r : records) {
    os << r.k << ',';
    if (r.residual) os << num(*r.residual);
    os << ',' << num(r.consensus_err);
    os << ',' << num(r.compress_err);
    os << ',' << num(r.mapping_norm);
    os << ',' << r.cum_bits << '\n';
  }
}

}  // namespace cdnes
