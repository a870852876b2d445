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

#ifndef CDNES_ENGINE_H_
#define CDNES_ENGINE_H_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "cdnes/compressors.h"
#include "cdnes/errors.h"
#include "cdnes/games.h"
#include "cdnes/graph.h"

namespace cdnes {

// One row per agent; row i is agent i's estimate of the joint action.
using StateMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct AlgoConfig {
  double eta = 0.01;    // gradient step-size
  double gamma = 1.0;   // consensus step-size, (0, 1]
  double alpha = 1.0;   // reference-tracking rate, (0, 1]
  int64_t iterations = 1000;
  uint64_t seed = 1;
  std::optional<double> stop_tol;
  // Count one message per directed edge instead of one broadcast per agent.
  bool bits_per_edge = false;
  double divergence_limit = 1e12;

  void Validate() const;
};

// True when alpha <= 1/r, the range covered by the rate analysis.
bool AlphaWithinTheory(double alpha, const CompressionConstants& c);

struct NetworkState {
  StateMatrix x;   // estimates
  StateMatrix h;   // compression references
  StateMatrix hw;  // W-weighted references, equal to W h
  int64_t k = 0;
  int64_t cum_bits = 0;
};

// X0 uniform in [0, 1] from the seed, H0 = 0, Hw0 = W H0.
NetworkState Init(const Game& game, const MixingMatrix& mix, const AlgoConfig& config);
// Explicit X0 and H0 (H0 defaults to zero).
NetworkState InitWith(const MixingMatrix& mix, StateMatrix x0,
                      std::optional<StateMatrix> h0 = std::nullopt);

// Row i holds grad_i J_i(x_(i)) in player i's block and zeros elsewhere.
StateMatrix LocalGradients(const Game& game, const StateMatrix& x);

// Column means of X, i.e. the average estimate.
Eigen::RowVectorXd AverageEstimate(const StateMatrix& x);

// One synchronous round of compressed NE seeking. Agent i compresses
// x_(i) - h_i with its own (seed, i, k) substream. With the identity
// compressor the reconstruction x-hat equals x exactly and the round
// reduces to the uncompressed update.
void Step(NetworkState& state, const Game& game, const MixingMatrix& mix,
          const CompressorSpec& compressor, const AlgoConfig& config);

// One uncompressed round: X <- X - gamma (I - W) X - eta F(X).
void StepBaseline(NetworkState& state, const Game& game, const MixingMatrix& mix,
                  const AlgoConfig& config);

// Scratch matrices reused across rounds to keep allocation out of the loop.
// The first step binds the workspace to its mixing matrix: a sparse copy of
// W and the per-round message count are cached, so one workspace must not be
// shared between different mixing matrices.
struct StepWorkspace {
  StateMatrix grads;
  StateMatrix diff;
  StateMatrix q;
  StateMatrix wq;
  Eigen::SparseMatrix<double, Eigen::RowMajor> w_sparse;
  int64_t messages_per_round = -1;
  bool messages_per_edge = false;
};

void Step(NetworkState& state, const Game& game, const MixingMatrix& mix,
          const CompressorSpec& compressor, const AlgoConfig& config, StepWorkspace& ws);
void StepBaseline(NetworkState& state, const Game& game, const MixingMatrix& mix,
                  const AlgoConfig& config, StepWorkspace& ws);

// Runs `rounds` rounds of Step without recording a trace, for long runs
// where only the end state matters.
void Advance(NetworkState& state, const Game& game, const MixingMatrix& mix,
             const CompressorSpec& compressor, const AlgoConfig& config, int64_t rounds);

struct TraceRecord {
  int64_t k = 0;
  std::optional<double> residual;  // ||X - 1 x*'||_F, when x* is known
  double consensus_err = 0.0;      // ||X - 1 xbar'||_F
  double compress_err = 0.0;       // ||X - H||_F
  double mapping_norm = 0.0;       // ||F(X)||_F
  int64_t cum_bits = 0;
};

struct Trace {
  std::string label;
  std::vector<TraceRecord> records;

  void WriteCsv(std::ostream& os) const;
  static constexpr const char* kCsvHeader =
      "k,residual,consensus_err,compress_err,mapping_norm,cum_bits";
};

TraceRecord Measure(const NetworkState& state, const Game& game);

// Called after every round with the states before and after it.
using StepObserver = std::function<void(const NetworkState& prev, const NetworkState& next)>;

// Divergence during a run; carries the trace up to the last finite round.
class RunDivergence : public DivergenceError {
 public:
  RunDivergence(const DivergenceError& err, Trace partial)
      : DivergenceError(err), partial_(std::move(partial)) {}
  const Trace& partial_trace() const { return partial_; }

 private:
  Trace partial_;
};

// Runs `config.iterations` rounds from Init(...), or until the stop metric
// falls to stop_tol. The stop metric is the residual when x* is known and
// mapping_norm + consensus_err otherwise. Throws RunDivergence.
Trace Run(const Game& game, const MixingMatrix& mix, const CompressorSpec& compressor,
          const AlgoConfig& config, const StepObserver& observer = {});
Trace RunFrom(NetworkState state, const Game& game, const MixingMatrix& mix,
              const CompressorSpec& compressor, const AlgoConfig& config,
              const StepObserver& observer = {});

// Uncompressed baseline; each agent sends 32 D bits per round.
Trace RunBaseline(const Game& game, const MixingMatrix& mix, const AlgoConfig& config,
                  const StepObserver& observer = {});

}  // namespace cdnes

#endif  // CDNES_ENGINE_H_
