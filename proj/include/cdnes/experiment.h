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

#ifndef CDNES_EXPERIMENT_H_
#define CDNES_EXPERIMENT_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cdnes/certify.h"
#include "cdnes/compressors.h"
#include "cdnes/engine.h"
#include "cdnes/games.h"
#include "cdnes/graph.h"

namespace cdnes {

// Process exit codes of the command-line front end.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitDivergence = 3,
  kExitInfeasible = 4,
};

// Parsed INI configuration. Every key is optional; defaults reproduce the
// connectivity-control experiment with the uncompressed baseline.
struct ExperimentConfig {
  // [game]
  std::string game_kind = "connectivity";  // connectivity | lq
  std::optional<int> game_n;          // connectivity default 50
  std::filesystem::path matrix_file;  // lq: one row "M_i1 ... M_iD b_i" per line
  std::string inline_m;               // lq: "2,1;0,2", or "2I" for 2 times identity of size n
  std::string inline_b;               // lq: "-3,-4", default zero
  std::vector<int> dims;              // lq block sizes, default all 1

  // [graph]
  std::string graph_kind = "random";  // path | complete | ring | random | file
  int graph_n = 0;                    // 0: take the game's player count
  double edge_prob = 0.1;
  uint64_t graph_seed = 1;
  std::filesystem::path edge_file;
  std::string weights = "max_degree";  // max_degree | metropolis

  // [compressor]
  std::string compressor_kind = "baseline";  // baseline | identity | quantize | topk | normsign
  int bits = 2;
  int k = 1;
  NormIndex q = NormIndex::kInf;

  // [algo]
  AlgoConfig algo;
  bool enforce_alpha_bound = false;

  // [certify]
  IwNorm iw_norm = IwNorm::kFrobenius;
  CertifyStrategy strategy = CertifyStrategy::kSearch;

  // [sweep]
  std::string sweep_param;
  std::vector<double> sweep_values;
  double sweep_tol = 1e-3;

  // [output]
  std::filesystem::path trace_path = "trace.csv";
  std::filesystem::path report_path = "certificate.txt";
  std::filesystem::path summary_path = "sweep.csv";
};

// Throws InvalidArgument naming the offending key ("algo.eta") for unknown
// sections or keys, unparsable values and missing referenced files.
ExperimentConfig ParseConfig(std::istream& is, const std::filesystem::path& base_dir = {});
ExperimentConfig LoadConfig(const std::filesystem::path& path);

Game BuildGame(const ExperimentConfig& cfg);
Topology BuildTopology(const ExperimentConfig& cfg, int n_players);
MixingMatrix BuildMixing(const ExperimentConfig& cfg, const Topology& topo);
// Empty for the uncompressed baseline.
std::optional<CompressorSpec> BuildCompressor(const ExperimentConfig& cfg, int total_dim);

// First k with residual <= threshold, or nullopt.
std::optional<int64_t> FirstBelow(const Trace& trace, double threshold);
// cum_bits at FirstBelow, or nullopt.
std::optional<int64_t> BitsToResidual(const Trace& trace, double threshold);

// Least-squares fit of log(residual) against k on the decaying segment:
// from k = 0 up to the first record within a factor 10 of the smallest
// residual, which leaves out the round-off floor.
struct LogLinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  size_t begin = 0;
  size_t end = 0;  // one past the last record used
};
LogLinearFit FitLogResidual(const Trace& trace);

// The experiment behind the convergence and communication-cost figures:
// connectivity game with 50 players, eta = 0.01, gamma = alpha = 1, a
// random graph from `seed`, and four curves sharing X0.
struct FigureSettings {
  int n = 50;
  double edge_prob = 0.1;
  double eta = 0.01;
  double gamma = 1.0;
  double alpha = 1.0;
  int64_t iterations = 10000;
};

struct FigureCurve {
  std::string name;
  Trace trace;
  int64_t bits_per_iteration = 0;
  std::optional<std::string> divergence;  // set when the run blew up
};

std::vector<FigureCurve> RunFigureExperiment(uint64_t seed, const FigureSettings& settings = {});

// Command implementations. Each prints diagnostics to `err` and returns an
// ExitCode. `out_dir` overrides the directory of every output path.
int CmdRun(const std::filesystem::path& config, const std::optional<uint64_t>& seed,
           const std::optional<std::filesystem::path>& out_dir, std::ostream& err);
int CmdCertify(const std::filesystem::path& config,
               const std::optional<std::filesystem::path>& out_dir, std::ostream& out,
               std::ostream& err);
int CmdSweep(const std::filesystem::path& config, const std::optional<std::string>& param,
             const std::optional<std::vector<double>>& values, const std::optional<uint64_t>& seed,
             const std::optional<std::filesystem::path>& out_dir, std::ostream& err);
// Writes fig3_<curve>.csv (fig4_<curve>.csv) plus a summary into out_dir.
int CmdReproduceFig3(uint64_t seed, const std::filesystem::path& out_dir, std::ostream& err);
int CmdReproduceFig4(uint64_t seed, const std::filesystem::path& out_dir, std::ostream& err);

// Output directory from --out, then CDNES_OUT_DIR, else empty.
std::optional<std::filesystem::path> ResolveOutDir(const std::optional<std::filesystem::path>& flag);

}  // namespace cdnes

#endif  // CDNES_EXPERIMENT_H_
