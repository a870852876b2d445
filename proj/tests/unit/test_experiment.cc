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
#include <sstream>
#include <string>

#include <doctest.h>

#include "cdnes/errors.h"
#include "cdnes/experiment.h"
#include "test_util.h"

using namespace cdnes;

namespace {

ExperimentConfig Parse(const std::string& text) {
  std::istringstream is(text);
  return ParseConfig(is);
}

std::string ParseError(const std::string& text) {
  try {
    Parse(text);
  } catch (const InvalidArgument& e) {
    return e.what();
  }
  return "";
}

Trace Synthetic(double rate, double floor, int k) {
  Trace t;
  for (int i = 0; i <= k; ++i) {
    TraceRecord r;
    r.k = i;
    r.residual = std::max(std::exp(-rate * i), floor);
    r.cum_bits = 10 * i;
    t.records.push_back(r);
  }
  return t;
}

}  // namespace

TEST_CASE("config parsing") {
  const ExperimentConfig cfg = Parse(
      "# comment\n"
      "[game]\nkind = lq\nm = 2,1;0,2\nb = -3,-4\n\n"
      "[graph]\nkind = path\nweights = metropolis\n"
      "[compressor]\nkind = topk\nk = 1\n"
      "[algo]\neta = 0.05\ngamma = 0.5\nK = 10\nstop_tol = 1e-6\nbits_per_edge = true\n"
      "[certify]\nnorm = spectral\nstrategy = closed_form\n"
      "[sweep]\nparam = eta\nvalues = 0.1, 0.2\n");
  CHECK(cfg.game_kind == "lq");
  CHECK(cfg.weights == "metropolis");
  CHECK(cfg.compressor_kind == "topk");
  CHECK(cfg.algo.eta == 0.05);
  CHECK(cfg.algo.iterations == 10);
  CHECK(*cfg.algo.stop_tol == 1e-6);
  CHECK(cfg.algo.bits_per_edge);
  CHECK(cfg.iw_norm == IwNorm::kSpectral);
  CHECK(cfg.strategy == CertifyStrategy::kClosedForm);
  CHECK(cfg.sweep_values == std::vector<double>{0.1, 0.2});

  const Game g = BuildGame(cfg);
  CHECK(g.num_players() == 2);
  CHECK(g.known_ne()->isApprox(Eigen::Vector2d(0.5, 2.0)));
  const Topology topo = BuildTopology(cfg, g.num_players());
  CHECK(topo.edges.size() == 1);
  CHECK(BuildMixing(cfg, topo).s == doctest::Approx(1.0));
  CHECK(BuildCompressor(cfg, 2)->kind == CompressorKind::kTopK);
}

TEST_CASE("config errors name the offending key") {
  CHECK(ParseError("[algo]\neta = fast\n").find("algo.eta") != std::string::npos);
  CHECK(ParseError("[algo]\nspeed = 1\n").find("algo.speed") != std::string::npos);
  CHECK(ParseError("[nonsense]\nx = 1\n").find("[nonsense]") != std::string::npos);
  CHECK(ParseError("[compressor]\nkind = zip\n").find("compressor.kind") != std::string::npos);
  CHECK(ParseError("[compressor]\nq = 3\n").find("compressor.q") != std::string::npos);
  CHECK(ParseError("[algo]\nK = -1\n").find("algo.K") != std::string::npos);
  CHECK(ParseError("[game]\nkind = lq\n").find("game.m") != std::string::npos);
  CHECK(ParseError("[game]\nkind = lq\nmatrix_file = nowhere.txt\n").find("game.matrix_file") !=
        std::string::npos);
  CHECK(ParseError("eta = 1\n").find("outside a section") != std::string::npos);
  CHECK(ParseError("[graph]\nedge_prob = 1.5\n").find("graph.edge_prob") != std::string::npos);
}

TEST_CASE("bundled configs load") {
  const std::filesystem::path dir = CDNES_CONFIG_DIR;
  for (const char* name : {"figure_quantize.ini", "lq_path_baseline.ini", "certify_lq_quantize.ini",
                           "certify_lq_topk.ini", "certify_lq_normsign.ini", "sweep_eta.ini"}) {
    CAPTURE(name);
    const ExperimentConfig cfg = LoadConfig(dir / name);
    const Game g = BuildGame(cfg);
    CHECK_NOTHROW(BuildMixing(cfg, BuildTopology(cfg, g.num_players())));
  }
}

TEST_CASE("matrix files") {
  testing::TempDir tmp;
  testing::WriteFile(tmp / "m.txt", "# M | b\n2 1 -3\n0 2 -4\n");
  testing::WriteFile(tmp / "bad.txt", "2 1 -3\n0 2\n");
  testing::WriteFile(tmp / "a.ini", "[game]\nkind = lq\nmatrix_file = m.txt\n");
  testing::WriteFile(tmp / "b.ini", "[game]\nkind = lq\nmatrix_file = bad.txt\n");
  const Game g = BuildGame(LoadConfig(tmp / "a.ini"));
  CHECK(g.known_ne()->isApprox(Eigen::Vector2d(0.5, 2.0)));
  CHECK_THROWS_AS(BuildGame(LoadConfig(tmp / "b.ini")), InvalidArgument);
}

TEST_CASE("log-linear fit on synthetic residuals") {
  const LogLinearFit clean = FitLogResidual(Synthetic(0.01, 0.0, 500));
  CHECK(clean.slope == doctest::Approx(-0.01).epsilon(1e-9));
  CHECK(clean.intercept == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(clean.r2 == doctest::Approx(1.0));
  // Ends at the first record within 10x of the smallest residual exp(-5).
  CHECK(clean.end == 271);

  // A floor at exp(-3): the fit stops at the first record within 10x of it.
  const Trace floored = Synthetic(0.01, std::exp(-3.0), 1000);
  const LogLinearFit fit = FitLogResidual(floored);
  CHECK(fit.slope == doctest::Approx(-0.01).epsilon(1e-9));
  const double cut = std::log(10.0) / 0.01;
  CHECK(fit.end == static_cast<size_t>(std::ceil(300.0 - cut)) + 1);
}

TEST_CASE("first-below and bits-to-residual") {
  const Trace t = Synthetic(0.1, 0.0, 100);
  CHECK(*FirstBelow(t, std::exp(-2.05)) == 21);
  CHECK(*BitsToResidual(t, std::exp(-2.05)) == 210);
  CHECK_FALSE(FirstBelow(t, 1e-20).has_value());
}
