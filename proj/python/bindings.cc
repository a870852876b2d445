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

// Python module `cdnes._core`. Matrices cross the boundary as NumPy arrays;
// traces come back as column arrays so they drop straight into pandas.

#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "cdnes/certify.h"
#include "cdnes/compressors.h"
#include "cdnes/engine.h"
#include "cdnes/errors.h"
#include "cdnes/experiment.h"
#include "cdnes/games.h"
#include "cdnes/graph.h"
#include "cdnes/rng.h"

namespace py = pybind11;
using namespace cdnes;

namespace {

NormIndex ParseNorm(const std::string& q) {
  if (q == "inf") return NormIndex::kInf;
  if (q == "2") return NormIndex::kTwo;
  throw InvalidArgument("norm must be \"inf\" or \"2\", got \"" + q + "\"");
}

py::array_t<double> Column(const Trace& t, double (*get)(const TraceRecord&)) {
  py::array_t<double> out(static_cast<py::ssize_t>(t.records.size()));
  auto view = out.mutable_unchecked<1>();
  for (size_t i = 0; i < t.records.size(); ++i) view(i) = get(t.records[i]);
  return out;
}

py::array_t<int64_t> IntColumn(const Trace& t, int64_t (*get)(const TraceRecord&)) {
  py::array_t<int64_t> out(static_cast<py::ssize_t>(t.records.size()));
  auto view = out.mutable_unchecked<1>();
  for (size_t i = 0; i < t.records.size(); ++i) view(i) = get(t.records[i]);
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Compressed distributed Nash-equilibrium seeking: simulation and rate certificates.";

  auto base_error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<DivergenceError>(m, "DivergenceError", base_error.ptr());
  py::register_exception<InfeasibleError>(m, "InfeasibleError", base_error.ptr());

  py::class_<Topology>(m, "Topology")
      .def_readonly("n", &Topology::n)
      .def_readonly("edges", &Topology::edges)
      .def("__repr__", [](const Topology& t) {
        return "Topology(n=" + std::to_string(t.n) + ", edges=" + std::to_string(t.edges.size()) +
               ")";
      });
  m.def("path_graph", &PathGraph, py::arg("n"));
  m.def("ring_graph", &RingGraph, py::arg("n"));
  m.def("complete_graph", &CompleteGraph, py::arg("n"));
  m.def("random_connected_graph", &RandomConnectedGraph, py::arg("n"), py::arg("edge_prob"),
        py::arg("seed"));

  py::class_<MixingMatrix>(m, "MixingMatrix")
      .def_readonly("w", &MixingMatrix::w)
      .def_readonly("rho_w", &MixingMatrix::rho_w)
      .def_readonly("s", &MixingMatrix::s);
  m.def("max_degree_weights", &MaxDegreeWeights, py::arg("topology"));
  m.def("metropolis_weights", &MetropolisWeights, py::arg("topology"));

  py::class_<CompressorSpec>(m, "Compressor")
      .def_static("identity", &CompressorSpec::Identity, py::arg("d"))
      .def_static(
          "quantize",
          [](int d, int bits, const std::string& q) {
            return CompressorSpec::Quantize(d, bits, ParseNorm(q));
          },
          py::arg("d"), py::arg("bits") = 2, py::arg("q") = "inf")
      .def_static("topk", &CompressorSpec::TopK, py::arg("d"), py::arg("k"))
      .def_static(
          "normsign",
          [](int d, const std::string& q) { return CompressorSpec::NormSign(d, ParseNorm(q)); },
          py::arg("d"), py::arg("q") = "inf")
      .def_readonly("dim", &CompressorSpec::dim)
      .def_property_readonly("name", &CompressorSpec::Name)
      .def_property_readonly("bit_cost", [](const CompressorSpec& s) { return BitCost(s); })
      .def_property_readonly("constants",
                             [](const CompressorSpec& s) {
                               const CompressionConstants c = Constants(s);
                               py::dict out;
                               out["C"] = c.C;
                               out["r"] = c.r;
                               out["delta"] = c.delta;
                               return out;
                             })
      .def(
          "__call__",
          [](const CompressorSpec& s, const Eigen::VectorXd& x, uint64_t seed) {
            Stream rng(seed);
            return Compress(s, {x.data(), static_cast<size_t>(x.size())}, rng).payload;
          },
          py::arg("x"), py::arg("seed") = 1)
      .def("__repr__", [](const CompressorSpec& s) { return "Compressor(" + s.Name() + ")"; });

  py::class_<Game>(m, "Game")
      .def_property_readonly("name", &Game::name)
      .def_property_readonly("num_players", &Game::num_players)
      .def_property_readonly("total_dim", &Game::total_dim)
      .def_property_readonly("dims", &Game::dims)
      .def_property_readonly("mu", &Game::mu)
      .def_property_readonly("L", &Game::L)
      .def_property_readonly("known_ne", &Game::known_ne)
      .def(
          "mapping",
          [](const Game& g, const Eigen::VectorXd& x) {
            if (x.size() != g.total_dim()) {
              throw InvalidArgument("mapping: expected " + std::to_string(g.total_dim()) +
                                    " entries, got " + std::to_string(x.size()));
            }
            return GameMapping(g, {x.data(), static_cast<size_t>(x.size())});
          },
          py::arg("x"));
  m.def("connectivity_game", &ConnectivityGame, py::arg("n"));
  m.def("lq_game", &LqGame, py::arg("m"), py::arg("b"), py::arg("dims") = std::vector<int>{});

  py::class_<AlgoConfig>(m, "AlgoConfig")
      .def(py::init([](double eta, double gamma, double alpha, int64_t iterations, uint64_t seed,
                       std::optional<double> stop_tol, bool bits_per_edge) {
             AlgoConfig c;
             c.eta = eta;
             c.gamma = gamma;
             c.alpha = alpha;
             c.iterations = iterations;
             c.seed = seed;
             c.stop_tol = stop_tol;
             c.bits_per_edge = bits_per_edge;
             c.Validate();
             return c;
           }),
           py::arg("eta") = 0.01, py::arg("gamma") = 1.0, py::arg("alpha") = 1.0,
           py::arg("iterations") = 1000, py::arg("seed") = 1, py::arg("stop_tol") = py::none(),
           py::arg("bits_per_edge") = false)
      .def_readwrite("eta", &AlgoConfig::eta)
      .def_readwrite("gamma", &AlgoConfig::gamma)
      .def_readwrite("alpha", &AlgoConfig::alpha)
      .def_readwrite("iterations", &AlgoConfig::iterations)
      .def_readwrite("seed", &AlgoConfig::seed)
      .def_readwrite("stop_tol", &AlgoConfig::stop_tol)
      .def_readwrite("bits_per_edge", &AlgoConfig::bits_per_edge);

  // A missing residual (unknown equilibrium) becomes NaN.
  py::class_<Trace>(m, "Trace")
      .def_readonly("label", &Trace::label)
      .def("__len__", [](const Trace& t) { return t.records.size(); })
      .def_property_readonly("k", [](const Trace& t) {
        return IntColumn(t, [](const TraceRecord& r) { return r.k; });
      })
      .def_property_readonly("residual", [](const Trace& t) {
        return Column(t, [](const TraceRecord& r) {
          return r.residual.value_or(std::numeric_limits<double>::quiet_NaN());
        });
      })
      .def_property_readonly("consensus_err", [](const Trace& t) {
        return Column(t, [](const TraceRecord& r) { return r.consensus_err; });
      })
      .def_property_readonly("compress_err", [](const Trace& t) {
        return Column(t, [](const TraceRecord& r) { return r.compress_err; });
      })
      .def_property_readonly("mapping_norm", [](const Trace& t) {
        return Column(t, [](const TraceRecord& r) { return r.mapping_norm; });
      })
      .def_property_readonly("cum_bits", [](const Trace& t) {
        return IntColumn(t, [](const TraceRecord& r) { return r.cum_bits; });
      })
      .def("to_csv", [](const Trace& t) {
        std::ostringstream os;
        t.WriteCsv(os);
        return os.str();
      });

  m.def(
      "run",
      [](const Game& g, const MixingMatrix& mix, const CompressorSpec& c, const AlgoConfig& cfg) {
        py::gil_scoped_release release;
        return Run(g, mix, c, cfg);
      },
      py::arg("game"), py::arg("mixing"), py::arg("compressor"), py::arg("config"));
  m.def(
      "run_baseline",
      [](const Game& g, const MixingMatrix& mix, const AlgoConfig& cfg) {
        py::gil_scoped_release release;
        return RunBaseline(g, mix, cfg);
      },
      py::arg("game"), py::arg("mixing"), py::arg("config"));

  py::class_<RateCertificate>(m, "Certificate")
      .def_readonly("gamma", &RateCertificate::gamma)
      .def_readonly("eta", &RateCertificate::eta)
      .def_readonly("rho_bound", &RateCertificate::rho_bound)
      .def_readonly("rho_numeric", &RateCertificate::rho_numeric)
      .def_readonly("a", &RateCertificate::a)
      .def_readonly("eps", &RateCertificate::eps)
      .def_readonly("strategy", &RateCertificate::strategy)
      .def_readonly("closed_form_eta", &RateCertificate::closed_form_eta)
      .def("report", [](const RateCertificate& c) {
        std::ostringstream os;
        WriteReport(os, c);
        return os.str();
      });
  m.def(
      "certify",
      [](const Game& g, const MixingMatrix& mix, const CompressorSpec& c, double alpha,
         const std::string& norm, const std::string& strategy) {
        if (norm != "frobenius" && norm != "spectral") {
          throw InvalidArgument("norm must be \"frobenius\" or \"spectral\"");
        }
        if (strategy != "search" && strategy != "closed_form") {
          throw InvalidArgument("strategy must be \"search\" or \"closed_form\"");
        }
        const RateInputs in = MakeRateInputs(
            g, mix, Constants(c), alpha, norm == "spectral" ? IwNorm::kSpectral : IwNorm::kFrobenius);
        CertifyOptions opts;
        if (strategy == "closed_form") opts.strategy = CertifyStrategy::kClosedForm;
        return Certify(in, opts);
      },
      py::arg("game"), py::arg("mixing"), py::arg("compressor"), py::arg("alpha") = 1.0,
      py::arg("norm") = "frobenius", py::arg("strategy") = "search");

  m.def(
      "load_config",
      [](const std::filesystem::path& path) {
        const ExperimentConfig cfg = LoadConfig(path);
        Game game = BuildGame(cfg);
        const Topology topo = BuildTopology(cfg, game.num_players());
        MixingMatrix mix = BuildMixing(cfg, topo);
        std::optional<CompressorSpec> comp = BuildCompressor(cfg, game.total_dim());
        return py::make_tuple(std::move(game), std::move(mix), comp, cfg.algo);
      },
      py::arg("path"),
      "Returns (game, mixing, compressor or None for the baseline, config) from an INI file.");
}
