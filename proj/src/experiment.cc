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

#include "cdnes/experiment.h"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "cdnes/errors.h"

namespace cdnes {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& KnownKeys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"game", {"kind", "n", "matrix_file", "m", "b", "dims"}},
      {"graph", {"kind", "n", "edge_prob", "seed", "edge_file", "weights"}},
      {"compressor", {"kind", "bits", "k", "q"}},
      {"algo",
       {"eta", "gamma", "alpha", "K", "seed", "stop_tol", "bits_per_edge", "enforce_alpha_bound"}},
      {"certify", {"norm", "strategy"}},
      {"sweep", {"param", "values", "tol"}},
      {"output", {"trace", "report", "summary"}},
  };
  return keys;
}

std::string Trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> Split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) parts.push_back(Trim(cur));
  return parts;
}

double ParseDouble(const std::string& text, const std::string& key) {
  const std::string t = Trim(text);
  double v = 0.0;
  const char* end = t.data() + t.size();
  auto [ptr, ec] = std::from_chars(t.data(), end, v);
  if (ec != std::errc() || ptr != end || t.empty()) {
    throw InvalidArgument("config: " + key + " = '" + text + "' is not a number");
  }
  return v;
}

long long ParseInt(const std::string& text, const std::string& key) {
  const std::string t = Trim(text);
  long long v = 0;
  const char* end = t.data() + t.size();
  auto [ptr, ec] = std::from_chars(t.data(), end, v);
  if (ec != std::errc() || ptr != end || t.empty()) {
    throw InvalidArgument("config: " + key + " = '" + text + "' is not an integer");
  }
  return v;
}

uint64_t ParseSeed(const std::string& text, const std::string& key) {
  const std::string t = Trim(text);
  uint64_t v = 0;
  const char* end = t.data() + t.size();
  auto [ptr, ec] = std::from_chars(t.data(), end, v);
  if (ec != std::errc() || ptr != end || t.empty()) {
    throw InvalidArgument("config: " + key + " = '" + text + "' is not a nonnegative integer");
  }
  return v;
}

bool ParseBool(const std::string& text, const std::string& key) {
  const std::string t = Trim(text);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw InvalidArgument("config: " + key + " = '" + text + "' is not a boolean");
}

NormIndex ParseNorm(const std::string& text, const std::string& key) {
  const std::string t = Trim(text);
  if (t == "inf" || t == "infinity") return NormIndex::kInf;
  if (t == "2") return NormIndex::kTwo;
  throw InvalidArgument("config: " + key + " = '" + text + "' must be 2 or inf");
}

std::vector<double> ParseList(const std::string& text, const std::string& key) {
  std::vector<double> out;
  for (const std::string& part : Split(text, ',')) {
    if (!part.empty()) out.push_back(ParseDouble(part, key));
  }
  return out;
}

std::string OneOf(const std::string& text, const std::string& key,
                  std::initializer_list<const char*> options) {
  const std::string t = Trim(text);
  std::string list;
  for (const char* o : options) {
    if (t == o) return t;
    list += (list.empty() ? "" : "|") + std::string(o);
  }
  throw InvalidArgument("config: " + key + " = '" + text + "' must be one of " + list);
}

fs::path InputPath(const std::string& text, const fs::path& base_dir, const std::string& key) {
  fs::path p = Trim(text);
  if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
  if (!fs::exists(p)) throw InvalidArgument("config: " + key + " refers to missing file " + p.string());
  return p;
}

Eigen::MatrixXd ParseInlineMatrix(const std::string& text, int n_hint, const std::string& key) {
  const std::string t = Trim(text);
  if (!t.empty() && t.back() == 'I') {
    if (n_hint <= 0) throw InvalidArgument("config: " + key + " = '" + t + "' needs game.n");
    const double c = ParseDouble(t.substr(0, t.size() - 1), key);
    return c * Eigen::MatrixXd::Identity(n_hint, n_hint);
  }
  std::vector<std::vector<double>> rows;
  for (const std::string& row : Split(t, ';')) rows.push_back(ParseList(row, key));
  const size_t d = rows.size();
  Eigen::MatrixXd m(d, d);
  for (size_t i = 0; i < d; ++i) {
    if (rows[i].size() != d) throw InvalidArgument("config: " + key + " must be a square matrix");
    for (size_t j = 0; j < d; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

void ReadMatrixFile(const fs::path& path, Eigen::MatrixXd& m, Eigen::VectorXd& b) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("config: game.matrix_file cannot be opened: " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    std::vector<double> row;
    std::string tok;
    while (ls >> tok) row.push_back(ParseDouble(tok, "game.matrix_file"));
    if (!row.empty()) rows.push_back(std::move(row));
  }
  const size_t d = rows.size();
  if (d == 0) throw InvalidArgument("config: game.matrix_file is empty");
  m.resize(d, d);
  b.resize(d);
  for (size_t i = 0; i < d; ++i) {
    if (rows[i].size() != d + 1) {
      throw InvalidArgument("config: game.matrix_file row " + std::to_string(i + 1) + " has " +
                            std::to_string(rows[i].size()) + " entries, expected " +
                            std::to_string(d + 1));
    }
    for (size_t j = 0; j < d; ++j) m(i, j) = rows[i][j];
    b(i) = rows[i][d];
  }
}

fs::path OutputPath(const fs::path& configured, const std::optional<fs::path>& out_dir) {
  if (!out_dir) return configured;
  return *out_dir / configured.filename();
}

// Writes through a temporary file so a failed command never leaves a
// truncated output behind.
void WriteFileAtomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidArgument("cannot write " + path.string());
    out << content;
    if (!out) throw InvalidArgument("cannot write " + path.string());
  }
  fs::rename(tmp, path);
}

std::string TraceCsv(const Trace& trace) {
  std::ostringstream os;
  trace.WriteCsv(os);
  return os.str();
}

// Shortest text that reads back to the same double.
std::string Num(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

template <typename T>
std::string OptNum(const std::optional<T>& v) {
  if (!v) return "";
  if constexpr (std::is_floating_point_v<T>) {
    return Num(*v);
  } else {
    return std::to_string(*v);
  }
}

// Runs `fn(i)` for i in [0, count) on up to hardware_concurrency threads.
template <typename Fn>
void ParallelFor(size_t count, Fn&& fn) {
  const size_t workers =
      std::min<size_t>(count, std::max(1u, std::thread::hardware_concurrency()));
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (size_t i = next++; i < count; i = next++) fn(i);
    });
  }
  for (std::thread& t : pool) t.join();
}

}  // namespace

ExperimentConfig ParseConfig(std::istream& is, const fs::path& base_dir) {
  pt::ptree tree;
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw InvalidArgument("config: " + std::string(e.what()));
  }
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw InvalidArgument("config: key '" + section + "' appears outside a section");
    }
    const auto known = KnownKeys().find(section);
    if (known == KnownKeys().end()) {
      throw InvalidArgument("config: unknown section [" + section + "]");
    }
    for (const auto& [key, value] : body) {
      if (!known->second.count(key)) {
        throw InvalidArgument("config: unknown key " + section + "." + key);
      }
    }
  }

  ExperimentConfig cfg;
  auto get = [&tree](const std::string& path) -> std::optional<std::string> {
    if (auto v = tree.get_optional<std::string>(pt::ptree::path_type(path, '.'))) return *v;
    return std::nullopt;
  };

  if (auto v = get("game.kind")) cfg.game_kind = OneOf(*v, "game.kind", {"connectivity", "lq"});
  if (auto v = get("game.n")) cfg.game_n = static_cast<int>(ParseInt(*v, "game.n"));
  if (auto v = get("game.matrix_file")) cfg.matrix_file = InputPath(*v, base_dir, "game.matrix_file");
  if (auto v = get("game.m")) cfg.inline_m = Trim(*v);
  if (auto v = get("game.b")) cfg.inline_b = Trim(*v);
  if (auto v = get("game.dims")) {
    for (double d : ParseList(*v, "game.dims")) cfg.dims.push_back(static_cast<int>(d));
  }

  if (auto v = get("graph.kind")) {
    cfg.graph_kind = OneOf(*v, "graph.kind", {"path", "complete", "ring", "random", "file"});
  }
  if (auto v = get("graph.n")) cfg.graph_n = static_cast<int>(ParseInt(*v, "graph.n"));
  if (auto v = get("graph.edge_prob")) cfg.edge_prob = ParseDouble(*v, "graph.edge_prob");
  if (auto v = get("graph.seed")) cfg.graph_seed = ParseSeed(*v, "graph.seed");
  if (auto v = get("graph.edge_file")) cfg.edge_file = InputPath(*v, base_dir, "graph.edge_file");
  if (auto v = get("graph.weights")) {
    cfg.weights = OneOf(*v, "graph.weights", {"max_degree", "metropolis"});
  }

  if (auto v = get("compressor.kind")) {
    cfg.compressor_kind =
        OneOf(*v, "compressor.kind", {"baseline", "identity", "quantize", "topk", "normsign"});
  }
  if (auto v = get("compressor.bits")) cfg.bits = static_cast<int>(ParseInt(*v, "compressor.bits"));
  if (auto v = get("compressor.k")) cfg.k = static_cast<int>(ParseInt(*v, "compressor.k"));
  if (auto v = get("compressor.q")) cfg.q = ParseNorm(*v, "compressor.q");

  if (auto v = get("algo.eta")) cfg.algo.eta = ParseDouble(*v, "algo.eta");
  if (auto v = get("algo.gamma")) cfg.algo.gamma = ParseDouble(*v, "algo.gamma");
  if (auto v = get("algo.alpha")) cfg.algo.alpha = ParseDouble(*v, "algo.alpha");
  if (auto v = get("algo.K")) cfg.algo.iterations = ParseInt(*v, "algo.K");
  if (auto v = get("algo.seed")) cfg.algo.seed = ParseSeed(*v, "algo.seed");
  if (auto v = get("algo.stop_tol")) cfg.algo.stop_tol = ParseDouble(*v, "algo.stop_tol");
  if (auto v = get("algo.bits_per_edge")) cfg.algo.bits_per_edge = ParseBool(*v, "algo.bits_per_edge");
  if (auto v = get("algo.enforce_alpha_bound")) {
    cfg.enforce_alpha_bound = ParseBool(*v, "algo.enforce_alpha_bound");
  }

  if (auto v = get("certify.norm")) {
    cfg.iw_norm = OneOf(*v, "certify.norm", {"frobenius", "spectral"}) == "frobenius"
                      ? IwNorm::kFrobenius
                      : IwNorm::kSpectral;
  }
  if (auto v = get("certify.strategy")) {
    cfg.strategy = OneOf(*v, "certify.strategy", {"closed_form", "search"}) == "search"
                       ? CertifyStrategy::kSearch
                       : CertifyStrategy::kClosedForm;
  }

  if (auto v = get("sweep.param")) {
    cfg.sweep_param = OneOf(*v, "sweep.param", {"eta", "gamma", "alpha", "bits", "k"});
  }
  if (auto v = get("sweep.values")) cfg.sweep_values = ParseList(*v, "sweep.values");
  if (auto v = get("sweep.tol")) cfg.sweep_tol = ParseDouble(*v, "sweep.tol");

  if (auto v = get("output.trace")) cfg.trace_path = Trim(*v);
  if (auto v = get("output.report")) cfg.report_path = Trim(*v);
  if (auto v = get("output.summary")) cfg.summary_path = Trim(*v);

  if (cfg.game_kind == "lq" && cfg.matrix_file.empty() && cfg.inline_m.empty()) {
    throw InvalidArgument("config: game.kind = lq requires game.matrix_file or game.m");
  }
  if (cfg.graph_kind == "file" && cfg.edge_file.empty()) {
    throw InvalidArgument("config: graph.kind = file requires graph.edge_file");
  }
  if (!(cfg.edge_prob > 0.0 && cfg.edge_prob <= 1.0)) {
    throw InvalidArgument("config: graph.edge_prob must lie in (0, 1]");
  }
  try {
    cfg.algo.Validate();
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
  return cfg;
}

ExperimentConfig LoadConfig(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("config: cannot open " + path.string());
  return ParseConfig(in, path.parent_path());
}

Game BuildGame(const ExperimentConfig& cfg) {
  if (cfg.game_kind == "connectivity") {
    const int n = cfg.game_n.value_or(50);
    if (n < 2) throw InvalidArgument("config: game.n must be >= 2");
    return ConnectivityGame(n);
  }
  Eigen::MatrixXd m;
  Eigen::VectorXd b;
  if (!cfg.matrix_file.empty()) {
    ReadMatrixFile(cfg.matrix_file, m, b);
  } else {
    int hint = cfg.game_n.value_or(0);
    if (!cfg.dims.empty()) {
      hint = 0;
      for (int d : cfg.dims) hint += d;
    }
    m = ParseInlineMatrix(cfg.inline_m, hint, "game.m");
    if (cfg.inline_b.empty()) {
      b = Eigen::VectorXd::Zero(m.rows());
    } else {
      const std::vector<double> bv = ParseList(cfg.inline_b, "game.b");
      if (static_cast<Eigen::Index>(bv.size()) != m.rows()) {
        throw InvalidArgument("config: game.b has " + std::to_string(bv.size()) +
                              " entries, expected " + std::to_string(m.rows()));
      }
      b = Eigen::Map<const Eigen::VectorXd>(bv.data(), static_cast<Eigen::Index>(bv.size()));
    }
  }
  Game game = LqGame(m, b, cfg.dims);
  if (cfg.game_n && *cfg.game_n != game.num_players()) {
    throw InvalidArgument("config: game.n = " + std::to_string(*cfg.game_n) + " but the matrix has " +
                          std::to_string(game.num_players()) + " players");
  }
  return game;
}

Topology BuildTopology(const ExperimentConfig& cfg, int n_players) {
  const int n = cfg.graph_n > 0 ? cfg.graph_n : n_players;
  if (n != n_players) {
    throw InvalidArgument("config: graph.n = " + std::to_string(n) + " but the game has " +
                          std::to_string(n_players) + " players");
  }
  Topology topo;
  if (cfg.graph_kind == "path") {
    topo = PathGraph(n);
  } else if (cfg.graph_kind == "complete") {
    topo = CompleteGraph(n);
  } else if (cfg.graph_kind == "ring") {
    topo = RingGraph(n);
  } else if (cfg.graph_kind == "random") {
    topo = RandomConnectedGraph(n, cfg.edge_prob, cfg.graph_seed);
  } else {
    std::ifstream in(cfg.edge_file);
    if (!in) throw InvalidArgument("config: cannot open graph.edge_file " + cfg.edge_file.string());
    topo = ReadEdgeList(in, n);
  }
  Validate(topo);
  return topo;
}

MixingMatrix BuildMixing(const ExperimentConfig& cfg, const Topology& topo) {
  MixingMatrix mix = cfg.weights == "metropolis" ? MetropolisWeights(topo) : MaxDegreeWeights(topo);
  ValidateMixing(mix, topo);
  return mix;
}

std::optional<CompressorSpec> BuildCompressor(const ExperimentConfig& cfg, int total_dim) {
  CompressorSpec spec;
  if (cfg.compressor_kind == "baseline") return std::nullopt;
  if (cfg.compressor_kind == "identity") {
    spec = CompressorSpec::Identity(total_dim);
  } else if (cfg.compressor_kind == "quantize") {
    spec = CompressorSpec::Quantize(total_dim, cfg.bits, cfg.q);
  } else if (cfg.compressor_kind == "topk") {
    spec = CompressorSpec::TopK(total_dim, cfg.k);
  } else {
    spec = CompressorSpec::NormSign(total_dim, cfg.q);
  }
  spec.Validate();
  return spec;
}

std::optional<int64_t> FirstBelow(const Trace& trace, double threshold) {
  for (const TraceRecord& r : trace.records) {
    if (r.residual && *r.residual <= threshold) return r.k;
  }
  return std::nullopt;
}

std::optional<int64_t> BitsToResidual(const Trace& trace, double threshold) {
  for (const TraceRecord& r : trace.records) {
    if (r.residual && *r.residual <= threshold) return r.cum_bits;
  }
  return std::nullopt;
}

LogLinearFit FitLogResidual(const Trace& trace) {
  LogLinearFit fit;
  double min_res = std::numeric_limits<double>::infinity();
  for (const TraceRecord& r : trace.records) {
    if (r.residual && *r.residual > 0.0) min_res = std::min(min_res, *r.residual);
  }
  if (!std::isfinite(min_res)) return fit;
  size_t end = 0;
  while (end < trace.records.size()) {
    const auto& res = trace.records[end].residual;
    if (!res || !(*res > 0.0)) break;
    ++end;
    if (*res <= 10.0 * min_res) break;
  }
  fit.end = end;
  if (end < 2) return fit;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(end);
  for (size_t i = 0; i < end; ++i) {
    const double x = static_cast<double>(trace.records[i].k);
    const double y = std::log(*trace.records[i].residual);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = m * sxx - sx * sx;
  fit.slope = (m * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / m;
  double ss_tot = 0, ss_res = 0;
  const double ybar = sy / m;
  for (size_t i = 0; i < end; ++i) {
    const double x = static_cast<double>(trace.records[i].k);
    const double y = std::log(*trace.records[i].residual);
    ss_tot += (y - ybar) * (y - ybar);
    const double e = y - (fit.intercept + fit.slope * x);
    ss_res += e * e;
  }
  fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

std::vector<FigureCurve> RunFigureExperiment(uint64_t seed, const FigureSettings& settings) {
  const Game game = ConnectivityGame(settings.n);
  const Topology topo = RandomConnectedGraph(settings.n, settings.edge_prob, seed);
  const MixingMatrix mix = MaxDegreeWeights(topo);
  ValidateMixing(mix, topo);
  AlgoConfig algo;
  algo.eta = settings.eta;
  algo.gamma = settings.gamma;
  algo.alpha = settings.alpha;
  algo.iterations = settings.iterations;
  algo.seed = seed;

  const int d = game.total_dim();
  const std::vector<std::optional<CompressorSpec>> specs = {
      std::nullopt,
      CompressorSpec::Quantize(d, 2, NormIndex::kInf),
      CompressorSpec::TopK(d, 1),
      CompressorSpec::NormSign(d, NormIndex::kInf),
  };
  std::vector<FigureCurve> curves(specs.size());
  ParallelFor(specs.size(), [&](size_t i) {
    FigureCurve& curve = curves[i];
    const auto& spec = specs[i];
    curve.name = spec ? spec->Name() : "baseline";
    curve.bits_per_iteration = settings.n * (spec ? BitCost(*spec) : int64_t{32} * d);
    try {
      curve.trace = spec ? Run(game, mix, *spec, algo) : RunBaseline(game, mix, algo);
    } catch (const RunDivergence& e) {
      curve.trace = e.partial_trace();
      curve.divergence = e.what();
    }
  });
  return curves;
}

std::optional<fs::path> ResolveOutDir(const std::optional<fs::path>& flag) {
  if (flag) return flag;
  if (const char* env = std::getenv("CDNES_OUT_DIR"); env && *env) return fs::path(env);
  return std::nullopt;
}

int CmdRun(const fs::path& config, const std::optional<uint64_t>& seed,
           const std::optional<fs::path>& out_dir, std::ostream& err) {
  try {
    ExperimentConfig cfg = LoadConfig(config);
    if (seed) cfg.algo.seed = *seed;
    const Game game = BuildGame(cfg);
    const Topology topo = BuildTopology(cfg, game.num_players());
    const MixingMatrix mix = BuildMixing(cfg, topo);
    const auto spec = BuildCompressor(cfg, game.total_dim());
    if (spec && !AlphaWithinTheory(cfg.algo.alpha, Constants(*spec))) {
      const std::string msg = "algo.alpha = " + Num(cfg.algo.alpha) + " exceeds 1/r = " +
                              Num(1.0 / Constants(*spec).r) + " for " + spec->Name();
      if (cfg.enforce_alpha_bound) throw InvalidArgument("config: " + msg);
      err << "warning: " << msg << "; the rate analysis does not cover this run\n";
    }
    const Trace trace = spec ? Run(game, mix, *spec, cfg.algo) : RunBaseline(game, mix, cfg.algo);
    WriteFileAtomic(OutputPath(cfg.trace_path, out_dir), TraceCsv(trace));
    return kExitOk;
  } catch (const RunDivergence& e) {
    err << "error: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const InfeasibleError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

int CmdCertify(const fs::path& config, const std::optional<fs::path>& out_dir, std::ostream& out,
               std::ostream& err) {
  ExperimentConfig cfg;
  MixingMatrix mix;
  RateInputs inputs;
  try {
    cfg = LoadConfig(config);
    const Game game = BuildGame(cfg);
    const Topology topo = BuildTopology(cfg, game.num_players());
    mix = BuildMixing(cfg, topo);
    const auto spec = BuildCompressor(cfg, game.total_dim());
    const CompressorSpec used = spec ? *spec : CompressorSpec::Identity(game.total_dim());
    inputs = MakeRateInputs(game, mix, Constants(used), cfg.algo.alpha, cfg.iw_norm);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  const fs::path report_path = OutputPath(cfg.report_path, out_dir);
  try {
    CertifyOptions opts;
    opts.strategy = cfg.strategy;
    const RateCertificate cert = Certify(inputs, opts);
    std::ostringstream report;
    WriteReport(report, cert);
    WriteFileAtomic(report_path, report.str());
    out << report.str();
    return kExitOk;
  } catch (const InfeasibleError& e) {
    std::ostringstream report;
    report << "# rate certificate\nstatus: infeasible\nreason: " << e.what() << "\n";
    WriteFileAtomic(report_path, report.str());
    err << "error: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

namespace {

struct SweepRow {
  double value = 0.0;
  std::string status;
  int64_t iterations = 0;
  std::optional<double> final_residual;
  std::optional<int64_t> iterations_to_tol;
  std::optional<int64_t> bits_to_tol;
  int64_t total_bits = 0;
  std::string message;
};

SweepRow SweepOne(ExperimentConfig cfg, const std::string& param, double value) {
  SweepRow row;
  row.value = value;
  try {
    if (param == "eta") {
      cfg.algo.eta = value;
    } else if (param == "gamma") {
      cfg.algo.gamma = value;
    } else if (param == "alpha") {
      cfg.algo.alpha = value;
    } else if (param == "bits") {
      cfg.bits = static_cast<int>(value);
    } else {
      cfg.k = static_cast<int>(value);
    }
    cfg.algo.Validate();
    const Game game = BuildGame(cfg);
    const Topology topo = BuildTopology(cfg, game.num_players());
    const MixingMatrix mix = BuildMixing(cfg, topo);
    const auto spec = BuildCompressor(cfg, game.total_dim());
    if (spec && !AlphaWithinTheory(cfg.algo.alpha, Constants(*spec)) &&
        (param == "alpha" || cfg.enforce_alpha_bound)) {
      row.status = "rejected";
      row.message = "alpha exceeds 1/r = " + Num(1.0 / Constants(*spec).r);
      return row;
    }
    Trace trace;
    try {
      trace = spec ? Run(game, mix, *spec, cfg.algo) : RunBaseline(game, mix, cfg.algo);
      row.status = "ok";
    } catch (const RunDivergence& e) {
      trace = e.partial_trace();
      row.status = "diverged";
      row.message = e.what();
    }
    const TraceRecord& last = trace.records.back();
    row.iterations = last.k;
    row.final_residual = last.residual;
    row.iterations_to_tol = FirstBelow(trace, cfg.sweep_tol);
    row.bits_to_tol = BitsToResidual(trace, cfg.sweep_tol);
    row.total_bits = last.cum_bits;
  } catch (const Error& e) {
    row.status = "rejected";
    row.message = e.what();
  }
  std::replace(row.message.begin(), row.message.end(), ',', ';');
  return row;
}

}  // namespace

int CmdSweep(const fs::path& config, const std::optional<std::string>& param,
             const std::optional<std::vector<double>>& values, const std::optional<uint64_t>& seed,
             const std::optional<fs::path>& out_dir, std::ostream& err) {
  ExperimentConfig cfg;
  try {
    cfg = LoadConfig(config);
    if (param) cfg.sweep_param = OneOf(*param, "--param", {"eta", "gamma", "alpha", "bits", "k"});
    if (values) cfg.sweep_values = *values;
    if (seed) cfg.algo.seed = *seed;
    if (cfg.sweep_param.empty()) throw InvalidArgument("config: sweep.param is required");
    if (cfg.sweep_values.empty()) throw InvalidArgument("config: sweep.values is empty");
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  std::vector<SweepRow> rows(cfg.sweep_values.size());
  ParallelFor(rows.size(), [&](size_t i) { rows[i] = SweepOne(cfg, cfg.sweep_param, cfg.sweep_values[i]); });

  std::ostringstream csv;
  csv << "param,value,status,iterations,final_residual,iterations_to_tol,bits_to_tol,total_bits,"
         "message\n";
  for (const SweepRow& r : rows) {
    csv << cfg.sweep_param << ',' << Num(r.value) << ',' << r.status << ',' << r.iterations << ','
        << OptNum(r.final_residual) << ',' << OptNum(r.iterations_to_tol) << ','
        << OptNum(r.bits_to_tol) << ',' << r.total_bits << ',' << r.message << '\n';
  }
  try {
    WriteFileAtomic(OutputPath(cfg.summary_path, out_dir), csv.str());
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitOk;
}

namespace {

int ReportDivergence(const std::vector<FigureCurve>& curves, std::ostream& err) {
  int code = kExitOk;
  for (const FigureCurve& c : curves) {
    if (c.divergence) {
      err << "error: " << c.name << ": " << *c.divergence << "\n";
      code = kExitDivergence;
    }
  }
  return code;
}

}  // namespace

int CmdReproduceFig3(uint64_t seed, const fs::path& out_dir, std::ostream& err) {
  try {
    const std::vector<FigureCurve> curves = RunFigureExperiment(seed);
    std::ostringstream summary;
    summary << "curve,status,iterations,initial_residual,final_residual,iterations_to_1e-4_rel,"
               "log_slope,log_r2\n";
    for (const FigureCurve& c : curves) {
      WriteFileAtomic(out_dir / ("fig3_" + c.name + ".csv"), TraceCsv(c.trace));
      const double r0 = *c.trace.records.front().residual;
      const LogLinearFit fit = FitLogResidual(c.trace);
      summary << c.name << ',' << (c.divergence ? "diverged" : "ok") << ','
              << c.trace.records.back().k << ',' << Num(r0) << ','
              << Num(*c.trace.records.back().residual) << ','
              << OptNum(FirstBelow(c.trace, 1e-4 * r0)) << ',' << Num(fit.slope) << ','
              << Num(fit.r2) << '\n';
    }
    WriteFileAtomic(out_dir / "fig3_summary.csv", summary.str());
    return ReportDivergence(curves, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

int CmdReproduceFig4(uint64_t seed, const fs::path& out_dir, std::ostream& err) {
  try {
    const std::vector<FigureCurve> curves = RunFigureExperiment(seed);
    std::ostringstream summary;
    summary << "curve,status,bits_per_iteration,iterations_to_1e-3,bits_to_1e-3,total_bits\n";
    for (const FigureCurve& c : curves) {
      WriteFileAtomic(out_dir / ("fig4_" + c.name + ".csv"), TraceCsv(c.trace));
      summary << c.name << ',' << (c.divergence ? "diverged" : "ok") << ','
              << c.bits_per_iteration << ',' << OptNum(FirstBelow(c.trace, 1e-3)) << ','
              << OptNum(BitsToResidual(c.trace, 1e-3)) << ',' << c.trace.records.back().cum_bits
              << '\n';
    }
    WriteFileAtomic(out_dir / "fig4_summary.csv", summary.str());
    return ReportDivergence(curves, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

}  // namespace cdnes
