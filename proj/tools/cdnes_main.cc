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

// Command-line front end: run, certify, sweep, reproduce-fig3, reproduce-fig4.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cdnes/experiment.h"

namespace fs = std::filesystem;

int main(int argc, char** argv) {
  CLI::App app{"Compressed distributed Nash-equilibrium seeking: simulator and rate certifier"};
  app.require_subcommand(1);

  fs::path config;
  std::optional<uint64_t> seed;
  std::optional<fs::path> out_dir;
  std::optional<std::string> param;
  std::optional<std::vector<double>> values;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    if (needs_config) {
      sub->add_option("--config", config, "INI configuration file")->required()->check(CLI::ExistingFile);
    }
    sub->add_option("--seed", seed, "master RNG seed override");
    sub->add_option("--out", out_dir, "output directory override (default: $CDNES_OUT_DIR)");
  };

  CLI::App* run = app.add_subcommand("run", "run one experiment and write its trace CSV");
  add_common(run, true);
  CLI::App* certify = app.add_subcommand("certify", "certify a linear rate for the configured setup");
  add_common(certify, true);
  CLI::App* sweep = app.add_subcommand("sweep", "run one experiment per parameter value");
  add_common(sweep, true);
  sweep->add_option("--param", param, "eta | gamma | alpha | bits | k");
  sweep->add_option("--values", values, "comma-separated values")->delimiter(',');
  CLI::App* fig3 = app.add_subcommand("reproduce-fig3", "residual against iterations, four curves");
  add_common(fig3, false);
  CLI::App* fig4 = app.add_subcommand("reproduce-fig4", "residual against transmitted bits");
  add_common(fig4, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cdnes::kExitConfig;
  }

  const std::optional<fs::path> out = cdnes::ResolveOutDir(out_dir);
  if (*run) return cdnes::CmdRun(config, seed, out, std::cerr);
  if (*certify) return cdnes::CmdCertify(config, out, std::cout, std::cerr);
  if (*sweep) return cdnes::CmdSweep(config, param, values, seed, out, std::cerr);
  const uint64_t fig_seed = seed.value_or(1);
  const fs::path dir = out.value_or(fs::path("."));
  if (*fig3) return cdnes::CmdReproduceFig3(fig_seed, dir, std::cerr);
  return cdnes::CmdReproduceFig4(fig_seed, dir, std::cerr);
}
