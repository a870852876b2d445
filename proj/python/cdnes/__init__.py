# Copyright 2026 The cdnes Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
# =============================================================================

"""Compressed distributed Nash-equilibrium seeking.

Simulation engine, compressors, games and rate certificates from the C++
core. Typical use::

    import cdnes
    game = cdnes.connectivity_game(5)
    mix = cdnes.metropolis_weights(cdnes.path_graph(5))
    trace = cdnes.run(game, mix, cdnes.Compressor.topk(10, 1), cdnes.AlgoConfig(eta=0.02, gamma=0.2))
    trace.residual[-1]
"""

from ._core import (
    AlgoConfig,
    Certificate,
    Compressor,
    DivergenceError,
    Error,
    Game,
    InfeasibleError,
    InvalidArgument,
    MixingMatrix,
    Topology,
    Trace,
    certify,
    complete_graph,
    connectivity_game,
    load_config,
    lq_game,
    max_degree_weights,
    metropolis_weights,
    path_graph,
    random_connected_graph,
    ring_graph,
    run,
    run_baseline,
)

__all__ = [
    "AlgoConfig",
    "Certificate",
    "Compressor",
    "DivergenceError",
    "Error",
    "Game",
    "InfeasibleError",
    "InvalidArgument",
    "MixingMatrix",
    "Topology",
    "Trace",
    "certify",
    "complete_graph",
    "connectivity_game",
    "load_config",
    "lq_game",
    "max_degree_weights",
    "metropolis_weights",
    "path_graph",
    "random_connected_graph",
    "ring_graph",
    "run",
    "run_baseline",
]
