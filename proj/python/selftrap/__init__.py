"""Pumped two-level atom in a lossy cavity.

Thin wrapper over the C++ core. Configuration uses the same flat dotted keys
as the command-line tool, e.g. ``{"params.g": 45, "traj.seed": 7}``.
"""

from ._selftrap import (
    EXIT_NUMERICAL,
    EXIT_OK,
    EXIT_USAGE,
    InvalidArgument,
    SimulationError,
    SystemParams,
    evolve,
    known_keys,
    presets,
    resolve,
    run_cli,
    run_ensemble,
    run_trajectory,
    spectrum,
    steady_state,
)

__version__ = "0.1.0"

__all__ = [
    "EXIT_NUMERICAL",
    "EXIT_OK",
    "EXIT_USAGE",
    "InvalidArgument",
    "SimulationError",
    "SystemParams",
    "evolve",
    "known_keys",
    "presets",
    "resolve",
    "run_cli",
    "run_ensemble",
    "run_trajectory",
    "spectrum",
    "steady_state",
]
