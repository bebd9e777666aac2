"""Pi-pulse acceleration of adiabatic evolution in two- and three-level systems."""

from .engine import RunResult, run_experiment, sweep
from .hamiltonian import PhysicsError, mhz
from .protocols import (
    PRESETS,
    Experiment,
    build_stirap,
    build_stirap_pair,
    build_three_level_pipulse,
    build_two_level_case,
    preset,
)

__all__ = [
    "PRESETS",
    "Experiment",
    "PhysicsError",
    "RunResult",
    "build_stirap",
    "build_stirap_pair",
    "build_three_level_pipulse",
    "build_two_level_case",
    "mhz",
    "preset",
    "run_experiment",
    "sweep",
]
