"""State fidelity, adiabatic-path deviation and populations."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import dagger, unitarity_error

UNITARY_TOL = 1e-8


class MetricError(ValueError):
    pass


def _check_unitary(u):
    u = np.asarray(u)
    if np.max(unitarity_error(u), initial=0.0) > UNITARY_TOL:
        raise MetricError("evolution operator is not unitary")
    return u


def fidelity(u_full, psi_i, psi_f):
    """``|<psi_f| U |psi_i>|^2``, i.e. ``|<psi_i| U^-1 |psi_f>|^2`` for unitary U.

    Broadcasts over a leading stack of unitaries.
    """
    u = _check_unitary(u_full)
    amp = np.einsum("i,...ij,j->...", np.conj(psi_f), u, psi_i)
    return np.abs(amp) ** 2


def deviation(u_full, u_adiabatic, psi_i):
    """``1 - |<psi_i| U^dagger U_A |psi_i>|^2``: distance from the adiabatic track."""
    u = _check_unitary(u_full)
    ua = _check_unitary(u_adiabatic)
    amp = np.einsum("i,...ij,j->...", np.conj(psi_i), dagger(u) @ ua, psi_i)
    return 1.0 - np.abs(amp) ** 2


def populations(state, basis_index=None):
    """Squared amplitudes of ``state`` (or of one basis component)."""
    state = np.asarray(state)
    pops = np.abs(state) ** 2
    if basis_index is None:
        return pops
    if not 0 <= basis_index < state.shape[-1]:
        raise IndexError(f"basis index {basis_index} out of range")
    return pops[..., basis_index]


@dataclass
class Trajectory:
    """Samples recorded along a run, one row per wall time."""

    basis: tuple[str, ...]
    wall_times: np.ndarray
    path_times: np.ndarray
    states: np.ndarray
    fidelity: np.ndarray
    deviation: np.ndarray
    populations: np.ndarray
    omega: np.ndarray
    theta: np.ndarray
    phi: np.ndarray
    u_full: np.ndarray | None = None
    u_adiabatic: np.ndarray | None = None
    pump: np.ndarray | None = None
    stokes: np.ndarray | None = None

    def __len__(self) -> int:
        return self.wall_times.size

    def population(self, label: str) -> np.ndarray:
        return self.populations[:, self.basis.index(label)]
