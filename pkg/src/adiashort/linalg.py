"""Dense complex linear algebra for small Hermitian systems.

Everything here works on stacks of matrices as well as single ones: a
leading axis is treated as a batch axis, so an ``(n, N, N)`` array of
Hamiltonians can be diagonalised or exponentiated in one call.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

HERMITIAN_RTOL = 1e-12
UNITARY_ATOL = 1e-9


class LinalgError(ValueError):
    """Raised for malformed matrices or grids."""


@dataclass(frozen=True)
class EigenSystem:
    """Ascending eigenvalues and matching eigenvector columns."""

    values: np.ndarray
    vectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.values[..., None, :]) @ _dagger(self.vectors)


def _dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def dagger(a: np.ndarray) -> np.ndarray:
    """Conjugate transpose over the last two axes."""
    return _dagger(np.asarray(a))


def check_hermitian(h: np.ndarray, rtol: float = HERMITIAN_RTOL) -> np.ndarray:
    h = np.asarray(h, dtype=complex)
    if h.ndim < 2 or h.shape[-1] != h.shape[-2]:
        raise LinalgError(f"expected square matrix, got shape {h.shape}")
    if not np.all(np.isfinite(h)):
        raise LinalgError("matrix has non-finite entries")
    scale = max(1.0, float(np.max(np.abs(h)))) if h.size else 1.0
    if np.max(np.abs(h - _dagger(h)), initial=0.0) > rtol * scale:
        raise LinalgError("matrix is not Hermitian")
    return h


def eigh(h: np.ndarray) -> EigenSystem:
    """Eigendecomposition of a Hermitian matrix (or a stack of them).

    Eigenvalues come back ascending. The phase of each eigenvector is
    whatever LAPACK returns; callers that need a smooth gauge fix it
    themselves.
    """
    h = check_hermitian(h)
    # symmetrise so LAPACK sees an exactly Hermitian input
    values, vectors = np.linalg.eigh(0.5 * (h + _dagger(h)))
    return EigenSystem(values, vectors)


def expm_unitary(h: np.ndarray, dt: float | np.ndarray) -> np.ndarray:
    """Return ``exp(-i h dt)`` through the spectral decomposition of ``h``.

    ``dt`` may be a scalar or an array broadcasting against the batch axes
    of ``h``.
    """
    if not np.all(np.isfinite(dt)):
        raise LinalgError("time step must be finite")
    es = eigh(h)
    phases = np.exp(-1j * es.values * np.asarray(dt, dtype=float)[..., None])
    return (es.vectors * phases[..., None, :]) @ _dagger(es.vectors)


def unitarity_error(u: np.ndarray) -> np.ndarray:
    """Frobenius norm of ``U^dagger U - I`` for each matrix in the stack."""
    u = np.asarray(u)
    eye = np.eye(u.shape[-1])
    return np.linalg.norm(_dagger(u) @ u - eye, axis=(-2, -1))


def check_grid(grid: np.ndarray, *, start_at_zero: bool = True) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise LinalgError("time grid is empty")
    if grid.size > 1 and not np.all(np.diff(grid) > 0):
        raise LinalgError("time grid must be strictly increasing")
    if start_at_zero and grid[0] != 0.0:
        raise LinalgError("time grid must start at 0")
    return grid


def propagate_samples(
    h_mid: np.ndarray,
    grid: np.ndarray,
    u0: np.ndarray | None = None,
    *,
    start_at_zero: bool = True,
) -> np.ndarray:
    """Time-ordered product from Hamiltonians sampled at step midpoints.

    ``h_mid[k]`` is the Hamiltonian held constant over ``[grid[k], grid[k+1]]``.
    Returns one unitary per grid point, the first being ``u0`` (identity by
    default).
    """
    grid = check_grid(grid, start_at_zero=start_at_zero)
    h_mid = np.asarray(h_mid, dtype=complex)
    if h_mid.shape[0] != grid.size - 1:
        raise LinalgError(
            f"need {grid.size - 1} midpoint samples, got {h_mid.shape[0]}"
        )
    dim = h_mid.shape[-1]
    out = np.empty((grid.size, dim, dim), dtype=complex)
    out[0] = np.eye(dim) if u0 is None else u0
    if grid.size == 1:
        return out
    steps = expm_unitary(h_mid, np.diff(grid))
    u = out[0]
    for k in range(steps.shape[0]):
        u = steps[k] @ u
        out[k + 1] = u
    return out


def propagate(
    h_of_t: Callable[[np.ndarray], np.ndarray],
    grid: np.ndarray,
    u0: np.ndarray | None = None,
) -> np.ndarray:
    """Integrate ``i dU/dt = H(t) U`` with exponential midpoint steps.

    ``h_of_t`` must accept an array of wall times and return the stacked
    Hamiltonians. The result is unitary to the eigensolver's precision and
    converges at second order in the step size.
    """
    grid = check_grid(grid)
    mids = 0.5 * (grid[1:] + grid[:-1])
    if mids.size:
        h_mid = np.asarray(h_of_t(mids))
    else:
        dim = np.asarray(h_of_t(grid[:1])).shape[-1]
        h_mid = np.zeros((0, dim, dim), dtype=complex)
    out = propagate_samples(h_mid, grid, u0)
    if np.max(unitarity_error(out)) > UNITARY_ATOL:
        raise LinalgError("propagator lost unitarity")
    return out
