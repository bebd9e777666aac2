"""Two- and three-level control Hamiltonians with analytic eigenframes.

Units: time in microseconds, angular frequency in rad/us, hbar = 1.
"MHz" in configs and presets means ``2*pi*value`` rad/us (see :func:`mhz`).

Array conventions: every evaluator broadcasts over a leading time axis.
``EigenFrame.states[..., :, n]`` is the n-th instantaneous eigenvector
(0-based here, level ``n + 1`` in the usual 1-based labelling), and
``EigenFrame.couplings[..., n, m]`` is ``g_{n,m} = i <n|d/dt m>``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np

from .linalg import eigh

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

TWO_LEVEL_BASIS = ("g", "e")
THREE_LEVEL_BASIS = ("g", "e", "a")

_POLE_TOL = 1e-12


class PhysicsError(ValueError):
    """Invalid physical configuration (pole, crossing, negative envelope...)."""


def mhz(value: float) -> float:
    """Angular frequency in rad/us for a frequency quoted in MHz."""
    return 2.0 * np.pi * value


@dataclass(frozen=True)
class EigenFrame:
    energies: np.ndarray
    states: np.ndarray
    couplings: np.ndarray

    @property
    def dim(self) -> int:
        return self.energies.shape[-1]

    @property
    def gaps(self) -> np.ndarray:
        """``E_n - E_m`` as an antisymmetric matrix (per sample)."""
        return self.energies[..., :, None] - self.energies[..., None, :]

    def __getitem__(self, index) -> "EigenFrame":
        return EigenFrame(
            self.energies[index], self.states[index], self.couplings[index]
        )

    def __len__(self) -> int:
        return self.energies.shape[0]


@dataclass(frozen=True)
class PhaseLedger:
    """Accumulated phases ``phi_{n,m}`` on a wall-time grid."""

    phi: np.ndarray
    t_wall: np.ndarray

    def __getitem__(self, index) -> "PhaseLedger":
        return PhaseLedger(self.phi[index], self.t_wall[index])

    def __len__(self) -> int:
        return self.t_wall.shape[0]


# --------------------------------------------------------------------------
# two-level model

CaseKind = Literal["meridian", "parallel", "general"]


@dataclass(frozen=True)
class TwoLevelPath:
    """Bloch-sphere path with constant coupling ``g_{1,2} = c_r + i c_i``.

    ``theta`` advances at ``2 c_i`` and ``phi`` at ``2 c_r / sin(theta)``;
    both rates are per unit path time.
    """

    theta0: float
    phi0: float
    c_r: float
    c_i: float
    case_kind: CaseKind
    tau_path: float

    def __post_init__(self):
        if self.tau_path <= 0:
            raise PhysicsError("tau_path must be positive")
        if self.case_kind == "meridian" and self.c_r != 0:
            raise PhysicsError("meridian path needs c_r = 0")
        if self.case_kind == "parallel":
            if self.c_i != 0:
                raise PhysicsError("parallel path needs c_i = 0")
            if abs(np.sin(self.theta0)) < _POLE_TOL:
                raise PhysicsError("parallel path cannot sit on a pole")
        if self.case_kind not in ("meridian", "parallel", "general"):
            raise PhysicsError(f"unknown case kind {self.case_kind!r}")

    @classmethod
    def meridian(cls, theta_start, theta_end, tau_path, phi0=0.0):
        c_i = (theta_end - theta_start) / (2.0 * tau_path)
        return cls(theta_start, phi0, 0.0, c_i, "meridian", tau_path)

    @classmethod
    def parallel(cls, theta, phi_start, phi_end, tau_path):
        c_r = (phi_end - phi_start) * np.sin(theta) / (2.0 * tau_path)
        return cls(theta, phi_start, c_r, 0.0, "parallel", tau_path)

    @classmethod
    def general(cls, theta_start, theta_end, phi_start, phi_end, tau_path):
        c_i = (theta_end - theta_start) / (2.0 * tau_path)
        if c_i == 0:
            raise PhysicsError("general path needs theta to move; use parallel")
        # phi(t) - phi0 = (c_r / c_i) * [ln tan(theta/2)] from theta0 to theta(t)
        span = _log_tan_half(theta_end) - _log_tan_half(theta_start)
        c_r = (phi_end - phi_start) * c_i / span
        return cls(theta_start, phi_start, c_r, c_i, "general", tau_path)

    @property
    def coupling(self) -> complex:
        return complex(self.c_r, self.c_i)

    def theta(self, t):
        return self.theta0 + 2.0 * self.c_i * np.asarray(t, dtype=float)

    def theta_dot(self, t):
        return np.full_like(np.asarray(t, dtype=float), 2.0 * self.c_i)

    def phi(self, t):
        t = np.asarray(t, dtype=float)
        if self.c_r == 0:
            return np.full_like(t, self.phi0)
        if self.c_i == 0:
            return self.phi0 + 2.0 * self.c_r * t / np.sin(self.theta0)
        self._check_poles(self.theta(t))
        return self.phi0 + (self.c_r / self.c_i) * (
            _log_tan_half(self.theta(t)) - _log_tan_half(self.theta0)
        )

    def phi_dot(self, t):
        t = np.asarray(t, dtype=float)
        if self.c_r == 0:
            return np.zeros_like(t)
        s = np.sin(self.theta(t))
        self._check_poles(self.theta(t))
        return 2.0 * self.c_r / s

    def background_drive(self, t):
        """Envelope ``cos(theta) * dphi/dt`` that keeps ``phi_{1,2}`` constant."""
        return np.cos(self.theta(t)) * self.phi_dot(t)

    def _check_poles(self, theta):
        if self.c_r != 0 and np.any(np.abs(np.sin(theta)) < _POLE_TOL):
            raise PhysicsError("path reaches a pole (sin theta = 0) with c_r != 0")


def _log_tan_half(theta):
    return np.log(np.tan(0.5 * np.asarray(theta, dtype=float)))


def two_level_hamiltonian(theta, phi, omega) -> np.ndarray:
    theta, phi, omega = np.broadcast_arrays(
        *(np.asarray(x, dtype=float) for x in (theta, phi, omega))
    )
    nz = np.cos(theta)
    nx = np.sin(theta) * np.cos(phi)
    ny = np.sin(theta) * np.sin(phi)
    h = (
        nz[..., None, None] * SIGMA_Z
        + nx[..., None, None] * SIGMA_X
        + ny[..., None, None] * SIGMA_Y
    )
    return 0.5 * omega[..., None, None] * h


def two_level_frames(theta, phi, theta_dot, phi_dot, omega):
    """Hamiltonian and analytic eigenframe of the two-level model.

    Level 1 has energy ``+omega/2`` and level 2 ``-omega/2`` regardless of
    the sign of ``omega``; the labels follow the state formulas, not the
    ordering of the energies.
    """
    theta, phi, theta_dot, phi_dot, omega = np.broadcast_arrays(
        *(np.asarray(x, dtype=float) for x in (theta, phi, theta_dot, phi_dot, omega))
    )
    c, s = np.cos(0.5 * theta), np.sin(0.5 * theta)
    ph = np.exp(1j * phi)
    states = np.empty(theta.shape + (2, 2), dtype=complex)
    states[..., 0, 0] = c
    states[..., 1, 0] = ph * s
    states[..., 0, 1] = s
    states[..., 1, 1] = -ph * c

    energies = np.stack([0.5 * omega, -0.5 * omega], axis=-1)

    g = np.empty(theta.shape + (2, 2), dtype=complex)
    g[..., 0, 0] = 0.5 * (np.cos(theta) - 1.0) * phi_dot
    g[..., 1, 1] = -0.5 * (1.0 + np.cos(theta)) * phi_dot
    g12 = 0.5 * (phi_dot * np.sin(theta) + 1j * theta_dot)
    g[..., 0, 1] = g12
    g[..., 1, 0] = np.conj(g12)

    h = two_level_hamiltonian(theta, phi, omega)
    return h, EigenFrame(energies, states, g)


def two_level_eval(path: TwoLevelPath, t_path, omega, rate=1.0):
    """Evaluate the two-level model on ``path`` at path time ``t_path``.

    ``rate`` is d(path time)/d(wall time): 1 while the path moves, 0 inside
    a frozen pulse window (all path derivatives, hence all couplings, vanish).
    """
    t = np.asarray(t_path, dtype=float)
    if np.any(t < -1e-12) or np.any(t > path.tau_path + 1e-12):
        raise PhysicsError("path time outside [0, tau_path]")
    return two_level_frames(
        path.theta(t),
        path.phi(t),
        rate * path.theta_dot(t),
        rate * path.phi_dot(t),
        omega,
    )


# --------------------------------------------------------------------------
# three-level model, basis order (g, e, a)

ScalarFn = Callable[[np.ndarray], np.ndarray]


def _zero(t):
    return np.zeros_like(np.asarray(t, dtype=float))


@dataclass(frozen=True)
class ThreeLevelPath:
    """Lambda-system controls: pump ``Omega sin(theta)``, Stokes ``Omega cos(theta)``."""

    theta_of_t: ScalarFn
    omega_of_t: ScalarFn
    tau_path: float
    delta: float = 0.0
    theta_dot_of_t: ScalarFn = field(default=_zero)
    omega_dot_of_t: ScalarFn = field(default=_zero)

    @classmethod
    def linear_sweep(cls, theta_start, theta_end, tau_path, omega=0.0, delta=0.0):
        rate = (theta_end - theta_start) / tau_path
        return cls(
            theta_of_t=lambda t: theta_start + rate * np.asarray(t, dtype=float),
            omega_of_t=lambda t: np.full_like(np.asarray(t, dtype=float), omega),
            tau_path=tau_path,
            delta=delta,
            theta_dot_of_t=lambda t: np.full_like(np.asarray(t, dtype=float), rate),
        )

    @classmethod
    def from_pulses(cls, pump, stokes, pump_dot, stokes_dot, tau_path, delta=0.0):
        """Build the path from pump/Stokes envelopes and their derivatives."""

        def theta(t):
            return np.arctan2(pump(t), stokes(t))

        def omega(t):
            return np.hypot(pump(t), stokes(t))

        def theta_dot(t):
            p, s = pump(t), stokes(t)
            r2 = p * p + s * s
            safe = np.where(r2 > 0, r2, 1.0)
            return np.where(r2 > 0, (s * pump_dot(t) - p * stokes_dot(t)) / safe, 0.0)

        def omega_dot(t):
            p, s = pump(t), stokes(t)
            r = np.hypot(p, s)
            safe = np.where(r > 0, r, 1.0)
            return np.where(r > 0, (p * pump_dot(t) + s * stokes_dot(t)) / safe, 0.0)

        return cls(
            theta_of_t=theta,
            omega_of_t=omega,
            tau_path=tau_path,
            delta=delta,
            theta_dot_of_t=theta_dot,
            omega_dot_of_t=omega_dot,
        )


def mixing_angle(omega, delta):
    """Angle ``phi`` in (0, pi/2) with ``tan(2 phi) = omega / delta``; pi/4 at resonance."""
    omega = np.asarray(omega, dtype=float)
    if delta == 0:
        return np.full_like(omega, 0.25 * np.pi)
    return 0.5 * np.arctan2(omega, delta)


def three_level_hamiltonian(pump, stokes, delta) -> np.ndarray:
    pump, stokes = np.broadcast_arrays(np.asarray(pump, float), np.asarray(stokes, float))
    h = np.zeros(pump.shape + (3, 3), dtype=complex)
    h[..., 0, 1] = h[..., 1, 0] = 0.5 * pump
    h[..., 1, 2] = h[..., 2, 1] = 0.5 * stokes
    h[..., 1, 1] = delta
    return h


def three_level_frames(theta, theta_dot, omega, omega_dot, delta=0.0):
    theta, theta_dot, omega, omega_dot = np.broadcast_arrays(
        *(np.asarray(x, dtype=float) for x in (theta, theta_dot, omega, omega_dot))
    )
    if np.any(omega < 0):
        raise PhysicsError("negative envelope")
    mix = mixing_angle(omega, delta)
    if delta == 0:
        mix_dot = np.zeros_like(omega)
    else:
        mix_dot = 0.5 * delta * omega_dot / (omega**2 + delta**2)

    st, ct = np.sin(theta), np.cos(theta)
    sm, cm = np.sin(mix), np.cos(mix)
    states = np.zeros(theta.shape + (3, 3), dtype=complex)
    states[..., :, 0] = np.stack([st * cm, -sm, ct * cm], axis=-1)
    states[..., :, 1] = np.stack([ct, np.zeros_like(st), -st], axis=-1)
    states[..., :, 2] = np.stack([st * sm, cm, ct * sm], axis=-1)

    # -Omega tan(phi)/2 and Omega cot(phi)/2 written without the cot pole
    root = np.hypot(omega, delta)
    energies = np.stack(
        [0.5 * (delta - root), np.zeros_like(root), 0.5 * (delta + root)], axis=-1
    )

    g = np.zeros(theta.shape + (3, 3), dtype=complex)
    g[..., 0, 1] = -1j * theta_dot * cm
    g[..., 0, 2] = 1j * mix_dot
    g[..., 1, 2] = 1j * theta_dot * sm
    g[..., 1, 0] = np.conj(g[..., 0, 1])
    g[..., 2, 0] = np.conj(g[..., 0, 2])
    g[..., 2, 1] = np.conj(g[..., 1, 2])

    h = three_level_hamiltonian(omega * st, omega * ct, delta)
    return h, EigenFrame(energies, states, g)


def three_level_eval(path: ThreeLevelPath, t_path, omega=None, rate=1.0):
    """Evaluate the three-level model; ``omega`` overrides the path envelope."""
    t = np.asarray(t_path, dtype=float)
    if omega is None:
        om = path.omega_of_t(t)
        om_dot = rate * path.omega_dot_of_t(t)
    else:
        om = np.broadcast_to(np.asarray(omega, dtype=float), t.shape)
        om_dot = np.zeros_like(om)
    return three_level_frames(
        path.theta_of_t(t), rate * path.theta_dot_of_t(t), om, om_dot, path.delta
    )


# --------------------------------------------------------------------------
# numeric fallback


def gauge_fix(states: np.ndarray, reference: np.ndarray) -> np.ndarray:
    """Rephase eigenvector columns so each overlap with ``reference`` is real-positive."""
    overlap = np.einsum("...in,...in->...n", np.conj(reference), states)
    mag = np.abs(overlap)
    phase = np.where(mag > 0, overlap / np.where(mag > 0, mag, 1.0), 1.0)
    return states * np.conj(phase)[..., None, :]


def numeric_frames(
    h_of_t: Callable[[np.ndarray], np.ndarray],
    times,
    fd_step: float = 1e-5,
    min_gap: float = 1e-9,
) -> EigenFrame:
    """Eigenframe by numerical diagonalisation with a continuous gauge.

    Levels are ordered by ascending energy. Couplings come from central
    differences of the gauge-fixed eigenvectors with step ``fd_step``.
    Degenerate spectra are rejected.
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    stencil = np.stack([times - fd_step, times, times + fd_step], axis=-1)
    es = eigh(np.asarray(h_of_t(stencil.ravel())))
    vals = es.values.reshape(times.shape + (3, -1))
    vecs = es.vectors.reshape(times.shape + (3,) + es.vectors.shape[-2:])
    scale = max(1.0, float(np.max(np.abs(vals))))
    if np.any(np.diff(vals, axis=-1) < min_gap * scale):
        raise PhysicsError("degenerate instantaneous spectrum")

    centre = vecs[:, 1].copy()
    for k in range(1, times.size):
        centre[k] = gauge_fix(centre[k], centre[k - 1])
    minus = gauge_fix(vecs[:, 0], centre)
    plus = gauge_fix(vecs[:, 2], centre)
    deriv = (plus - minus) / (2.0 * fd_step)
    g = 1j * np.einsum("...in,...im->...nm", np.conj(centre), deriv)
    return EigenFrame(vals[:, 1], centre, g)


def fd_couplings(state_of_t: Callable[[np.ndarray], np.ndarray], t, h):
    """``i <n|dm/dt>`` by central differences of an explicit state function."""
    t = np.asarray(t, dtype=float)
    centre = state_of_t(t)
    deriv = (state_of_t(t + h) - state_of_t(t - h)) / (2.0 * h)
    return 1j * np.einsum("...in,...im->...nm", np.conj(centre), deriv)


# --------------------------------------------------------------------------
# phases


def phase_integrals(frames: EigenFrame, times, initial=None):
    """Cumulative ``int E_n dt`` and ``int g_nn dt`` by the trapezoid rule.

    Returns two ``(len(times), N)`` arrays. ``initial`` is an optional pair
    of length-N offsets carried over from an earlier segment.
    """
    times = np.asarray(times, dtype=float)
    if times.size > 1 and not np.all(np.diff(times) > 0):
        raise PhysicsError("phase accumulation needs a strictly increasing grid")
    diag = np.real(np.diagonal(frames.couplings, axis1=-2, axis2=-1))
    dyn = _cumulative_trapezoid(frames.energies, times)
    geo = _cumulative_trapezoid(diag, times)
    if initial is not None:
        dyn = dyn + initial[0]
        geo = geo + initial[1]
    return dyn, geo


def _cumulative_trapezoid(y, x):
    # long segments at large gaps need the running sum in extended precision:
    # phase roundoff ~1e-12 rad would otherwise show up in H_T commutators
    y = np.asarray(y, dtype=np.longdouble)
    dx = np.diff(np.asarray(x, dtype=np.longdouble))
    inc = 0.5 * (y[1:] + y[:-1]) * dx[:, None]
    out = np.zeros(y.shape, dtype=np.longdouble)
    np.cumsum(inc, axis=0, out=out[1:])
    return out.astype(float)


def ledger_from_integrals(dyn, geo, times) -> PhaseLedger:
    alpha = dyn - geo
    return PhaseLedger(alpha[..., :, None] - alpha[..., None, :], np.asarray(times, float))


def accumulate_phases(frames: EigenFrame, times, initial=None) -> PhaseLedger:
    """Accumulate ``phi_{n,m} = int [E_{n,m} - (g_nn - g_mm)] dt`` along ``times``."""
    dyn, geo = phase_integrals(frames, times, initial)
    return ledger_from_integrals(dyn, geo, times)
