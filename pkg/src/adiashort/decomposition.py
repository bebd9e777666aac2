"""Adiabatic/transition factorisation ``U = U_A U_T`` and the condition checker.

``U_A = U_d U_g`` carries the dynamical and geometric phases along the
instantaneous eigenframe; ``U_T`` is generated by the transition
Hamiltonian ``H_T = -sum_{n != m} exp(i phi_nm) g_nm |n(0)><m(0)|`` and is
the identity whenever the evolution is perfectly adiabatic.
"""
from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.integrate import trapezoid

from .hamiltonian import EigenFrame, PhaseLedger, PhysicsError, phase_integrals
from .linalg import dagger, propagate_samples
from .schedule import PulseSchedule

CONTINUITY_MIN_OVERLAP = 0.5


@dataclass(frozen=True)
class AdiabaticFactorization:
    times: np.ndarray
    u_full: np.ndarray
    u_dynamical: np.ndarray
    u_geometric: np.ndarray
    u_transition: np.ndarray

    @property
    def u_adiabatic(self) -> np.ndarray:
        return self.u_dynamical @ self.u_geometric

    def residual(self) -> float:
        return factorization_residual(self.u_full, self.u_adiabatic, self.u_transition)


def _check_continuity(states: np.ndarray) -> None:
    if states.shape[0] < 2:
        return
    overlap = np.abs(np.einsum("kin,kin->kn", np.conj(states[:-1]), states[1:]))
    if np.min(overlap) < CONTINUITY_MIN_OVERLAP:
        k = int(np.argmin(np.min(overlap, axis=1)))
        raise PhysicsError(f"level crossing detected between samples {k} and {k + 1}")


def adiabatic_from_integrals(states, dynamical, geometric, reference_states):
    """``U_d`` and ``U_g`` from eigenvectors and accumulated phase integrals.

    ``dynamical[k, n]`` is ``int_0^t E_n`` and ``geometric[k, n]`` is
    ``int_0^t g_nn``; since ``<n|dn/dt> = -i g_nn`` the geometric factor is
    ``exp(+i int g_nn)``.
    """
    states = np.asarray(states)
    _check_continuity(states)
    u_d = (states * np.exp(-1j * dynamical)[..., None, :]) @ dagger(reference_states)
    u_g = (reference_states * np.exp(1j * geometric)[..., None, :]) @ dagger(
        reference_states
    )
    return u_d, u_g


def adiabatic_operator(frames: EigenFrame, grid, reference_states=None):
    """``(U_d, U_g)`` on a single smooth stretch of gauge-fixed frames."""
    grid = np.asarray(grid, dtype=float)
    if grid.size > 1 and not np.all(np.diff(grid) > 0):
        raise PhysicsError("grid must be strictly increasing")
    ref = frames.states[0] if reference_states is None else reference_states
    dyn, geo = phase_integrals(frames, grid)
    return adiabatic_from_integrals(frames.states, dyn, geo, ref)


def transition_hamiltonian(frame: EigenFrame, ledger: PhaseLedger, reference_states):
    """Effective transition Hamiltonian in the bare basis.

    Works on single samples or stacks; ``frame`` and ``ledger`` must be
    sampled at the same wall times.
    """
    if np.shape(frame.energies)[:-1] != np.shape(ledger.t_wall):
        raise PhysicsError("frame and ledger sampled at different times")
    dim = frame.dim
    offdiag = ~np.eye(dim, dtype=bool)
    m = np.where(offdiag, -np.exp(1j * ledger.phi) * frame.couplings, 0.0)
    # keep the strict upper triangle and mirror it so H_T is exactly Hermitian
    upper = np.triu(np.ones((dim, dim), dtype=bool), 1)
    m = np.where(upper, m, 0.0)
    m = m + dagger(m)
    ht = reference_states @ m @ dagger(reference_states)
    return 0.5 * (ht + dagger(ht))


def transition_operator(h_t_samples, grid, u0=None, *, start_at_zero=True):
    """Time-ordered exponential of ``H_T`` from step-midpoint samples."""
    return propagate_samples(h_t_samples, grid, u0, start_at_zero=start_at_zero)


def factorization_residual(u_full, u_adiabatic, u_transition) -> float:
    """Largest Frobenius distance ``||U - U_A U_T||`` over the samples."""
    u_full = np.asarray(u_full)
    if not (len(u_full) == len(u_adiabatic) == len(u_transition)):
        raise ValueError("factorisation samples have different lengths")
    diff = u_full - np.asarray(u_adiabatic) @ np.asarray(u_transition)
    return float(np.max(np.linalg.norm(diff, axis=(-2, -1)), initial=0.0))


# --------------------------------------------------------------------------
# condition checking


@dataclass(frozen=True)
class SegmentSamples:
    """Frames and phases sampled inside one timeline segment (ends included)."""

    kind: str
    index: int
    times: np.ndarray
    frame: EigenFrame
    ledger: PhaseLedger


@dataclass(frozen=True)
class ConditionTolerances:
    phi: float = 1e-3
    g_odd_drift: float = 1e-6
    g_even: float = 1e-9
    alternating_sum: float = 1e-9
    commutator: float = 1e-8
    integral: float = 1e-6


@dataclass
class ClauseResult:
    passed: bool
    value: float
    tolerance: float
    detail: dict = field(default_factory=dict)


@dataclass
class ConditionReport:
    phi_clause: ClauseResult
    g_clause: ClauseResult
    sum_clause: ClauseResult
    commutator_max: ClauseResult
    integral_clause: ClauseResult
    gamma_values: list[dict]

    @property
    def passed(self) -> bool:
        return all(
            c.passed
            for c in (self.phi_clause, self.g_clause, self.sum_clause, self.commutator_max)
        )

    def failed_clauses(self) -> list[str]:
        names = ("phi_clause", "g_clause", "sum_clause", "commutator_max")
        return [n for n in names if not getattr(self, n).passed]

    def to_dict(self) -> dict:
        out = {k: asdict(v) for k, v in self.__dict__.items() if isinstance(v, ClauseResult)}
        out["gamma_values"] = self.gamma_values
        out["passed"] = self.passed
        return out


def _wrap(x):
    return (np.asarray(x) + np.pi) % (2 * np.pi) - np.pi


def _pairs(dim):
    return [(n, m) for n in range(dim) for m in range(dim) if n != m]


def check_rae_conditions(
    schedule: PulseSchedule,
    samples: list[SegmentSamples],
    tolerances: ConditionTolerances | None = None,
) -> ConditionReport:
    """Evaluate the three conditions for suppressed transitions (a = 1).

    * phases: ``phi_nm = j (n - m) pi`` (mod 2 pi) on path segment j;
    * couplings: constant for odd ``n - m``, zero for even ``n - m``;
    * zero integral: ``sum_j (-1)^{j (n-m)} Delta(j) = 0`` for every pair
      with a non-zero coupling.

    Also reports the largest commutator of ``H_T`` between sampled times
    (segment midpoints and ends), the directly integrated transition
    integral, and sampled angle differences ``gamma``.
    """
    tol = tolerances or ConditionTolerances()
    path = [s for s in samples if s.kind == "path"]
    dim = samples[0].frame.dim
    pairs = _pairs(dim)
    ref_states = samples[0].frame.states[0]

    # phase clause
    phi_dev = 0.0
    per_segment = []
    for seg in path:
        worst = 0.0
        for n, m in pairs:
            target = seg.index * (n - m) * np.pi
            dev = float(np.max(np.abs(_wrap(seg.ledger.phi[:, n, m] - target))))
            worst = max(worst, dev)
        per_segment.append(worst)
        phi_dev = max(phi_dev, worst)
    phi_clause = ClauseResult(
        phi_dev <= tol.phi, phi_dev, tol.phi, {"max_deviation_per_segment": per_segment}
    )

    # coupling clause
    g_ref = path[0].frame.couplings[0]
    g_detail = {}
    g_ok = True
    g_worst = 0.0
    for n, m in pairs:
        if n > m:
            continue
        values = np.concatenate([s.frame.couplings[:, n, m] for s in path])
        label = f"{n + 1},{m + 1}"
        if (n - m) % 2:
            drift = float(np.max(np.abs(values - g_ref[n, m])))
            ok = drift <= tol.g_odd_drift
            g_detail[label] = {"parity": "odd", "max_drift": drift, "value": _cplx(g_ref[n, m])}
            g_worst = max(g_worst, drift)
        else:
            mag = float(np.max(np.abs(values)))
            ok = mag <= tol.g_even
            g_detail[label] = {"parity": "even", "max_abs": mag}
            g_worst = max(g_worst, mag)
        g_ok &= ok
        g_detail[label]["passed"] = bool(ok)
    g_clause = ClauseResult(g_ok, g_worst, tol.g_odd_drift, g_detail)

    # zero-integral clause through the segment durations
    durations = schedule.segment_durations
    j = np.arange(durations.size)
    alt = float(np.sum((-1.0) ** j * durations))
    sum_detail = {"alternating_sum_us": alt, "pairs": {}}
    sum_worst = 0.0
    for n, m in pairs:
        if n > m or abs(g_ref[n, m]) == 0:
            continue
        weighted = float(np.sum((-1.0) ** (j * (n - m)) * durations))
        sum_detail["pairs"][f"{n + 1},{m + 1}"] = {
            "signed_duration_us": weighted,
            "g_times_sum": _cplx(g_ref[n, m] * weighted),
        }
        sum_worst = max(sum_worst, abs(weighted))
    sum_clause = ClauseResult(
        sum_worst <= tol.alternating_sum, sum_worst, tol.alternating_sum, sum_detail
    )

    # commutators at segment ends and midpoints
    picks_f, picks_l, picks_t = [], [], []
    for seg in samples:
        for k in sorted({0, len(seg.times) // 2, len(seg.times) - 1}):
            picks_f.append(seg.frame[k])
            picks_l.append(seg.ledger[k])
            picks_t.append(float(seg.times[k]))
    ht = np.stack(
        [transition_hamiltonian(f, l, ref_states) for f, l in zip(picks_f, picks_l)]
    )
    comm = ht[:, None] @ ht[None, :] - ht[None, :] @ ht[:, None]
    comm_max = float(np.max(np.linalg.norm(comm, axis=(-2, -1))))
    commutator = ClauseResult(
        comm_max <= tol.commutator, comm_max, tol.commutator, {"n_samples": len(picks_t)}
    )

    # transition integral straight from the samples
    integral = np.zeros((dim, dim), dtype=complex)
    for seg in samples:
        if len(seg.times) > 1:
            integrand = np.exp(1j * seg.ledger.phi) * seg.frame.couplings
            integral += trapezoid(integrand, seg.times, axis=0)
    off = ~np.eye(dim, dtype=bool)
    integral_max = float(np.max(np.abs(integral[off]), initial=0.0))
    integral_clause = ClauseResult(
        integral_max <= tol.integral,
        integral_max,
        tol.integral,
        {f"{n + 1},{m + 1}": _cplx(integral[n, m]) for n, m in pairs if n < m},
    )

    # angle differences between path-segment midpoints
    mids = [(s.index, s.ledger[len(s.times) // 2]) for s in path]
    gammas = []
    for (ja, la), (jb, lb) in itertools.combinations(mids, 2):
        for n, m, p in itertools.product(range(dim), repeat=3):
            if n == m or m == p:
                continue
            gamma = (la.phi[n, m] + lb.phi[m, p]) - (lb.phi[n, m] + la.phi[m, p])
            gammas.append(
                {
                    "levels": [n + 1, m + 1, p + 1],
                    "segments": [ja, jb],
                    "gamma_mod_2pi": float(np.mod(gamma, 2 * np.pi)),
                }
            )

    return ConditionReport(
        phi_clause, g_clause, sum_clause, commutator, integral_clause, gammas
    )


def _cplx(z) -> list[float]:
    return [float(np.real(z)), float(np.imag(z))]


def table_one_samples(
    case: int,
    schedule: PulseSchedule,
    coupling: complex,
    dim: int = 3,
    per_segment: int = 5,
) -> list[SegmentSamples]:
    """Idealised samples for the three configurations of the phase/coupling table.

    Case 1: all phases zero (even ``a``), every coupling equal to ``coupling``.
    Case 2: ``phi_nm = j (n-m) pi``, only even-parity pairs coupled.
    Case 3: ``phi_nm = j (n-m) pi``, only odd-parity pairs coupled.
    Pulse windows are represented by their (coupling-free) end points.
    """
    if case not in (1, 2, 3):
        raise ValueError("case must be 1, 2 or 3")
    idx = np.arange(dim)
    parity = (idx[:, None] - idx[None, :]) % 2
    off = ~np.eye(dim, dtype=bool)
    if case == 1:
        mask = off
    elif case == 2:
        mask = off & (parity == 0)
    else:
        mask = off & (parity == 1)
    upper = np.triu(mask, 1) * coupling
    g = upper + np.conj(upper.T)
    edges = np.concatenate([[0.0], schedule.t_switch, [schedule.tau_path]])
    eye = np.eye(dim, dtype=complex)
    out = []
    wall = 0.0
    for j in range(schedule.k + 1):
        a = 1 if case != 1 else 2
        phase_j = a * j * np.pi * (idx[:, None] - idx[None, :])
        times = wall + np.linspace(0.0, edges[j + 1] - edges[j], per_segment)
        out.append(_synthetic(("path", j), times, g, phase_j, eye))
        wall = times[-1]
        if j < schedule.k:
            width = float(schedule.delta[j])
            times = wall + np.array([0.0, width])
            out.append(_synthetic(("pulse", j + 1), times, 0 * g, phase_j, eye))
            wall = times[-1]
    return out


def _synthetic(tag, times, g, phase, eye) -> SegmentSamples:
    n = len(times)
    dim = g.shape[0]
    frame = EigenFrame(
        np.zeros((n, dim)),
        np.broadcast_to(eye, (n, dim, dim)).copy(),
        np.broadcast_to(g, (n, dim, dim)).copy(),
    )
    ledger = PhaseLedger(np.broadcast_to(phase, (n, dim, dim)).astype(float), times)
    return SegmentSamples(tag[0], tag[1], times, frame, ledger)
