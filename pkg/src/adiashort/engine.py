"""Run experiments: propagate, factorise, check conditions, record metrics."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .decomposition import (
    AdiabaticFactorization,
    ConditionReport,
    SegmentSamples,
    _check_continuity,
    adiabatic_from_integrals,
    check_rae_conditions,
    transition_hamiltonian,
    transition_operator,
)
from .hamiltonian import PhysicsError, ledger_from_integrals, phase_integrals
from .linalg import propagate_samples, unitarity_error
from .metrics import Trajectory, deviation, fidelity, populations
from .protocols import MIN_PULSE_SAMPLES, Experiment

DEFAULT_DECIMATE = 10
THREADS_ENV = "ADIASHORT_THREADS"


@dataclass
class RunResult:
    experiment: Experiment
    trajectory: Trajectory
    factorization: AdiabaticFactorization
    condition_report: ConditionReport
    segment_samples: list[SegmentSamples]
    summary: dict


def _record_indices(n_steps: int, stride: int) -> np.ndarray:
    idx = np.arange(0, n_steps + 1, stride)
    if idx[-1] != n_steps:
        idx = np.append(idx, n_steps)
    return idx


def run_experiment(exp: Experiment, decimate: int = DEFAULT_DECIMATE) -> RunResult:
    """Propagate ``exp`` over its timeline and collect every diagnostic.

    Each segment is integrated on its own uniform grid (step at most
    ``exp.grid_step``) whose end points coincide with the segment edges, so
    no step straddles a pulse edge. Phase integrals use the trapezoid rule
    on the half-step grid, which supplies the midpoint samples for both
    propagators. Every ``decimate``-th node (plus segment edges) is kept.
    """
    timeline = exp.timeline()
    dim = len(exp.basis)
    u = np.eye(dim, dtype=complex)
    u_t = np.eye(dim, dtype=complex)
    carry = (np.zeros(dim), np.zeros(dim))
    ref = None

    rec = {k: [] for k in ("t", "tp", "u", "ud", "ug", "ut", "omega", "theta", "phi", "pump", "stokes")}
    samples: list[SegmentSamples] = []

    for seg_no, seg in enumerate(timeline.segments):
        n = max(1, int(np.ceil(seg.duration / exp.grid_step - 1e-9)))
        if seg.kind == "pulse" and n < MIN_PULSE_SAMPLES:
            raise PhysicsError(f"pulse window {seg.index} resolved by only {n} steps")
        half = np.linspace(seg.wall_start, seg.wall_end, 2 * n + 1)
        h, frame, ctl = exp.evaluate(seg, half)
        if ref is None:
            ref = frame.states[0]

        dyn, geo = phase_integrals(frame, half, initial=carry)
        carry = (dyn[-1], geo[-1])
        ledger = ledger_from_integrals(dyn, geo, half)

        nodes = half[::2]
        u_seg = propagate_samples(h[1::2], nodes, u, start_at_zero=False)
        ht_mid = transition_hamiltonian(frame[1::2], ledger[1::2], ref)
        ut_seg = transition_operator(ht_mid, nodes, u_t, start_at_zero=False)
        u, u_t = u_seg[-1], ut_seg[-1]

        idx = _record_indices(n, decimate)
        hidx = 2 * idx
        samples.append(SegmentSamples(seg.kind, seg.index, nodes[idx], frame[hidx], ledger[hidx]))
        ud, ug = adiabatic_from_integrals(frame.states[hidx], dyn[hidx], geo[hidx], ref)
        keep = slice(1, None) if seg_no else slice(None)
        rec["t"].append(nodes[idx][keep])
        rec["tp"].append(ctl.t_path[hidx][keep])
        rec["u"].append(u_seg[idx][keep])
        rec["ut"].append(ut_seg[idx][keep])
        rec["ud"].append(ud[keep])
        rec["ug"].append(ug[keep])
        rec["omega"].append(ctl.omega[hidx][keep])
        rec["theta"].append(ctl.theta[hidx][keep])
        rec["phi"].append(ctl.phi[hidx][keep])
        if ctl.pump is not None:
            rec["pump"].append(ctl.pump[hidx][keep])
            rec["stokes"].append(ctl.stokes[hidx][keep])

    cat = {k: np.concatenate(v) for k, v in rec.items() if v}
    all_states = np.concatenate([s.frame.states for s in samples])
    _check_continuity(all_states)

    fact = AdiabaticFactorization(cat["t"], cat["u"], cat["ud"], cat["ug"], cat["ut"])
    u_a = fact.u_adiabatic
    psi = cat["u"] @ exp.psi_initial
    traj = Trajectory(
        basis=exp.basis,
        wall_times=cat["t"],
        path_times=cat["tp"],
        states=psi,
        fidelity=fidelity(cat["u"], exp.psi_initial, exp.psi_target),
        deviation=deviation(cat["u"], u_a, exp.psi_initial),
        populations=populations(psi),
        omega=cat["omega"],
        theta=cat["theta"],
        phi=cat["phi"],
        u_full=cat["u"],
        u_adiabatic=u_a,
        pump=cat.get("pump"),
        stokes=cat.get("stokes"),
    )
    report = check_rae_conditions(exp.schedule, samples)
    summary = _summarise(exp, traj, fact)
    return RunResult(exp, traj, fact, report, samples, summary)


def _summarise(exp: Experiment, traj: Trajectory, fact: AdiabaticFactorization) -> dict:
    pops = traj.populations[-1]
    return {
        "label": exp.label,
        "model": exp.model,
        "final_fidelity": float(traj.fidelity[-1]),
        "final_deviation": float(traj.deviation[-1]),
        "final_populations": {b: float(p) for b, p in zip(traj.basis, pops)},
        "max_e_population": float(np.max(traj.population("e"))),
        "tau_total": float(traj.wall_times[-1]),
        "factorization_residual": fact.residual(),
        "max_transition_deviation": max_transition_deviation(fact),
        "max_unitarity_error": float(np.max(unitarity_error(traj.u_full))),
        "grid_step": exp.grid_step,
    }


def max_transition_deviation(fact: AdiabaticFactorization) -> float:
    """Largest ``||U_T - I||`` (Frobenius) over the recorded samples.

    There is no closed form for its dependence on the number of pulses;
    it is measured here so that dependence can be studied empirically.
    """
    eye = np.eye(fact.u_transition.shape[-1])
    return float(np.max(np.linalg.norm(fact.u_transition - eye, axis=(-2, -1))))


def _worker_count(requested: int | None, n_jobs: int) -> int:
    if requested is None:
        env = os.environ.get(THREADS_ENV)
        requested = int(env) if env else (os.cpu_count() or 1)
    return max(1, min(requested, n_jobs))


def sweep(exps: list[Experiment], workers: int | None = None, **kwargs) -> list[RunResult]:
    """Run independent experiments, preserving input order.

    ``workers`` defaults to ``$ADIASHORT_THREADS`` or the CPU count; each run
    is self-contained so the results do not depend on the worker count.
    """
    if not exps:
        raise ValueError("sweep needs at least one experiment")
    n = _worker_count(workers, len(exps))
    if n == 1:
        return [run_experiment(e, **kwargs) for e in exps]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(lambda e: run_experiment(e, **kwargs), exps))
