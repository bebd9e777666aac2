"""Experiment builders for the two-level cases, the three-level pi-pulse
transfer and the area-matched STIRAP baseline.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Literal

import numpy as np
from scipy.integrate import quad

from .hamiltonian import (
    THREE_LEVEL_BASIS,
    TWO_LEVEL_BASIS,
    EigenFrame,
    PhysicsError,
    ThreeLevelPath,
    TwoLevelPath,
    mhz,
    mixing_angle,
    three_level_eval,
    two_level_eval,
)
from .schedule import PulseSchedule, Segment, Timeline, assemble_timeline, pulse_width

TWO_LEVEL_TAU_PATH = 9.9
TWO_LEVEL_K = 5
TWO_LEVEL_STEP = 1e-4
THREE_LEVEL_STEP = 2e-5
THREE_LEVEL_DWELL = 0.015
MIN_PULSE_SAMPLES = 10

REGIME_AMPLITUDE_MHZ = {"ideal": 25.0, "practical": 1.0}


@dataclass(frozen=True)
class StirapPulses:
    """Counter-intuitively ordered Gaussian pump and Stokes envelopes."""

    amp: float
    tau: float

    def __post_init__(self):
        if self.amp <= 0 or self.tau <= 0:
            raise PhysicsError("STIRAP amplitude and duration must be positive")

    @property
    def delay(self) -> float:
        return self.tau / 10.0

    @property
    def sigma(self) -> float:
        return self.tau / 6.0

    def _gauss(self, t, centre):
        t = np.asarray(t, dtype=float)
        return self.amp * np.exp(-((t - centre) ** 2) / self.sigma**2)

    def pump(self, t):
        return self._gauss(t, 0.5 * self.tau + self.delay)

    def stokes(self, t):
        return self._gauss(t, 0.5 * self.tau - self.delay)

    def pump_dot(self, t):
        c = 0.5 * self.tau + self.delay
        return -2.0 * (np.asarray(t, float) - c) / self.sigma**2 * self.pump(t)

    def stokes_dot(self, t):
        c = 0.5 * self.tau - self.delay
        return -2.0 * (np.asarray(t, float) - c) / self.sigma**2 * self.stokes(t)

    def path(self) -> ThreeLevelPath:
        return ThreeLevelPath.from_pulses(
            self.pump, self.stokes, self.pump_dot, self.stokes_dot, self.tau
        )


@dataclass(frozen=True)
class Controls:
    """Control values sampled along one timeline segment."""

    t_path: np.ndarray
    theta: np.ndarray
    phi: np.ndarray
    omega: np.ndarray
    pump: np.ndarray | None = None
    stokes: np.ndarray | None = None


@dataclass(frozen=True)
class Experiment:
    model: Literal["two-level", "three-level"]
    path: TwoLevelPath | ThreeLevelPath
    schedule: PulseSchedule
    psi_initial: np.ndarray
    psi_target: np.ndarray
    grid_step: float
    label: str = ""
    omega_bias: float = 0.0
    stirap: StirapPulses | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("psi_initial", "psi_target"):
            psi = np.asarray(getattr(self, name), dtype=complex)
            if abs(np.linalg.norm(psi) - 1.0) > 1e-12:
                raise PhysicsError(f"{name} is not normalised")
            object.__setattr__(self, name, psi)
        if self.grid_step <= 0:
            raise PhysicsError("grid step must be positive")
        if self.schedule.k:
            samples = np.min(self.schedule.delta) / self.grid_step
            if samples < MIN_PULSE_SAMPLES - 1e-9:
                raise PhysicsError(
                    f"grid step {self.grid_step} gives {samples:.1f} samples per pulse,"
                    f" need {MIN_PULSE_SAMPLES}"
                )

    @property
    def basis(self) -> tuple[str, ...]:
        return TWO_LEVEL_BASIS if self.model == "two-level" else THREE_LEVEL_BASIS

    @property
    def tau_total(self) -> float:
        return self.schedule.tau_total

    def timeline(self) -> Timeline:
        return assemble_timeline(self.schedule)

    def evaluate(self, segment: Segment, t_wall) -> tuple[np.ndarray, EigenFrame, Controls]:
        """Hamiltonian, eigenframe and raw controls at wall times inside ``segment``."""
        t_path = segment.path_time(t_wall)
        frozen = segment.kind == "pulse"
        rate = 0.0 if frozen else 1.0
        if self.model == "two-level":
            path = self.path
            if frozen:
                omega = np.full_like(t_path, self.schedule.pulse_amp)
            else:
                omega = path.background_drive(t_path) + self.omega_bias
            h, frame = two_level_eval(path, t_path, omega, rate=rate)
            ctl = Controls(t_path, path.theta(t_path), path.phi(t_path), omega)
        else:
            path = self.path
            omega = np.full_like(t_path, self.schedule.pulse_amp) if frozen else None
            h, frame = three_level_eval(path, t_path, omega=omega, rate=rate)
            om = path.omega_of_t(t_path) if omega is None else omega
            theta = path.theta_of_t(t_path)
            ctl = Controls(
                t_path,
                theta,
                mixing_angle(om, path.delta),
                om,
                pump=om * np.sin(theta),
                stokes=om * np.cos(theta),
            )
        return h, frame, ctl

    def with_step(self, grid_step: float) -> "Experiment":
        return replace(self, grid_step=grid_step)


def _ket(*amps) -> np.ndarray:
    return np.asarray(amps, dtype=complex)


def build_two_level_case(
    case: Literal["i", "ii", "iii"],
    regime: Literal["ideal", "practical"],
    *,
    k: int = TWO_LEVEL_K,
    tau_path: float = TWO_LEVEL_TAU_PATH,
    grid_step: float = TWO_LEVEL_STEP,
    pulse_amp: float | None = None,
    target_phase: float = np.pi,
) -> Experiment:
    """Two-level case (i) meridian, (ii) parallel or (iii) general path.

    ``pulse_amp`` defaults to the regime amplitude (25 MHz ideal, 1 MHz
    practical); the width follows from ``target_phase``.
    """
    if regime not in REGIME_AMPLITUDE_MHZ:
        raise ValueError(f"unknown regime {regime!r}")
    amp = mhz(REGIME_AMPLITUDE_MHZ[regime]) if pulse_amp is None else pulse_amp
    if case == "i":
        path = TwoLevelPath.meridian(0.0, np.pi, tau_path)
        psi_i, psi_f = _ket(1, 0), _ket(0, 1)
    elif case == "ii":
        path = TwoLevelPath.parallel(np.pi / 5, 0.0, np.pi, tau_path)
        psi_i = _ket(np.cos(np.pi / 10), np.sin(np.pi / 10))
        psi_f = _ket(np.cos(np.pi / 10), -np.sin(np.pi / 10))
    elif case == "iii":
        path = TwoLevelPath.general(np.pi / 5, 4 * np.pi / 5, 0.0, np.pi, tau_path)
        psi_i = _ket(np.cos(np.pi / 10), np.sin(np.pi / 10))
        psi_f = _ket(np.cos(2 * np.pi / 5), -np.sin(2 * np.pi / 5))
    else:
        raise ValueError(f"unknown case {case!r}")
    width = pulse_width(amp, target_phase) if k else 0.0
    schedule = PulseSchedule.equal_spacing(tau_path, k, amp, width)
    return Experiment(
        model="two-level",
        path=path,
        schedule=schedule,
        psi_initial=psi_i,
        psi_target=psi_f,
        grid_step=grid_step,
        label=f"two-level-case-{case}-{regime}",
        meta={"case": case, "regime": regime},
    )


def pipulse_angles(k: int) -> np.ndarray:
    """Mixing angles ``(2j - 1) pi / 4K`` at which the pulses fire."""
    j = np.arange(1, k + 1)
    return (2 * j - 1) * np.pi / (4 * k)


def pipulse_area(k: int, pulse_amp: float = mhz(8.0)) -> float:
    """Pump area of the K-pulse sequence, ``2 pi sum(sin theta_j)`` at resonance."""
    width = pulse_width(pulse_amp, model="three-level")
    return float(pulse_amp * width * np.sum(np.sin(pipulse_angles(k))))


def build_three_level_pipulse(
    k: int,
    pulse_amp: float = mhz(8.0),
    *,
    dwell: float = THREE_LEVEL_DWELL,
    grid_step: float = THREE_LEVEL_STEP,
) -> Experiment:
    """Dark-state transfer |g> -> |a> with K square pulses at resonance.

    Between pulses the drive is off while the mixing angle sweeps linearly
    over a dwell path of total length ``dwell``; pulse j freezes it at
    ``(2j - 1) pi / 4K``.
    """
    if k < 1:
        raise ValueError("need at least one pulse")
    path = ThreeLevelPath.linear_sweep(0.0, np.pi / 2, dwell, omega=0.0)
    width = pulse_width(pulse_amp, model="three-level")
    schedule = PulseSchedule.equal_spacing(dwell, k, pulse_amp, width)
    return Experiment(
        model="three-level",
        path=path,
        schedule=schedule,
        psi_initial=_ket(1, 0, 0),
        psi_target=_ket(0, 0, 1),
        grid_step=grid_step,
        label=f"three-level-K{k}",
        meta={"k": k, "pulse_area": pipulse_area(k, pulse_amp)},
    )


def gaussian_area(tau: float, centre: float, sigma: float) -> float:
    """Area of a unit-peak Gaussian truncated to ``[0, tau]``."""
    if sigma <= 0:
        raise PhysicsError("Gaussian width must be positive")
    val, _ = quad(
        lambda t: np.exp(-((t - centre) ** 2) / sigma**2),
        0.0,
        tau,
        epsabs=1e-14,
        epsrel=1e-13,
    )
    return val


def matched_amplitude(tau: float, delay: float, sigma: float, target_area: float) -> float:
    """Peak amplitude whose truncated pump area on ``[0, tau]`` equals ``target_area``."""
    if tau <= 0 or target_area <= 0 or delay < 0:
        raise PhysicsError("matched amplitude needs positive inputs")
    area = gaussian_area(tau, 0.5 * tau + delay, sigma)
    if area <= 0:
        raise PhysicsError("degenerate Gaussian")
    return target_area / area


def stirap_tau(k: int, pulse_amp: float = mhz(8.0), dwell: float = THREE_LEVEL_DWELL) -> float:
    """Wall duration of the K-pulse sequence, used as the paired STIRAP length."""
    return k * pulse_width(pulse_amp, model="three-level") + dwell


def build_stirap(
    tau: float,
    target_area: float,
    *,
    grid_step: float = THREE_LEVEL_STEP,
    label: str = "",
) -> Experiment:
    amp = matched_amplitude(tau, tau / 10.0, tau / 6.0, target_area)
    pulses = StirapPulses(amp, tau)
    return Experiment(
        model="three-level",
        path=pulses.path(),
        schedule=PulseSchedule.empty(tau),
        psi_initial=_ket(1, 0, 0),
        psi_target=_ket(0, 0, 1),
        grid_step=grid_step,
        label=label or f"stirap-tau{tau:g}",
        stirap=pulses,
        meta={"pulse_area": target_area},
    )


def build_stirap_pair(k: int, pulse_amp: float = mhz(8.0), **kwargs) -> Experiment:
    """STIRAP run matched in duration and pump area to the K-pulse sequence."""
    return build_stirap(
        stirap_tau(k, pulse_amp),
        pipulse_area(k, pulse_amp),
        label=f"stirap-K{k}",
        **kwargs,
    )


PRESETS: dict[str, Callable[[], Experiment]] = {}
for _case in ("i", "ii", "iii"):
    for _regime in ("ideal", "practical"):
        PRESETS[f"two-level-case-{_case}-{_regime}"] = (
            lambda c=_case, r=_regime: build_two_level_case(c, r)
        )
for _k in range(1, 6):
    PRESETS[f"three-level-K{_k}"] = lambda k=_k: build_three_level_pipulse(k)
    PRESETS[f"stirap-K{_k}"] = lambda k=_k: build_stirap_pair(k)


def preset(name: str) -> Experiment:
    try:
        return PRESETS[name]()
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; see list-presets") from None
