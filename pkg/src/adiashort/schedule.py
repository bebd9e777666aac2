"""Pi-pulse schedules and the wall-clock timeline they induce.

A schedule splits a control path of length ``tau_path`` into K+1 segments
at the switching instants ``t_1 < ... < t_K``. At each ``t_j`` the path is
frozen for a window ``delta_j`` while a square pulse accumulates a phase of
pi between the flipped levels, so the wall-clock duration grows to
``tau_path + sum(delta_j)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Literal, Sequence

import numpy as np


class ScheduleError(ValueError):
    pass


def switching_times(tau_path, k: int, exact: bool = False):
    """Equally spaced switching instants ``(2j - 1) tau / 2K``.

    With ``exact=True`` the instants are returned as :class:`Fraction`
    values computed from the exact binary value of ``tau_path``.
    """
    if k < 1:
        raise ScheduleError("need at least one pulse")
    if tau_path <= 0:
        raise ScheduleError("tau_path must be positive")
    if exact:
        tau = Fraction(tau_path)
        return [(2 * j - 1) * tau / (2 * k) for j in range(1, k + 1)]
    j = np.arange(1, k + 1)
    return (2 * j - 1) * tau_path / (2 * k)


def segment_durations(t_switch: Sequence, tau_path):
    """``Delta(j)``: lengths of the K+1 path segments between switching times."""
    edges = [0 * tau_path, *t_switch, tau_path]
    return [b - a for a, b in zip(edges[:-1], edges[1:])]


def alternating_sum(durations: Sequence):
    """``sum_j (-1)^j Delta(j)``; exact when given Fractions."""
    return sum(d if j % 2 == 0 else -d for j, d in enumerate(durations))


# gap between the flipped levels per unit pulse amplitude, path frozen
_GAP_PER_AMP = {"two-level": 1.0, "three-level": 0.5}


def pulse_width(
    pulse_amp: float,
    target_phase: float = np.pi,
    model: Literal["two-level", "three-level"] = "two-level",
) -> float:
    """Duration of a square pulse that advances ``phi_{n,m}`` by ``target_phase``.

    With the path frozen the couplings vanish and the phase integrand is
    the bare gap: ``Omega`` for the two-level model, ``Omega/2`` for the
    adjacent pairs of the resonant three-level model.
    """
    if pulse_amp == 0:
        raise ScheduleError("pulse amplitude must be non-zero")
    if pulse_amp < 0:
        raise ScheduleError("pulse amplitude must be positive")
    return float(target_phase / (_GAP_PER_AMP[model] * pulse_amp))


@dataclass(frozen=True)
class PulseSchedule:
    t_switch: np.ndarray
    delta: np.ndarray
    pulse_amp: float
    tau_path: float

    def __post_init__(self):
        t = np.asarray(self.t_switch, dtype=float)
        d = np.asarray(self.delta, dtype=float)
        object.__setattr__(self, "t_switch", t)
        object.__setattr__(self, "delta", d)
        if self.tau_path <= 0:
            raise ScheduleError("tau_path must be positive")
        if t.shape != d.shape or t.ndim != 1:
            raise ScheduleError("need one width per switching time")
        if t.size:
            if not (t[0] > 0 and t[-1] < self.tau_path and np.all(np.diff(t) > 0)):
                raise ScheduleError("switching times must increase inside (0, tau_path)")
            if np.any(d <= 0):
                raise ScheduleError("pulse widths must be positive")
            if self.pulse_amp <= 0:
                raise ScheduleError("pulse amplitude must be positive")

    @classmethod
    def equal_spacing(cls, tau_path, k, pulse_amp, width):
        if k == 0:
            return cls.empty(tau_path)
        return cls(switching_times(tau_path, k), np.full(k, float(width)), pulse_amp, tau_path)

    @classmethod
    def empty(cls, tau_path):
        return cls(np.zeros(0), np.zeros(0), 0.0, tau_path)

    @property
    def k(self) -> int:
        return int(self.t_switch.size)

    @property
    def segment_durations(self) -> np.ndarray:
        edges = np.concatenate([[0.0], self.t_switch, [self.tau_path]])
        return np.diff(edges)

    @property
    def tau_total(self) -> float:
        return float(self.tau_path + self.delta.sum())

    def alternating_sum(self) -> float:
        return float(alternating_sum(list(self.segment_durations)))

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "t_switch_us": self.t_switch.tolist(),
            "delta_us": self.delta.tolist(),
            "pulse_amp_rad_per_us": self.pulse_amp,
            "segment_durations_us": self.segment_durations.tolist(),
            "tau_path_us": self.tau_path,
            "tau_total_us": self.tau_total,
        }


@dataclass(frozen=True)
class Segment:
    kind: Literal["path", "pulse"]
    index: int
    wall_start: float
    wall_end: float
    path_start: float
    path_end: float

    @property
    def duration(self) -> float:
        return self.wall_end - self.wall_start

    def path_time(self, t_wall):
        """Path time at wall time ``t_wall`` inside this segment."""
        t_wall = np.asarray(t_wall, dtype=float)
        if self.kind == "pulse":
            return np.full_like(t_wall, self.path_start)
        return self.path_start + (t_wall - self.wall_start)


@dataclass(frozen=True)
class Timeline:
    segments: list[Segment] = field(default_factory=list)

    @property
    def tau_total(self) -> float:
        return self.segments[-1].wall_end if self.segments else 0.0

    def path_segments(self) -> list[Segment]:
        return [s for s in self.segments if s.kind == "path"]

    def pulse_segments(self) -> list[Segment]:
        return [s for s in self.segments if s.kind == "pulse"]

    def locate(self, t_wall: float) -> Segment:
        for seg in self.segments:
            if seg.wall_start <= t_wall <= seg.wall_end:
                return seg
        raise ScheduleError(f"wall time {t_wall} outside the timeline")


def assemble_timeline(schedule: PulseSchedule) -> Timeline:
    """Interleave path segments with path-frozen pulse windows.

    Pulse j freezes the path at ``t_j``; the path resumes from the same
    point once the window closes. Windows extend the wall clock, so they
    never overlap the neighbouring path segments.
    """
    edges = np.concatenate([[0.0], schedule.t_switch, [schedule.tau_path]])
    segments = []
    wall = 0.0
    for j in range(schedule.k + 1):
        length = edges[j + 1] - edges[j]
        segments.append(Segment("path", j, wall, wall + length, edges[j], edges[j + 1]))
        wall += length
        if j < schedule.k:
            width = float(schedule.delta[j])
            t_j = float(schedule.t_switch[j])
            segments.append(Segment("pulse", j + 1, wall, wall + width, t_j, t_j))
            wall += width
    return Timeline(segments)
