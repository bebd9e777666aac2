from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adiashort.hamiltonian import mhz
from adiashort.schedule import (
    PulseSchedule,
    ScheduleError,
    alternating_sum,
    assemble_timeline,
    pulse_width,
    segment_durations,
    switching_times,
)


def test_switching_times_values():
    np.testing.assert_allclose(switching_times(9.9, 5), [0.99, 2.97, 4.95, 6.93, 8.91])
    np.testing.assert_allclose(switching_times(1.0, 1), [0.5])


@pytest.mark.parametrize("k", range(1, 9))
def test_alternating_sum_exactly_zero(k):
    tau = 9.9
    t = switching_times(tau, k, exact=True)
    assert alternating_sum(segment_durations(t, Fraction(tau))) == 0


@settings(max_examples=60, deadline=None)
@given(st.floats(1e-3, 100.0), st.integers(1, 12))
def test_alternating_sum_property(tau, k):
    exact = alternating_sum(segment_durations(switching_times(tau, k, exact=True), Fraction(tau)))
    assert exact == 0
    sched = PulseSchedule.equal_spacing(tau, k, 1.0, tau * 1e-3)
    assert abs(sched.alternating_sum()) <= 1e-12 * tau


def test_segment_durations_layout():
    d = segment_durations(switching_times(1.0, 2, exact=True), Fraction(1))
    assert d == [Fraction(1, 4), Fraction(1, 2), Fraction(1, 4)]


def test_pulse_widths():
    assert pulse_width(mhz(25.0)) == pytest.approx(0.02)
    assert pulse_width(mhz(1.0)) == pytest.approx(0.5)
    assert pulse_width(mhz(8.0), model="three-level") == pytest.approx(0.125)
    assert pulse_width(mhz(25.0), target_phase=np.pi / 2) == pytest.approx(0.01)
    with pytest.raises(ScheduleError):
        pulse_width(0.0)
    with pytest.raises(ScheduleError):
        pulse_width(-1.0)


@pytest.mark.parametrize("amp, total", [(25.0, 10.0), (1.0, 12.4)])
def test_two_level_totals(amp, total):
    s = PulseSchedule.equal_spacing(9.9, 5, mhz(amp), pulse_width(mhz(amp)))
    assert s.tau_total == pytest.approx(total)
    tl = assemble_timeline(s)
    assert tl.tau_total == pytest.approx(total)
    assert len(tl.path_segments()) == 6 and len(tl.pulse_segments()) == 5


def test_timeline_freezes_path_in_pulses():
    s = PulseSchedule.equal_spacing(1.0, 2, 10.0, 0.1)
    tl = assemble_timeline(s)
    kinds = [seg.kind for seg in tl.segments]
    assert kinds == ["path", "pulse", "path", "pulse", "path"]
    pulse = tl.pulse_segments()[0]
    np.testing.assert_allclose(pulse.path_time([pulse.wall_start, pulse.wall_end]), 0.25)
    after = tl.segments[2]
    assert after.path_time(after.wall_start) == pytest.approx(0.25)
    assert after.wall_start == pytest.approx(0.35)
    assert tl.locate(0.3) is pulse
    with pytest.raises(ScheduleError):
        tl.locate(5.0)
    for a, b in zip(tl.segments[:-1], tl.segments[1:]):
        assert a.wall_end == b.wall_start


def test_schedule_validation():
    with pytest.raises(ScheduleError):
        PulseSchedule(np.array([0.5, 0.2]), np.array([0.1, 0.1]), 1.0, 1.0)
    with pytest.raises(ScheduleError):
        PulseSchedule(np.array([0.5]), np.array([0.0]), 1.0, 1.0)
    with pytest.raises(ScheduleError):
        PulseSchedule(np.array([1.5]), np.array([0.1]), 1.0, 1.0)
    with pytest.raises(ScheduleError):
        PulseSchedule(np.array([0.5]), np.array([0.1, 0.2]), 1.0, 1.0)
    with pytest.raises(ScheduleError):
        switching_times(1.0, 0)


def test_empty_schedule():
    s = PulseSchedule.equal_spacing(2.0, 0, 1.0, 0.1)
    assert s.k == 0 and s.tau_total == 2.0
    assert [seg.kind for seg in assemble_timeline(s).segments] == ["path"]


def test_schedule_dict():
    d = PulseSchedule.equal_spacing(1.0, 2, 3.0, 0.1).to_dict()
    assert d["k"] == 2 and d["tau_total_us"] == pytest.approx(1.2)
    assert d["segment_durations_us"] == pytest.approx([0.25, 0.5, 0.25])
