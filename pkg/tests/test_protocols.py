from __future__ import annotations

import numpy as np
import pytest

from adiashort.hamiltonian import PhysicsError, mhz
from adiashort.protocols import (
    PRESETS,
    StirapPulses,
    build_stirap,
    build_stirap_pair,
    build_three_level_pipulse,
    build_two_level_case,
    gaussian_area,
    matched_amplitude,
    pipulse_angles,
    pipulse_area,
    preset,
    stirap_tau,
)


def simpson(f, a, b, n=4000):
    x = np.linspace(a, b, n + 1)
    y = f(x)
    return (b - a) / (3 * n) * (y[0] + y[-1] + 4 * y[1:-1:2].sum() + 2 * y[2:-1:2].sum())


def bisect_amplitude(tau, target):
    """Oracle: bisection on the Simpson area of the truncated pump Gaussian."""
    centre, sigma = 0.6 * tau, tau / 6

    def area(amp):
        return simpson(lambda t: amp * np.exp(-((t - centre) ** 2) / sigma**2), 0.0, tau)

    lo, hi = 0.0, 1e4
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if area(mid) < target else (lo, mid)
    return 0.5 * (lo + hi)


@pytest.mark.parametrize("k", [1, 3, 5])
def test_matched_amplitude_against_oracle(k):
    tau = stirap_tau(k)
    target = pipulse_area(k)
    amp = matched_amplitude(tau, tau / 10, tau / 6, target)
    assert amp == pytest.approx(bisect_amplitude(tau, target), rel=1e-9)
    exp = build_stirap_pair(k)
    area = simpson(exp.stirap.pump, 0.0, tau)
    assert area == pytest.approx(target, rel=1e-9)


def test_stirap_durations():
    assert [stirap_tau(k) for k in range(1, 6)] == pytest.approx([0.14, 0.265, 0.39, 0.515, 0.64])


def test_pipulse_area_and_angles():
    np.testing.assert_allclose(pipulse_angles(1), [np.pi / 4])
    np.testing.assert_allclose(pipulse_angles(2), [np.pi / 8, 3 * np.pi / 8])
    assert pipulse_area(1) == pytest.approx(2 * np.pi * np.sin(np.pi / 4))


def test_gaussian_area_closed_form():
    # untruncated limit
    assert gaussian_area(100.0, 50.0, 1.0) == pytest.approx(np.sqrt(np.pi), rel=1e-12)
    with pytest.raises(PhysicsError):
        gaussian_area(1.0, 0.5, 0.0)


def test_stokes_precedes_pump():
    p = StirapPulses(1.0, 1.0)
    t = np.linspace(0, 1, 1001)
    assert t[np.argmax(p.stokes(t))] < t[np.argmax(p.pump(t))]
    h = 1e-6
    assert p.pump_dot(0.3) == pytest.approx((p.pump(0.3 + h) - p.pump(0.3 - h)) / (2 * h), rel=1e-6)
    path = p.path()
    assert path.theta_of_t(0.0) < 0.1 and path.theta_of_t(1.0) > np.pi / 2 - 0.1


def test_two_level_builders():
    e = build_two_level_case("i", "ideal")
    assert e.tau_total == pytest.approx(10.0)
    assert e.schedule.delta == pytest.approx(0.02)
    p = build_two_level_case("iii", "practical")
    assert p.tau_total == pytest.approx(12.4)
    np.testing.assert_allclose(np.linalg.norm(p.psi_target), 1.0)
    with pytest.raises(ValueError):
        build_two_level_case("iv", "ideal")
    with pytest.raises(ValueError):
        build_two_level_case("i", "heroic")


def test_three_level_builder():
    e = build_three_level_pipulse(5)
    assert e.tau_total == pytest.approx(0.64)
    assert e.schedule.pulse_amp == pytest.approx(mhz(8.0))
    with pytest.raises(ValueError):
        build_three_level_pipulse(0)


def test_experiment_validation():
    with pytest.raises(PhysicsError):
        build_two_level_case("i", "ideal", grid_step=0.01)
    with pytest.raises(PhysicsError):
        build_three_level_pipulse(1).with_step(-1.0)
    with pytest.raises(PhysicsError):
        build_stirap(0.5, 1.0).__class__(
            **{**build_stirap(0.5, 1.0).__dict__, "psi_initial": np.array([1, 1, 0])}
        )


def test_presets_enumerable():
    assert len(PRESETS) == 16
    assert preset("stirap-K5").tau_total == pytest.approx(0.64)
    with pytest.raises(KeyError):
        preset("nope")


def test_evaluate_controls_inside_pulse():
    e = build_three_level_pipulse(2)
    seg = e.timeline().pulse_segments()[0]
    h, frame, ctl = e.evaluate(seg, np.linspace(seg.wall_start, seg.wall_end, 5))
    np.testing.assert_allclose(ctl.theta, np.pi / 8)
    np.testing.assert_allclose(ctl.pump, mhz(8.0) * np.sin(np.pi / 8))
    np.testing.assert_array_equal(frame.couplings, 0.0)


@pytest.mark.parametrize("k", [1, 2, 5])
def test_pipulse_area_bookkeeping(k):
    e = build_three_level_pipulse(k)
    pump = stokes = 0.0
    for seg in e.timeline().pulse_segments():
        t = np.linspace(seg.wall_start, seg.wall_end, 11)
        _, _, ctl = e.evaluate(seg, t)
        pump += np.trapezoid(ctl.pump, t)
        stokes += np.trapezoid(ctl.stokes, t)
    angles = pipulse_angles(k)
    assert pump == pytest.approx(2 * np.pi * np.sin(angles).sum(), rel=1e-6)
    assert stokes == pytest.approx(2 * np.pi * np.cos(angles).sum(), rel=1e-6)


@pytest.mark.parametrize("k", range(1, 6))
def test_stirap_pairing_is_fair(k):
    pi, st = build_three_level_pipulse(k), build_stirap_pair(k)
    assert st.tau_total == pytest.approx(pi.tau_total, abs=1e-12)
    assert simpson(st.stirap.pump, 0.0, st.tau_total) == pytest.approx(pi.meta["pulse_area"], rel=1e-6)
