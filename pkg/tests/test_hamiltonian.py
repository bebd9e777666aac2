from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adiashort.hamiltonian import (
    PhysicsError,
    ThreeLevelPath,
    TwoLevelPath,
    accumulate_phases,
    fd_couplings,
    mhz,
    mixing_angle,
    numeric_frames,
    phase_integrals,
    three_level_frames,
    three_level_hamiltonian,
    two_level_eval,
    two_level_frames,
)


def test_mhz_is_angular():
    assert mhz(1.0) == pytest.approx(2 * np.pi)
    assert mhz(25.0) == pytest.approx(50 * np.pi)


@settings(max_examples=50, deadline=None)
@given(
    st.floats(0.05, np.pi - 0.05),
    st.floats(-np.pi, np.pi),
    st.floats(0.1, 20.0),
)
def test_two_level_eigenpairs(theta, phi, omega):
    h, frame = two_level_frames(theta, phi, 0.3, 0.2, omega)
    for n in range(2):
        v = frame.states[:, n]
        np.testing.assert_allclose(h @ v, frame.energies[n] * v, atol=1e-12)
    np.testing.assert_allclose(frame.states.conj().T @ frame.states, np.eye(2), atol=1e-12)
    np.testing.assert_allclose(frame.couplings, frame.couplings.conj().T, atol=1e-15)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.0, np.pi / 2), st.floats(0.1, 60.0), st.floats(-20.0, 20.0))
def test_three_level_eigenpairs(theta, omega, delta):
    h, frame = three_level_frames(theta, 0.0, omega, 0.0, delta)
    for n in range(3):
        v = frame.states[:, n]
        np.testing.assert_allclose(h @ v, frame.energies[n] * v, atol=1e-10 * max(1, omega))
    np.testing.assert_allclose(frame.states.conj().T @ frame.states, np.eye(3), atol=1e-12)


def test_dark_state_has_no_excited_component():
    _, frame = three_level_frames(np.linspace(0, np.pi / 2, 7), 0.0, 5.0, 0.0)
    np.testing.assert_allclose(frame.states[:, 1, 1], 0.0)
    np.testing.assert_allclose(frame.energies[:, 1], 0.0)


def test_mixing_angle_resonant_and_detuned():
    assert mixing_angle(3.0, 0.0) == pytest.approx(np.pi / 4)
    assert mixing_angle(2.0, 2.0) == pytest.approx(np.pi / 8)


def test_negative_envelope_rejected():
    with pytest.raises(PhysicsError):
        three_level_frames(0.1, 0.0, -1.0, 0.0)


def test_three_level_hamiltonian_layout():
    h = three_level_hamiltonian(2.0, 4.0, 0.5)
    np.testing.assert_allclose(h, [[0, 1, 0], [1, 0.5, 2], [0, 2, 0]])


def test_two_level_couplings_match_finite_differences():
    path = TwoLevelPath.general(np.pi / 5, 4 * np.pi / 5, 0.0, np.pi, 2.0)
    t = 0.7
    exact = two_level_frames(path.theta(t), path.phi(t), path.theta_dot(t), path.phi_dot(t), 1.0)[1]

    def states(tt):
        return two_level_frames(path.theta(tt), path.phi(tt), 0, 0, 1.0)[1].states

    np.testing.assert_allclose(fd_couplings(states, t, 1e-5), exact.couplings, atol=1e-8)
    assert exact.couplings[0, 1] == pytest.approx(path.coupling)


def test_three_level_couplings_match_finite_differences():
    theta = lambda t: 0.2 + 0.9 * t
    omega = lambda t: 3.0 + np.sin(t)
    t = 0.4

    def states(tt):
        return three_level_frames(theta(tt), 0.0, omega(tt), 0.0, 1.2)[1].states

    exact = three_level_frames(theta(t), 0.9, omega(t), np.cos(t), 1.2)[1].couplings
    np.testing.assert_allclose(fd_couplings(states, t, 1e-5), exact, atol=1e-8)


def test_path_endpoints():
    p = TwoLevelPath.general(np.pi / 5, 4 * np.pi / 5, 0.0, np.pi, 9.9)
    assert p.theta(9.9) == pytest.approx(4 * np.pi / 5)
    assert p.phi(9.9) == pytest.approx(np.pi)
    q = TwoLevelPath.parallel(np.pi / 5, 0.0, np.pi, 9.9)
    assert q.phi(9.9) == pytest.approx(np.pi)
    np.testing.assert_allclose(q.theta([0, 5, 9.9]), np.pi / 5)
    m = TwoLevelPath.meridian(0.0, np.pi, 9.9)
    assert m.theta(9.9) == pytest.approx(np.pi)
    np.testing.assert_allclose(m.background_drive([0, 1, 9.9]), 0.0)


def test_general_path_phi_rate_matches_derivative():
    p = TwoLevelPath.general(np.pi / 5, 4 * np.pi / 5, 0.0, np.pi, 9.9)
    t, h = 3.3, 1e-5
    assert p.phi_dot(t) == pytest.approx((p.phi(t + h) - p.phi(t - h)) / (2 * h), rel=1e-8)


def test_path_validation():
    with pytest.raises(PhysicsError):
        TwoLevelPath(0.0, 0.0, 0.1, 0.1, "meridian", 1.0)
    with pytest.raises(PhysicsError):
        TwoLevelPath.parallel(0.0, 0.0, 1.0, 1.0)
    with pytest.raises(PhysicsError):
        TwoLevelPath.meridian(0.0, 1.0, -1.0)
    with pytest.raises(PhysicsError):
        TwoLevelPath(0.0, 0.0, 0.1, 0.1, "general", 1.0).phi_dot(0.0)


def test_path_time_bounds():
    p = TwoLevelPath.meridian(0.0, np.pi, 1.0)
    with pytest.raises(PhysicsError):
        two_level_eval(p, 1.5, 1.0)


def test_frozen_window_has_no_couplings():
    p = TwoLevelPath.general(np.pi / 5, 4 * np.pi / 5, 0.0, np.pi, 2.0)
    _, frame = two_level_eval(p, np.full(3, 1.0), 5.0, rate=0.0)
    np.testing.assert_array_equal(frame.couplings, 0.0)


def test_numeric_frames_agree_with_analytic():
    path = ThreeLevelPath.linear_sweep(0.1, 1.2, 1.0, omega=4.0, delta=1.0)
    t = np.linspace(0.0, 1.0, 9)

    def h_of_t(tt):
        return three_level_frames(path.theta_of_t(tt), 0.0, 4.0, 0.0, 1.0)[0]

    num = numeric_frames(h_of_t, t)
    _, exact = three_level_frames(path.theta_of_t(t), path.theta_dot_of_t(t), 4.0, 0.0, 1.0)
    np.testing.assert_allclose(num.energies, exact.energies, atol=1e-12)
    # couplings are gauge dependent off the diagonal only through phases
    np.testing.assert_allclose(np.abs(num.couplings), np.abs(exact.couplings), atol=1e-7)


def test_numeric_frames_reject_degenerate_spectrum():
    with pytest.raises(PhysicsError):
        numeric_frames(lambda tt: np.zeros(np.shape(tt) + (2, 2), dtype=complex), np.linspace(0, 1, 3))


def test_phase_integrals_constant_gap():
    t = np.linspace(0.0, 0.02, 51)
    _, frame = two_level_frames(0.7, 0.3, 0.0, 0.0, np.full(t.shape, mhz(25.0)))
    dyn, geo = phase_integrals(frame, t)
    np.testing.assert_allclose(dyn[:, 0], 0.5 * mhz(25.0) * t, atol=1e-14)
    np.testing.assert_array_equal(geo, 0.0)
    ledger = accumulate_phases(frame, t)
    assert ledger.phi[-1, 0, 1] == pytest.approx(np.pi)
    np.testing.assert_allclose(ledger.phi[-1], -ledger.phi[-1].T)


def test_phase_integrals_carry_offset():
    t = np.linspace(0.0, 1.0, 11)
    _, frame = two_level_frames(0.7, 0.3, 0.0, 0.0, np.ones_like(t))
    dyn, _ = phase_integrals(frame, t, initial=(np.array([1.0, 2.0]), np.zeros(2)))
    assert dyn[0, 0] == 1.0 and dyn[0, 1] == 2.0


def test_phase_integrals_need_increasing_grid():
    _, frame = two_level_frames(0.7, 0.3, 0.0, 0.0, np.ones(3))
    with pytest.raises(PhysicsError):
        phase_integrals(frame, [0.0, 0.0, 1.0])
