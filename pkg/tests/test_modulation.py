from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import column, sech
from fluxon import InvalidParameterError, SeparatrixError
from fluxon import modulation as md
from fluxon.elliptic import complete_K


def test_initial_state_at_origin():
    p = sech(0.75)
    s = md.initial_state(p, 0.0)
    assert (s.p, s.q) == pytest.approx((-3.5, 11.25), abs=1e-14)
    assert s.w0.real == pytest.approx(p.a, abs=1e-12) and s.w1.real == pytest.approx(p.b, abs=1e-12)
    assert s.w0.real == pytest.approx(-6.854102, abs=1e-6)
    assert s.w1.real == pytest.approx(-0.145898, abs=1e-6)
    assert s.case_tag == "R" and s.Phi == 0.0


def test_initial_state_librational():
    s = md.initial_state(sech(0.75), 1.5)
    energy = (3.0 / np.cosh(1.5)) ** 2 / 2.0 - 1.0
    assert s.case_tag == "L"
    assert s.energy_E == pytest.approx(energy, abs=1e-14)
    assert s.m == pytest.approx(0.5 * (1.0 + energy), abs=1e-14)
    assert s.w1 == pytest.approx(np.conj(s.w0)) and s.w0.imag > 0.0


@settings(max_examples=20, deadline=None)
@given(st.floats(-4.0, 4.0).filter(lambda x: abs(abs(x) - 0.962424) > 2e-3))
def test_initial_phase_velocity_vanishes(x):
    assert abs(md.initial_state(sech(0.75), x).n_p) < 1e-14


def test_separatrix_is_excluded():
    p = sech(0.75)
    with pytest.raises(SeparatrixError):
        md.initial_state(p, p.x_crit + 5e-4)


@pytest.mark.parametrize("x", [0.3, 1.5])
def test_initial_state_solves_both_conditions(x):
    p = sech(0.75)
    s = md.initial_state(p, x)
    assert abs(md.moment_M(s.w0, s.w1, x, 0.0, p, s.signs)) <= 1e-8
    assert abs(md.integral_I(s.w0, s.w1, x, 0.0, p, s.signs)) <= 1e-8


def test_moment_time_derivative_vanishes_at_start():
    p = sech(0.75)
    s = md.initial_state(p, 0.3)
    h = 1e-5
    dm = (md.moment_M(s.w0, s.w1, 0.3, h, p, s.signs) - md.moment_M(s.w0, s.w1, 0.3, -h, p, s.signs)) / (2 * h)
    assert abs(dm) < 1e-8


def test_integral_is_sensitive_to_q():
    p = sech(0.75)
    s = md.initial_state(p, 0.3)
    w0, w1, _ = md.roots_from_pq(s.p, s.q + 1e-3)
    assert abs(md.integral_I(w0, w1, 0.3, 0.0, p, s.signs)) > 1e-6


def test_h_schwartz_symmetry_and_zero_at_minus_one():
    p = sech(0.75)
    s = md.initial_state(p, 0.3)
    for w in (-2.0 + 0.7j, -0.5 + 0.2j, -4.0 + 1.5j):
        a = md.h_function(w, s.w0, s.w1, 0.3, 0.0, p, s.signs)
        b = md.h_function(np.conj(w), s.w0, s.w1, 0.3, 0.0, p, s.signs)
        assert abs(complex(np.ravel(b)[0]) - np.conj(complex(np.ravel(a)[0]))) <= 1e-10
    assert md.find_w_plus(s.w0, s.w1, 0.3, 0.0, p, s.signs) == pytest.approx(-1.0, abs=1e-9)


def test_w_plus_continuous_in_time():
    states = column(0.75, 0.3, (0.0025, 0.005, 0.01))
    gaps = [abs(s.w_plus + 1.0) for s in states]
    assert gaps[0] < gaps[1] < gaps[2] < 0.05


def test_hat_chart_origin():
    p = sech(0.75)
    assert md.hat_MI(0.0, 0.0, 0.0, 0.0, p) == pytest.approx((0.0, 0.0), abs=1e-14)


def test_hat_jacobian_closed_form_value():
    p = sech(0.75)
    D0 = 2.0 * complete_K(4.0 / 9.0) / 3.0
    assert md.hat_jacobian_origin(p) == pytest.approx(-1.25 * D0, rel=1e-10)


@pytest.mark.parametrize("x, t", [(0.0, 0.0), (0.05, 0.02), (-0.03, 0.04)])
def test_hat_jacobian_independent_of_position(x, t):
    p = sech(0.75)
    h = 1e-6
    J = np.empty((2, 2))
    for i in range(2):
        e = np.zeros(2)
        e[i] = h
        J[:, i] = (np.array(md.hat_MI(*e, x, t, p)) - np.array(md.hat_MI(*(-e), x, t, p))) / (2 * h)
    assert np.linalg.det(J) == pytest.approx(md.hat_jacobian_origin(p), rel=1e-6)


def test_rotational_parameter_two_ways():
    s = md.initial_state(sech(0.75), 0.0)
    via_energy = 2.0 / (1.0 + s.energy_E)
    r0, r1 = np.sqrt(-s.w0.real), np.sqrt(-s.w1.real)
    via_roots = 4.0 * r0 * r1 / (r0 + r1) ** 2
    assert s.energy_E == pytest.approx(3.5, abs=1e-14)
    assert via_energy == pytest.approx(4.0 / 9.0, abs=1e-14)
    assert via_roots == pytest.approx(4.0 / 9.0, abs=1e-14)
    assert s.m == pytest.approx(4.0 / 9.0, abs=1e-14)


def test_frequency_at_origin():
    s = md.initial_state(sech(0.75), 0.0)
    omega = -3.0 * np.pi / (4.0 * complete_K(4.0 / 9.0))
    assert md.frequency_closed_form(s) == pytest.approx(omega, abs=1e-13)
    assert -s.dPhi_dt == pytest.approx(omega, abs=1e-13)
    assert s.dPhi_dx == pytest.approx(omega * s.n_p, abs=1e-13)


@pytest.mark.parametrize("x", [0.3, 1.5])
def test_frequency_consistency_after_continuation(x):
    s = column(0.75, x, (0.05,))[-1]
    assert abs(s.dPhi_dt + md.frequency_closed_form(s)) <= 1e-8
    assert s.dPhi_dx == pytest.approx(md.frequency_closed_form(s) * s.n_p, abs=1e-8)


@pytest.mark.parametrize("x, sign", [(0.3, 1.0), (1.5, -1.0)])
def test_phase_velocity_initial_drift(x, sign):
    s = column(0.75, x, (0.005,))[-1]
    assert sign * x * s.n_p > 0.0


def test_newton_states_satisfy_conditions():
    p = sech(0.75)
    for s in column(0.75, 0.3, (0.02, 0.05)):
        assert abs(md.moment_M(s.w0, s.w1, s.x, s.t, p, s.signs)) <= 1e-8
        assert abs(md.integral_I(s.w0, s.w1, s.x, s.t, p, s.signs)) <= 1e-8


def test_jacobian_formula_matches_finite_differences():
    p = sech(0.75)
    s = column(0.75, 0.3, (0.05,))[-1]
    assert md.jacobian_crosscheck(p, s) <= 1e-5


def test_charts_agree_on_overlap():
    p = sech(0.75)
    x = 0.3 * p.x_crit
    hat = md.origin_continue(p, x, 0.03)
    pq = md.newton_continue(p, md.initial_state(p, x), 0.03, steps=12)
    assert abs(hat.w0 - pq.w0) <= 1e-7 and abs(hat.w1 - pq.w1) <= 1e-7


def test_spatial_sign_derivatives_near_origin():
    p = sech(0.75)
    s = md.solve_hat(p, 0.01, 0.0, (0.0, 0.0))
    assert s.k_prec > 0.0 and s.k_succ > 0.0


def test_temporal_sign_derivatives_near_origin():
    # expected orientation: k_prec decreases and k_succ increases with t at x = 0
    p = sech(0.75)
    s = md.solve_hat(p, 0.0, 0.01, (0.0, 0.0))
    assert s.k_prec < 0.0 < s.k_succ


def test_newton_tolerance_context():
    p = sech(0.75)
    s0 = md.initial_state(p, 0.3)
    with md.newton_tolerance(1e-4):
        loose = md.newton_continue(p, s0, 0.02, steps=2)
    tight = md.newton_continue(p, s0, 0.02, steps=2)
    assert max(map(abs, tight.residual)) <= 1e-10
    assert max(map(abs, loose.residual)) <= 1e-3
    with pytest.raises(InvalidParameterError):
        with md.newton_tolerance(0.0):
            pass
