from __future__ import annotations

from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import column, scattering, sech
from fluxon import DomainError
from fluxon import modulation as md
from fluxon.asymptotics import (
    differential_consistency,
    evaluate,
    evaluate_librational,
    evaluate_rotational,
    fast_argument,
    theta_crosscheck,
)


@pytest.mark.parametrize("x", [0.0, 0.4, 1.5, 2.5])
def test_initial_wavetrain_reproduces_profile(x):
    p = sech(0.75)
    s = md.initial_state(p, x)
    sample = evaluate(s, 0.1)
    assert fast_argument(s, 0.1) == 0.0
    assert sample.eps_ut == pytest.approx(float(p.G(x)), abs=1e-13)
    assert (sample.cos_half, sample.sin_half) == pytest.approx((1.0, 0.0), abs=1e-15)


def test_profile_values_at_sample_points():
    p = sech(0.75)
    assert evaluate(md.initial_state(p, 0.0), 0.1).eps_ut == pytest.approx(-3.0, abs=1e-13)
    assert evaluate(md.initial_state(p, 1.5), 0.1).eps_ut == pytest.approx(-1.2752881, abs=1e-7)


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([0.3, 1.5]), st.floats(-50.0, 50.0), st.sampled_from([0.05, 0.1, 0.2]))
def test_wavetrain_on_unit_circle(x, phase, eps):
    s = md.initial_state(sech(0.75), x)
    sample = evaluate(replace(s, Phi=phase), eps)
    assert abs(sample.cos_half**2 + sample.sin_half**2 - 1.0) <= 1e-12


def test_case_mismatch_is_rejected():
    p = sech(0.75)
    with pytest.raises(DomainError):
        evaluate_librational(md.initial_state(p, 0.3), 0.1)
    with pytest.raises(DomainError):
        evaluate_rotational(md.initial_state(p, 1.5), 0.1)


@pytest.mark.parametrize("case, delta", [("L", 0), ("R", 0), ("R", 1)])
def test_theta_route_periodic_in_fast_phase(case, delta):
    a = theta_crosscheck(case, 0.8, delta, m=0.4)
    b = theta_crosscheck(case, 0.8 + 2.0 * np.pi, delta, m=0.4)
    assert abs(a.C_theta - b.C_theta) < 1e-12 and abs(a.S_theta - b.S_theta) < 1e-12


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(["L", "R"]), st.floats(-6.0, 6.0), st.floats(0.05, 0.9))
def test_theta_route_matches_jacobi(case, nu, m):
    assert theta_crosscheck(case, nu, 0, m=m).discrepancy < 1e-12


def test_rotational_theta_at_zero_phase():
    for delta, sign in ((0, 1.0), (1, -1.0)):
        r = theta_crosscheck("R", 0.0, delta, m=4.0 / 9.0)
        assert r.C_theta == pytest.approx(sign, abs=1e-13)
        assert r.S_theta == pytest.approx(0.0, abs=1e-13)


def test_librational_odd_delta_rejected():
    with pytest.raises(DomainError):
        theta_crosscheck("L", 0.3, 1, m=0.4)


@pytest.mark.parametrize("x", [0.3, 1.5])
def test_frozen_state_satisfies_differential_relations(x):
    # a frozen state is an exact travelling wave, so only the O(h^2) difference error remains
    eps = 0.05
    base = md.initial_state(sech(0.75), x)
    res = {}
    for h in (1e-5, 1e-6):
        states = [replace(base, t=k * h, Phi=base.dPhi_dt * k * h) for k in range(7)]
        res[h] = differential_consistency(states, eps).max_residual
    assert res[1e-6] <= 1e-8
    assert res[1e-6] < 0.02 * res[1e-5]


def test_continued_states_satisfy_differential_relations():
    eps = scattering(0.75, 16).eps
    h = 1e-3
    states = column(0.75, 1.5, tuple(0.1 + h * k for k in range(7)))
    assert differential_consistency(states, eps).max_residual <= 5e-2


def test_consistency_needs_uniform_spacing():
    states = column(0.75, 1.5, (0.01, 0.02, 0.03, 0.05, 0.06))
    with pytest.raises(DomainError):
        differential_consistency(states, 0.1)
