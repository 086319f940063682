from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import scattering, sech, state_at
from fluxon import (
    DeltaConfig,
    PoleKind,
    ScatteringData,
    bohr_sommerfeld,
    evaluate,
    profile_from_scrG,
)
from fluxon.exact_ist import (
    assemble_system,
    blaschke_residue,
    field_grid,
    solve_exact,
    solve_with_fallback,
    sine_gordon_residual,
    with_sign_policy,
)
from fluxon.spectra import PoleRecord


def _blaschke(w, data: ScatteringData):
    z = 1j * np.sqrt(-w)
    out = 1.0 + 0j
    for p in data.poles:
        zp = 1j * np.sqrt(-p.w)
        f = (z + zp) / (z - zp)
        out *= 1.0 / f if p.in_delta else f
    return out


def test_single_pole_residue():
    pole = PoleRecord(w=-1.0 + 0j, k=0, kind=PoleKind.BREATHER, sign=-1)
    data = ScatteringData(N=1, eps=0.5, v=np.array([2.0]), poles=(pole,))
    assert blaschke_residue(data, 0) == pytest.approx(-4.0, abs=1e-14)


@pytest.mark.parametrize("j", [0, 3, 5])
def test_residue_against_contour_average(j):
    data = scattering(0.75, 4)
    y = data.poles[j].w
    gap = min(abs(p.w - y) for i, p in enumerate(data.poles) if i != j)
    r = 0.25 * gap
    theta = np.linspace(0.0, 2 * np.pi, 400, endpoint=False)
    w = y + r * np.exp(1j * theta)
    # residue = mean of f(w) (w - y) over a circle, exact for the trapezoid rule up to O(ratio^400)
    oracle = np.mean(_blaschke(w, data) * (w - y))
    assert abs(blaschke_residue(data, j) - oracle) <= 1e-10 * abs(oracle)


def test_system_size_and_conditioning_growth():
    conds = []
    for N in (4, 8):
        s = assemble_system(with_sign_policy(scattering(0.75, N), 0.3), 0.3, 0.05)
        assert s.matrix.shape == (4 * N, 4 * N)
        conds.append(s.cond_estimate)
    assert conds[1] > conds[0] >= 1.0


@pytest.mark.parametrize("x", [50.0, -50.0])
def test_far_field_is_vacuum(x):
    s = solve_exact(with_sign_policy(scattering(0.75, 8), x), x, 0.1)
    assert (s.cos_half, s.sin_half, s.eps_ut) == pytest.approx((1.0, 0.0, 0.0), abs=1e-12)


def test_single_node_grid_matches_pointwise():
    data = scattering(0.75, 8)
    table = field_grid(data, [0.7], [0.12])
    direct = solve_exact(with_sign_policy(data, 0.7), 0.7, 0.12)
    assert table.samples[0][0] == direct
    assert not table.failures


def test_residual_of_constant_field_is_zero():
    assert sine_gordon_residual(0.0, 0.0, 0.0, 0.0, 0.0, 0.1, 0.2) == 0.0
    assert sine_gordon_residual(4 * np.pi, 0.0, 8 * np.pi, 0.0, 0.0, 0.1, 0.2) < 1e-12


def test_residual_of_travelling_kink_is_second_order():
    eps, speed = 0.2, 0.4
    gamma = 1.0 / np.sqrt(1.0 - speed**2)

    def u(x, t):
        return 4.0 * np.arctan(np.exp(gamma * (x - speed * t) / eps))

    res = []
    for h in (1e-2, 5e-3):
        x, t = 0.03, 0.01
        res.append(sine_gordon_residual(u(x, t), u(x + h, t), u(x - h, t), u(x, t + h), u(x, t - h), h, eps))
    assert res[1] < 0.3 * res[0]


@settings(max_examples=10, deadline=None)
@given(st.floats(0.1, 2.5), st.floats(0.0, 0.2))
def test_exact_solution_even_in_x(x, t):
    data = scattering(0.75, 4)
    a = solve_exact(with_sign_policy(data, x), x, t)
    b = solve_exact(with_sign_policy(data, -x), -x, t)
    assert abs(a.cos_half - b.cos_half) < 1e-10
    assert abs(a.sin_half - b.sin_half) < 1e-10
    assert abs(a.eps_ut - b.eps_ut) < 1e-10


def test_fallback_agrees_when_well_conditioned():
    data = scattering(0.75, 8)
    sample, cond, config = solve_with_fallback(data, 1.5, 0.1)
    assert config is DeltaConfig.DELTA_EMPTY and cond < 1e12
    assert sample == solve_exact(with_sign_policy(data, 1.5), 1.5, 0.1)


@pytest.mark.parametrize("x", [0.0, 0.2])
def test_fallback_split_is_better_conditioned_and_agrees(x):
    data = scattering(0.75, 8)
    base = assemble_system(with_sign_policy(data, x), x, 0.05).cond_estimate
    sample, cond, config = solve_with_fallback(data, x, 0.05, cond_cap=0.5 * base)
    assert cond < 1e-3 * base
    assert config not in (DeltaConfig.DELTA_EMPTY, DeltaConfig.NABLA_EMPTY)
    # the field does not depend on the Delta assignment, only the conditioning does
    ref = solve_exact(with_sign_policy(data, x), x, 0.05, cond_cap=1e20)
    assert abs(sample.cos_half - ref.cos_half) < 1e-10
    assert abs(sample.sin_half - ref.sin_half) < 1e-10
    assert abs(sample.eps_ut - ref.eps_ut) < 1e-9


def test_exact_close_to_leading_order_wavetrain():
    data = scattering(0.75, 8)
    exact = solve_exact(with_sign_policy(data, 1.5), 1.5, 0.25)
    approx = evaluate(state_at(0.75, 1.5, 0.25), data.eps)
    assert abs(exact.cos_half - approx.cos_half) <= 0.15
    assert abs(exact.sin_half - approx.sin_half) <= 0.15


def test_initial_data_error_decreases_for_weighted_profile():
    # weighted profile whose WKB data are not exact, so the t = 0 error is genuinely O(eps)
    q = profile_from_scrG(lambda m: 1.0 + 0.5 * np.asarray(m) / 9.0, -3.0)
    xs = (-2.5, -1.5, -1.0, 1.0, 1.5, 2.5)
    sup = {}
    for N in (8, 16):
        data = bohr_sommerfeld(q, N)
        sup[N] = max(abs(solve_exact(with_sign_policy(data, x), x, 0.0).eps_ut - float(q.G(x)))
                     for x in xs)
    assert sup[16] < 0.5 * sup[8]
