from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fluxon import DomainError
from fluxon.elliptic import (
    complete_E,
    complete_K,
    elliptic_params,
    jacobi_sn_cn_dn,
    jacobi_via_theta,
    riemann_theta,
)


def _K_series(m: float, terms: int = 200) -> float:
    # K(m) = pi/2 sum ((2n)! / (2^(2n) n!^2))^2 m^n
    total, c = 0.0, 1.0
    for n in range(terms):
        total += c * c * m**n
        c *= (2 * n + 1) / (2 * n + 2)
    return 0.5 * math.pi * total


def test_complete_integrals_at_endpoints():
    assert complete_K(0.0) == pytest.approx(0.5 * np.pi, abs=1e-15)
    assert complete_E(0.0) == pytest.approx(0.5 * np.pi, abs=1e-15)
    assert complete_E(1.0) == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("m", [0.1, 0.5, 4.0 / 9.0])
def test_K_against_power_series(m):
    assert complete_K(m) == pytest.approx(_K_series(m), abs=1e-14)


def test_legendre_relation():
    assert abs(elliptic_params(0.3).legendre_defect) < 1e-14


def test_jacobi_at_zero_and_circular_limit():
    sn, cn, dn = jacobi_sn_cn_dn(0.0, 0.4)
    assert (float(sn), float(cn), float(dn)) == pytest.approx((0.0, 1.0, 1.0), abs=1e-15)
    u = np.linspace(-3, 3, 7)
    sn, cn, dn = jacobi_sn_cn_dn(u, 1e-12)
    assert np.allclose(sn, np.sin(u), atol=1e-11) and np.allclose(cn, np.cos(u), atol=1e-11)


def test_jacobi_double_angle():
    u, m = 0.7, 0.3
    s, c, d = jacobi_sn_cn_dn(u, m)
    s2, _, _ = jacobi_sn_cn_dn(2 * u, m)
    assert float(s2) == pytest.approx(float(2 * s * c * d / (1 - m * s**4)), abs=1e-14)


def test_jacobi_rejects_m_out_of_range():
    with pytest.raises(DomainError):
        jacobi_sn_cn_dn(0.1, 1.0)


@settings(max_examples=50, deadline=None)
@given(st.floats(-20.0, 20.0), st.floats(0.0, 0.99))
def test_jacobi_pythagoras(u, m):
    sn, cn, dn = jacobi_sn_cn_dn(u, m)
    assert abs(sn * sn + cn * cn - 1.0) <= 1e-12
    assert abs(dn * dn + m * sn * sn - 1.0) <= 1e-12


@settings(max_examples=50, deadline=None)
@given(st.floats(-5.0, 5.0), st.floats(0.01, 0.95))
def test_jacobi_real_period(u, m):
    a = np.array(jacobi_sn_cn_dn(u, m))
    b = np.array(jacobi_sn_cn_dn(u + 4.0 * complete_K(m), m))
    assert np.max(np.abs(a - b)) < 1e-12


def test_theta_positive_on_real_axis_and_domain():
    assert riemann_theta(0.0, -2.0).real > 0.0
    with pytest.raises(DomainError):
        riemann_theta(0.0, 0.1 + 1j)


def test_theta_quasi_period_identity():
    # shifting H by 2 pi i multiplies the n-th term by (-1)^n, i.e. shifts z by i pi
    H, z = -1.7 + 0.3j, 0.4 - 0.2j
    assert abs(riemann_theta(z, H + 2j * np.pi) - riemann_theta(z + 1j * np.pi, H)) < 1e-14


@pytest.mark.parametrize("m", [0.1, 0.4, 0.8])
def test_jacobi_theta_route_matches_agm(m):
    u = np.linspace(-4.0, 4.0, 41)
    agm = np.array(jacobi_sn_cn_dn(u, m))
    theta = np.array(jacobi_via_theta(u, m))
    assert np.max(np.abs(theta - agm)) < 1e-12
