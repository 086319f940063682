"""Complete elliptic integrals, Jacobi elliptic functions and the genus-one theta series.

Elliptic integrals and Jacobi functions use the arithmetic-geometric mean and the
descending Landen sequence.  The theta series is evaluated by direct summation and
is mainly used to cross-check identities.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

_AGM_TOL = 1e-16


def _agm_sequence(m: float) -> tuple[list[float], list[float], list[float]]:
    a, b, c = 1.0, np.sqrt(1.0 - m), np.sqrt(m)
    aa, bb, cc = [a], [b], [c]
    for _ in range(64):
        if abs(c) <= _AGM_TOL * a:
            break
        a, b, c = 0.5 * (a + b), np.sqrt(a * b), 0.5 * (a - b)
        aa.append(a)
        bb.append(b)
        cc.append(c)
    return aa, bb, cc


def complete_K(m: float) -> float:
    """Complete elliptic integral of the first kind K(m) = int_0^{pi/2} (1 - m sin^2)^(-1/2)."""
    if not 0.0 <= m < 1.0:
        raise DomainError(f"K(m) requires 0 <= m < 1, got {m}")
    aa, _, _ = _agm_sequence(m)
    return 0.5 * np.pi / aa[-1]


def complete_E(m: float) -> float:
    """Complete elliptic integral of the second kind E(m) = int_0^{pi/2} (1 - m sin^2)^(1/2)."""
    if not 0.0 <= m <= 1.0:
        raise DomainError(f"E(m) requires 0 <= m <= 1, got {m}")
    if m == 1.0:
        return 1.0
    aa, _, cc = _agm_sequence(m)
    s = sum(2.0 ** (n - 1) * c * c for n, c in enumerate(cc))
    return 0.5 * np.pi / aa[-1] * (1.0 - s)


def complete_K_derivative(m: float) -> float:
    """dK/dm = (E - (1 - m) K) / (2 m (1 - m))."""
    if m == 0.0:
        return np.pi / 8.0
    k, e = complete_K(m), complete_E(m)
    return (e - (1.0 - m) * k) / (2.0 * m * (1.0 - m))


def complete_E_derivative(m: float) -> float:
    """dE/dm = (E - K) / (2 m)."""
    if m == 0.0:
        return -np.pi / 8.0
    return (complete_E(m) - complete_K(m)) / (2.0 * m)


@dataclass(frozen=True)
class EllipticParams:
    """Elliptic parameter m with K(m), K(1 - m), E(m) and the theta period H0."""

    m: float
    K: float
    Kprime: float
    E_int: float
    H0: float

    @property
    def legendre_defect(self) -> float:
        ep = complete_E(1.0 - self.m)
        return self.E_int * self.Kprime + ep * self.K - self.K * self.Kprime - 0.5 * np.pi


def elliptic_params(m: float) -> EllipticParams:
    if not 0.0 < m < 1.0:
        raise DomainError(f"elliptic parameter must lie in (0, 1), got {m}")
    k, kp = complete_K(m), complete_K(1.0 - m)
    return EllipticParams(m=m, K=k, Kprime=kp, E_int=complete_E(m), H0=-2.0 * np.pi * kp / k)


def jacobi_sn_cn_dn(u, m: float):
    """Jacobi sn, cn, dn of real u at parameter 0 <= m < 1 by descending Landen/AGM."""
    u = np.asarray(u, dtype=float)
    if not 0.0 <= m < 1.0:
        raise DomainError(f"Jacobi functions require 0 <= m < 1, got {m}")
    if m == 0.0:
        return np.sin(u), np.cos(u), np.ones_like(u)
    k = complete_K(m)
    # reduce modulo the real period 4K
    ur = np.remainder(u + 2.0 * k, 4.0 * k) - 2.0 * k
    aa, _, cc = _agm_sequence(m)
    n = len(aa) - 1
    phi = 2.0**n * aa[n] * ur
    phis = [phi]
    for j in range(n, 0, -1):
        phi = 0.5 * (phi + np.arcsin(cc[j] / aa[j] * np.sin(phi)))
        phis.append(phi)
    phi0 = phis[-1]
    phi1 = phis[-2] if len(phis) > 1 else phi0
    sn = np.sin(phi0)
    cn = np.cos(phi0)
    dn = cn / np.cos(phi1 - phi0) if n > 0 else np.sqrt(1.0 - m * sn * sn)
    return sn, cn, dn


def theta_truncation(z, H: complex) -> int:
    """Number of series terms on each side needed for 1e-16 tails."""
    reh = abs(np.real(H))
    shift = np.max(np.abs(np.real(z))) / reh if np.size(z) else 0.0
    return int(np.ceil(np.sqrt(80.0 / reh))) + 4 + int(np.ceil(shift))


def riemann_theta(z, H: complex):
    """Theta(z; H) = sum_n exp(H n^2 / 2 + n z), Re H < 0."""
    H = complex(H)
    if not np.real(H) < 0.0:
        raise DomainError(f"theta series requires Re H < 0, got {H}")
    z = np.asarray(z, dtype=complex)
    nmax = theta_truncation(z, H)
    n = np.arange(-nmax, nmax + 1, dtype=float)
    expo = 0.5 * H * n**2 + np.multiply.outer(z, n)
    return np.sum(np.exp(expo), axis=-1)


def jacobi_via_theta(u, m: float):
    """sn, cn, dn from theta ratios; used to cross-check the AGM route."""
    p = elliptic_params(m)
    H0 = p.H0
    z = 1j * np.pi * np.asarray(u, dtype=float) / p.K
    th = lambda s: riemann_theta(s, H0)
    t0, tpi, th2 = th(0.0), th(1j * np.pi), th(-0.5 * H0)
    denom = th2 * th(z + 1j * np.pi)
    sn = 1j * np.exp(-0.5 * z) * t0 * th(z + 1j * np.pi - 0.5 * H0) / denom
    cn = np.exp(-0.5 * z) * tpi * th(z - 0.5 * H0) / denom
    dn = tpi * th(z) / (t0 * th(z + 1j * np.pi))
    return sn, cn, dn
