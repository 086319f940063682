"""Even, bell-shaped pure-impulse profiles G(x) < 0 and their derived constants.

Two families are supported:

* ``Sech(A)``: G(x) = -4 A sech(x), with closed forms for everything.
* ``FromScrG(scrG, G0)``: G is defined implicitly through its inverse
  x(g) = int_{g^2}^{G0^2} scrG(m) dm / (m sqrt(G0^2 - m)) for x > 0.

Every profile provides the WKB phase Psi(v) = (1/2) int_0^{x(-v)} sqrt(G^2 - v^2) dx
as an analytic function of v, its derivative, and the associated w-plane phase
theta0(w) = Psi(sqrt(-w) + 1/sqrt(-w)).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .errors import InvalidParameterError, NumericError
from .quadrature import tanh_sinh


def endpoints_ab(g0: float) -> tuple[float, float]:
    """Endpoints a < -1 < b < 0 of the kink interval, defined when g0 < -2."""
    if not g0 < -2.0:
        raise InvalidParameterError(f"kink endpoints need G(0) < -2, got {g0}")
    a = -0.25 * (np.sqrt(g0 * g0 - 4.0) - g0) ** 2
    return a, 1.0 / a


def spectral_v(w):
    """v(w) = sqrt(-w) + 1/sqrt(-w), principal branch."""
    s = np.sqrt(-np.asarray(w, dtype=complex))
    return s + 1.0 / s


def spectral_v_derivative(w):
    """dv/dw = -(1 + 1/w) / (2 sqrt(-w))."""
    w = np.asarray(w, dtype=complex)
    return -(1.0 + 1.0 / w) / (2.0 * np.sqrt(-w))


@dataclass(frozen=True)
class ImpulseProfile:
    """A pure-impulse profile with its constants.

    ``analytic`` is True when theta0 has a closed-form continuation off the real
    axis; the modulation module warns when it is False.
    """

    kind: str
    params: dict = field(compare=False)
    g0: float
    l1_norm: float
    x_crit: float | None
    a: float | None
    b: float | None
    analytic: bool
    _G: Callable = field(repr=False, compare=False)
    _G_inverse: Callable = field(repr=False, compare=False)
    _psi: Callable = field(repr=False, compare=False)
    _dpsi: Callable = field(repr=False, compare=False)
    _gap_sq: Callable | None = field(default=None, repr=False, compare=False)

    def G(self, x):
        """Profile value G(x) (vectorized)."""
        return self._G(x)

    def G_inverse(self, g: float) -> float:
        """The positive x with G(x) = g, for g0 <= g < 0."""
        return self._G_inverse(g)

    def gap_sq(self, s, turning: float, to_turning):
        """G(s)^2 - G(turning)^2 given the accurate offsets to_turning = turning - s."""
        if self._gap_sq is not None:
            return self._gap_sq(s, turning, to_turning)
        return self._G(s) ** 2 - self._G(turning) ** 2

    @property
    def has_closed_form_gap(self) -> bool:
        return self._gap_sq is not None

    def psi(self, v):
        """WKB phase Psi as an analytic function of v (complex input allowed)."""
        return self._psi(v)

    def dpsi_dv(self, v):
        """dPsi/dv."""
        return self._dpsi(v)

    def theta0(self, w):
        """w-plane phase theta0(w) = Psi(v(w))."""
        return self._psi(spectral_v(w))

    def theta0_prime(self, w):
        """d theta0 / dw."""
        return self._dpsi(spectral_v(w)) * spectral_v_derivative(w)


def _x_crit(G: Callable, g0: float) -> float | None:
    if not g0 < -2.0:
        return None
    lo, hi = 0.0, 10.0 * abs(g0)
    glo = G(lo) + 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        gm = G(mid) + 2.0
        if (gm < 0.0) == (glo < 0.0):
            lo, glo = mid, gm
        else:
            hi = mid
        if hi - lo < 1e-12:
            break
    return 0.5 * (lo + hi)


def _build(kind, params, g0, l1, G, G_inverse, psi, dpsi, analytic, gap_sq=None) -> ImpulseProfile:
    a, b = endpoints_ab(g0) if g0 < -2.0 else (None, None)
    return ImpulseProfile(
        kind=kind,
        params=params,
        g0=g0,
        l1_norm=l1,
        x_crit=_x_crit(G, g0),
        a=a,
        b=b,
        analytic=analytic,
        _G=G,
        _G_inverse=G_inverse,
        _psi=psi,
        _dpsi=dpsi,
        _gap_sq=gap_sq,
    )


def make_sech_profile(A: float) -> ImpulseProfile:
    """G(x) = -4 A sech(x)."""
    if not (np.isfinite(A) and A > 0.0):
        raise InvalidParameterError(f"amplitude must be positive, got {A}")
    g0 = -4.0 * A

    def G(x):
        return g0 / np.cosh(x)

    def G_inverse(g):
        return float(np.arccosh(g0 / g))

    def psi(v):
        return np.pi * A - 0.25 * np.pi * v

    def dpsi(v):
        return -0.25 * np.pi * np.ones_like(np.asarray(v, dtype=complex))

    def gap_sq(s, turning, to_turning):
        # cosh^2 T - cosh^2 s = sinh(T + s) sinh(T - s)
        num = np.sinh(turning + s) * np.sinh(to_turning)
        return g0 * g0 * num / (np.cosh(s) * np.cosh(turning)) ** 2

    return _build("sech", {"A": A}, g0, 4.0 * np.pi * A, G, G_inverse, psi, dpsi, True, gap_sq)


def profile_from_scrG(scrG: Callable, G0: float, tol: float = 1e-12) -> ImpulseProfile:
    """Profile whose inverse is x(g) = int_{g^2}^{G0^2} scrG(m) dm / (m sqrt(G0^2 - m))."""
    if not (np.isfinite(G0) and G0 < 0.0):
        raise InvalidParameterError(f"G0 must be negative, got {G0}")
    top = G0 * G0
    probe = scrG(top * np.linspace(1e-6, 1.0 - 1e-6, 65))
    if not np.all(np.isfinite(probe)) or np.any(np.asarray(probe) <= 0.0):
        raise InvalidParameterError("scrG must be positive on (0, G0^2)")

    def x_of_g(g: float) -> float:
        # substitute m = g^2 + (top - g^2) s
        lo = g * g
        span = top - lo
        if span <= 0.0:
            return 0.0

        def f(d0, d1):
            m = lo + span * d0
            return scrG(m) * np.sqrt(span) / (m * np.sqrt(d1))

        return float(tanh_sinh(f, tol=tol))

    def G_inverse(g):
        if not G0 <= g < 0.0:
            raise InvalidParameterError(f"G_inverse needs G0 <= g < 0, got {g}")
        return x_of_g(g)

    def G_scalar(x: float) -> float:
        x = abs(float(x))
        if x == 0.0:
            return G0
        # x(g) is decreasing in y = log(-g); bracket from above
        hi = np.log(-G0)
        lo = hi - 1.0
        while x_of_g(-np.exp(lo)) < x:
            lo -= 2.0 * (hi - lo)
            if lo < -700.0:
                raise NumericError("G(x) underflow while bracketing the inverse")
        y = brentq(lambda y: x_of_g(-np.exp(y)) - x, lo, hi, xtol=1e-15, rtol=1e-15)
        return -np.exp(y)

    def G(x):
        xa = np.asarray(x, dtype=float)
        out = np.vectorize(G_scalar, otypes=[float])(xa)
        return out if out.ndim else float(out)

    def psi_scalar(v):
        c = top - v * v

        def f(d0, d1):
            m = v * v + c * d0
            return np.sqrt(d0) * scrG(m) / (m * np.sqrt(d1))

        return 0.5 * c * tanh_sinh(f, tol=tol)

    def psi(v):
        va = np.asarray(v)
        kind = complex if np.iscomplexobj(va) else float
        out = np.vectorize(psi_scalar, otypes=[kind])(va)
        return out if out.ndim else out[()]

    def dpsi(v):
        # fourth-order central difference of the analytic phase
        h = 1e-3 * abs(G0)
        v = np.asarray(v)
        return (8.0 * (psi(v + h) - psi(v - h)) - (psi(v + 2 * h) - psi(v - 2 * h))) / (12.0 * h)

    def l1():
        def f(d0, d1):
            return scrG(top * d0) / np.sqrt(d0 * d1)

        return 2.0 * float(tanh_sinh(f, tol=tol))

    return _build("scrG", {"scrG": scrG, "G0": G0}, G0, l1(), G, G_inverse, psi, dpsi, False)


def profile_constants(profile: ImpulseProfile) -> dict:
    """The constants g0, l1_norm, x_crit, a, b of a profile."""
    return {
        "g0": profile.g0,
        "l1_norm": profile.l1_norm,
        "x_crit": profile.x_crit,
        "a": profile.a,
        "b": profile.b,
    }
