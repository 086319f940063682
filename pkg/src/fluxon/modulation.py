"""Moment and integral conditions for the genus-one band endpoints and their continuation.

The band endpoints w0, w1 are the roots of R(w)^2 = (w - p)^2 - q.  Case L has
complex-conjugate roots (q < 0, Im w0 > 0); case R has real roots a <= w0 < w1 <= b.
They are fixed at each (x, t) by M = 0 and I = 0, where

    M = (x - t)/sqrt(Pi) + x + t + (4/pi) sum_pieces sign * int F(xi) dxi,
    F(xi) = theta0'(xi) sqrt(-xi) / R(xi),   sqrt(Pi) = sqrt(-w0) sqrt(-w1),

and I is the real part of int R(xi) H(xi) dxi along the band from its lower end
to xi = 1 in the upper half-plane.  The gap pieces and their orientation:

* case R: a -> w0 (sign s_prec) and b -> w1 (sign s_succ);
* case L: a -> j and b -> j on the real axis, then straight lines j -> w0 and
  j -> conj(w0), all with one sign s.  The junction j is a real point left of p.

Sign +1 everywhere corresponds to an empty Delta, -1 to an empty Nabla.
The radical R on the gap is the boundary branch: negative on the real pieces
and equal to the straight-cut branch (cut on the segment joining the roots,
R ~ w at infinity) on the lines.
"""

from __future__ import annotations

import warnings
from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq

from .elliptic import complete_K
from .errors import (
    ContinuationError,
    DomainError,
    ExcludedCurveError,
    InvalidParameterError,
    NumericError,
    SeparatrixError,
)
from .profiles import ImpulseProfile
from .quadrature import gauss_legendre01, segment_points, tanh_sinh_rule

GAMMA_LEVEL = 5
ROOT_LEVEL = 9
PATH_LEVEL = 4
HAT_LEVEL = 6
ARC_NODES = 96
SEPARATRIX_MARGIN = 1e-3
EXCLUDED_MARGIN = 1e-4
CHART_FRACTION = 0.05
NEWTON_TOL = 1e-11


def radical_straight(w, p: float, q: float):
    """R(w) with its cut on the segment joining the roots and R(w) ~ w at infinity."""
    d = np.asarray(w, dtype=complex) - p
    return d * np.sqrt(1.0 - q / (d * d))


def roots_from_pq(p: float, q: float) -> tuple[complex, complex, str]:
    if q < 0.0:
        r = np.sqrt(-q)
        return complex(p, r), complex(p, -r), "L"
    r = np.sqrt(q)
    return complex(p - r), complex(p + r), "R"


def radical_from_offsets(xi, p: float, off0, off1):
    """Straight-cut R(xi) from accurate root offsets: (xi - p) sqrt(off0 off1 / (xi - p)^2)."""
    d = np.asarray(xi, dtype=complex) - p
    return d * np.sqrt(off0 * off1 / (d * d))


@dataclass
class _Pieces:
    xi: np.ndarray
    fw: np.ndarray  # sign * F * dxi weights
    off0: np.ndarray  # xi - w0, accurate near w0


class Geometry:
    """Quadrature data for M, H and I at fixed roots, (x, t) and orientation signs."""

    def __init__(self, profile: ImpulseProfile, w0: complex, w1: complex, x: float, t: float,
                 signs: tuple[int, int], level: int | None = None):
        self.profile = profile
        self.w0, self.w1 = complex(w0), complex(w1)
        self.x, self.t = float(x), float(t)
        self.signs = signs
        self.p = float(np.real(0.5 * (self.w0 + self.w1)))
        qc = (0.5 * (self.w1 - self.w0)) ** 2
        self.q = float(np.real(qc))
        self.case = "L" if abs(self.w0.imag) > 0.0 else "R"
        self.sqrt_pi = float(np.real(np.sqrt(-self.w0) * np.sqrt(-self.w1)))
        self.junction = None
        self.level = GAMMA_LEVEL if level is None else level
        self._pieces = self._build_pieces()

    # --- gap geometry -------------------------------------------------------------
    def _F(self, xi, radical):
        th = self.profile.theta0_prime(xi)
        return th * np.sqrt(-xi) / radical

    def _build_pieces(self) -> _Pieces:
        d0, d1, wts = tanh_sinh_rule(self.level)
        a, b = self.profile.a, self.profile.b
        xs, fws, offs = [], [], []
        w0, w1 = self.w0, self.w1
        if self.case == "R":
            s_prec, s_succ = self.signs
            for start, end, sgn, at0 in ((a, w0.real, s_prec, True), (b, w1.real, s_succ, False)):
                span = end - start
                if abs(span) <= 1e-13 * (b - a):
                    continue
                xi = segment_points(start, end, d0, d1).real
                near = d0 > d1
                if at0:
                    off0 = np.where(near, -span * d1, xi - w0.real)
                    off1 = xi - w1.real
                else:
                    off0 = xi - w0.real
                    off1 = np.where(near, -span * d1, xi - w1.real)
                rad = -np.sqrt(off0 * off1)
                xs.append(xi + 0j)
                fws.append(sgn * self._F(xi + 0j, rad) * span * wts)
                offs.append(off0 + 0j)
        else:
            sgn = self.signs[0]
            j = -1.0 if self.p > -1.0 + 1e-3 else 0.5 * (a + self.p)
            self.junction = j
            for start in (a, b):
                span = j - start
                xi = segment_points(start, j, d0, d1).real
                rad = -np.sqrt((xi - self.p) ** 2 - self.q)
                xs.append(xi + 0j)
                fws.append(sgn * self._F(xi + 0j, rad) * span * wts)
                offs.append(xi - w0)
            for end in (w0, w1):
                span = end - j
                xi = segment_points(j, end, d0, d1)
                near = d0 > d1
                off_end = np.where(near, -span * d1, xi - end)
                if end == w0:
                    off0, off1 = off_end, xi - w1
                else:
                    off0, off1 = xi - w0, off_end
                rad = radical_from_offsets(xi, self.p, off0, off1)
                xs.append(xi)
                fws.append(sgn * self._F(xi, rad) * span * wts)
                offs.append(off0)
        if not xs:
            return _Pieces(np.zeros(0, complex), np.zeros(0, complex), np.zeros(0, complex))
        return _Pieces(np.concatenate(xs), np.concatenate(fws), np.concatenate(offs))

    # --- M, H, I ------------------------------------------------------------------
    def moment(self) -> float:
        val = (self.x - self.t) / self.sqrt_pi + self.x + self.t
        val += 4.0 / np.pi * np.sum(self._pieces.fw)
        return float(np.real(val))

    def h_gamma(self, w, off0=None):
        """Gap form of H; off0 = w - w0 may be supplied for points close to w0."""
        w = np.atleast_1d(np.asarray(w, dtype=complex))
        P = self._pieces
        if off0 is None:
            denom = P.xi[None, :] - w[:, None]
        else:
            off0 = np.atleast_1d(np.asarray(off0, dtype=complex))
            denom = P.off0[None, :] - off0[:, None]
        cauchy = np.sum(P.fw[None, :] / denom, axis=1)
        sq = np.sqrt(-w)
        return -(self.x - self.t) / (4.0 * w * sq * self.sqrt_pi) + cauchy / (np.pi * sq)

    def band_start(self) -> float:
        """A real band point used to start the case-R band path."""
        lo, hi = self.w0.real, self.w1.real
        span = hi - lo
        return float(np.clip(-1.0, lo + 0.1 * span, hi - 0.1 * span))

    def _band_path(self):
        """Nodes, weights (with dxi) and w0-offsets of the band path to xi = 1 in C+."""
        if self.case == "R":
            s = self.band_start()
            c, r = 0.5 * (s + 1.0), 0.5 * (1.0 - s)
            u, wu = gauss_legendre01(ARC_NODES)
            ang = np.pi * (1.0 - u)
            xi = c + r * np.exp(1j * ang)
            dxi = -1j * np.pi * r * np.exp(1j * ang) * wu
            return xi, dxi, xi - self.w0
        d0, d1, wts = tanh_sinh_rule(PATH_LEVEL)
        span = 1.0 - self.w0
        xi = segment_points(self.w0, 1.0 + 0j, d0, d1)
        off0 = np.where(d0 <= d1, span * d0, xi - self.w0)
        # nodes that round onto w0 carry R = 0 and would divide by zero in H
        keep = np.abs(off0) > 1e-150 * abs(span)
        return xi[keep], (span * wts)[keep], off0[keep]

    def _band_radical(self, xi, off0):
        if self.case == "R":
            return radical_straight(xi, self.p, self.q)
        return radical_from_offsets(xi, self.p, off0, xi - self.w1)

    def integral(self) -> float:
        xi, dxi, off0 = self._band_path()
        rad = self._band_radical(xi, off0)
        use_off = off0 if self.case == "L" else None
        h = self.h_gamma(xi, off0=use_off)
        val = np.real(np.sum(rad * h * dxi))
        if self.case == "L":
            val -= self.signs[0] * np.imag(self.profile.theta0(self.w0))
        return float(val)

    def band_kernel(self, wk: complex) -> complex:
        """int_{C+} R/(sqrt(-xi)(xi - wk)) + int_{C-} R/(sqrt(-xi)(xi - wk)), C- the mirror path."""
        xi, dxi, off0 = self._band_path()
        rad = self._band_radical(xi, off0)
        g = rad / np.sqrt(-xi)
        if self.case == "L":
            # the path starts at w0; use the accurate offsets there
            du = off0 if wk == self.w0 else xi - wk
            dl = off0 if np.conj(wk) == self.w0 else xi - np.conj(wk)
        else:
            du, dl = xi - wk, xi - np.conj(wk)
        upper = np.sum(g / du * dxi)
        lower = np.conj(np.sum(g / dl * dxi))
        return complex(upper + lower)

    def dI_dt(self) -> float:
        xi, dxi, off0 = self._band_path()
        rad = self._band_radical(xi, off0)
        return float(np.real(np.sum(rad / (xi * np.sqrt(-xi)) * dxi)) / (4.0 * self.sqrt_pi))

    # --- H near the roots ---------------------------------------------------------
    def _residue_term(self, w, radical, sign):
        return sign * self.profile.theta0_prime(w) / (1j * radical)

    def h_at_root(self, k: int, n: int = 64) -> complex:
        """H(w_k) as the mean of the analytic H over a small circle around w_k.

        The circle crosses the gap contour, so the Cauchy integral there is taken
        on a denser rule than the one used for M and I.
        """
        if self.level < ROOT_LEVEL:
            dense = Geometry(self.profile, self.w0, self.w1, self.x, self.t, self.signs, ROOT_LEVEL)
            return dense.h_at_root(k, n)
        wk = self.w0 if k == 0 else self.w1
        if self.case == "L" and k == 1:
            return np.conj(self.h_at_root(0, n))
        others = [self.profile.a, self.profile.b, 0.0, self.w1 if k == 0 else self.w0]
        if self.junction is not None:
            others.append(self.junction)
        dist = min(abs(wk - o) for o in others if abs(wk - o) > 0.0)
        rad_c = 0.25 * dist
        ang = 2.0 * np.pi * (np.arange(n) + 0.5) / n
        offs = rad_c * np.exp(1j * ang)
        w = wk + offs
        if k == 0:
            rs = radical_from_offsets(w, self.p, offs, w - self.w1)
        else:
            rs = radical_from_offsets(w, self.p, w - self.w0, offs)
        if self.case == "R":
            sign = self.signs[0] if k == 0 else self.signs[1]
            if k == 0:
                # flow a -> w0 -> band runs rightward: left side is above
                left = w.imag > 0.0
                r_boundary = rs
            else:
                # flow b -> w1 -> band runs leftward: left side is below
                left = w.imag < 0.0
                r_boundary = -rs
            hg = self.h_gamma(w, off0=(offs if k == 0 else None))
        else:
            sign = self.signs[0]
            beta_ray = np.angle(1.0 - wk)
            gamma_ray = np.angle(self.junction - wk)
            rel = np.mod(ang - beta_ray, 2.0 * np.pi)
            left = rel < np.mod(gamma_ray - beta_ray, 2.0 * np.pi)
            # the lune between the chord and the band arc, where the boundary branch is -R
            a_rel = np.mod(ang + 0.5 * np.pi, 2.0 * np.pi)
            lune = a_rel < np.mod(beta_ray + 0.5 * np.pi, 2.0 * np.pi)
            r_boundary = np.where(lune, -rs, rs)
            hg = self.h_gamma(w, off0=offs)
        corr = self._residue_term(w, r_boundary, sign)
        vals = hg + np.where(left, corr, -corr)
        return complex(np.mean(vals))

    def h_band(self, xi: float, band_sign: int) -> float:
        """H on the real band (case R), including the residue term; real-valued."""
        w = np.array([complex(xi)])
        rad_above = 1j * np.sqrt((xi - self.w0.real) * (self.w1.real - xi))
        val = self.h_gamma(w)[0] + band_sign * self.profile.theta0_prime(w)[0] / (1j * rad_above)
        return float(np.real(val))


def band_sign(signs: tuple[int, int], case: str) -> int:
    if case == "L":
        return signs[0]
    return -1 if signs == (-1, -1) else 1


def moment_M(w0, w1, x, t, profile, signs=(1, 1)) -> float:
    return Geometry(profile, w0, w1, x, t, _as_signs(signs)).moment()


def integral_I(w0, w1, x, t, profile, signs=(1, 1)) -> float:
    return Geometry(profile, w0, w1, x, t, _as_signs(signs)).integral()


def h_function(w, w0, w1, x, t, profile, signs=(1, 1)):
    """Gap form of H at points w off the contours."""
    return Geometry(profile, w0, w1, x, t, _as_signs(signs)).h_gamma(w)


def _as_signs(signs) -> tuple[int, int]:
    if isinstance(signs, (int, np.integer)):
        return (int(signs), int(signs))
    return (int(signs[0]), int(signs[1]))


def find_w_plus(w0, w1, x, t, profile, signs=(1, 1)) -> float:
    """The zero of H on the real band (case R)."""
    g = Geometry(profile, w0, w1, x, t, _as_signs(signs))
    if g.case != "R":
        raise DomainError("w_plus is defined in case R only")
    s = band_sign(g.signs, "R")
    lo, hi = g.w0.real, g.w1.real
    delta = 1e-6 * (hi - lo)
    f = lambda xi: g.h_band(xi, s)
    grid = np.linspace(lo + delta, hi - delta, 41)
    vals = np.array([f(v) for v in grid])
    idx = np.nonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))[0]
    if len(idx) == 0:
        raise NumericError("H has no sign change on the band")
    # the crossing closest to -1
    i = idx[np.argmin(np.abs(grid[idx] + 1.0))]
    return brentq(f, grid[i], grid[i + 1], xtol=1e-14)


# --- derived fields -----------------------------------------------------------------


@dataclass(frozen=True)
class ModulationState:
    x: float
    t: float
    case_tag: str
    w0: complex
    w1: complex
    p: float
    q: float
    signs: tuple[int, int] = (1, 1)
    w_plus: float | None = None
    n_p: float = 0.0
    energy_E: float = 0.0
    m: float = 0.5
    dPhi_dx: float = 0.0
    dPhi_dt: float = 0.0
    Phi: float = 0.0
    k_prec: float | None = None
    k_succ: float | None = None
    residual: tuple[float, float] = (0.0, 0.0)
    chart: str = "pq"

    @property
    def sqrt_pi(self) -> float:
        return float(np.real(np.sqrt(-self.w0) * np.sqrt(-self.w1)))


def scale_D(case: str, p: float, q: float) -> float:
    """The period normalization D: K(m)/Pi^(1/4) (case L) or 2K(m)/(sqrt(-w0)+sqrt(-w1)) (case R)."""
    sp = np.sqrt(p * p - q)
    energy = -p / sp
    if case == "L":
        return complete_K(0.5 * (1.0 + energy)) / np.sqrt(sp)
    return 2.0 * complete_K(2.0 / (1.0 + energy)) / (np.sqrt(-p + np.sqrt(q)) + np.sqrt(-p - np.sqrt(q)))


def field_values(case: str, p: float, q: float) -> dict:
    sp = np.sqrt(p * p - q)
    energy = -p / sp
    n_p = (1.0 - sp) / (1.0 + sp)
    m = 0.5 * (1.0 + energy) if case == "L" else 2.0 / (1.0 + energy)
    if not 0.0 < m < 1.0:
        raise DomainError(f"elliptic parameter {m} outside (0, 1)")
    D = scale_D(case, p, q)
    return {
        "n_p": float(n_p),
        "energy_E": float(energy),
        "m": float(m),
        "dPhi_dx": float(np.pi / (4.0 * D) * (1.0 - 1.0 / sp)),
        "dPhi_dt": float(np.pi / (4.0 * D) * (1.0 + 1.0 / sp)),
    }


def derived_fields(state: ModulationState) -> ModulationState:
    return replace(state, **field_values(state.case_tag, state.p, state.q))


def frequency_closed_form(state: ModulationState) -> float:
    """Frequency in the form stated for each case, from (n_p, E, m) only."""
    K = complete_K(state.m)
    root = np.sqrt(1.0 - state.n_p**2)
    if state.case_tag == "L":
        return -np.pi / (2.0 * K * root)
    e = state.energy_E
    s = np.sqrt(e * e - 1.0)
    return -np.pi / (2.0 * K) * 0.5 * (np.sqrt(e + s) + np.sqrt(e - s)) / root


# --- t = 0 and Newton continuation ----------------------------------------------------


def _check_profile(profile: ImpulseProfile) -> None:
    if not profile.analytic:
        warnings.warn(
            "profile phase has no closed-form continuation off the real axis; "
            "modulation results are not validated",
            stacklevel=3,
        )


def initial_state(profile: ImpulseProfile, x: float) -> ModulationState:
    """Closed-form roots at t = 0: p = 1 - G(x)^2 / 2, q = p^2 - 1."""
    _check_profile(profile)
    if profile.x_crit is not None and abs(abs(x) - profile.x_crit) < SEPARATRIX_MARGIN:
        raise SeparatrixError(f"|x| = {abs(x)} is within {SEPARATRIX_MARGIN} of x_crit")
    g = float(profile.G(x))
    p = 1.0 - 0.5 * g * g
    q = p * p - 1.0
    w0, w1, case = roots_from_pq(p, q)
    sgn = 1 if x >= 0.0 else -1
    state = ModulationState(x=float(x), t=0.0, case_tag=case, w0=w0, w1=w1, p=p, q=q,
                            signs=(sgn, sgn))
    if case == "R":
        a, b = profile.a, profile.b
        kp = sgn * np.sqrt(max(w0.real - a, 0.0))
        ks = sgn * np.sqrt(max(b - w1.real, 0.0))
        state = replace(state, w_plus=-1.0, k_prec=float(kp), k_succ=float(ks))
    return derived_fields(state)


def _residuals_pq(profile, p, q, x, t, signs, case):
    w0, w1, c = roots_from_pq(p, q)
    if c != case:
        raise NumericError("case changed during Newton iteration")
    if case == "R" and (w0.real < profile.a or w1.real > profile.b):
        raise NumericError("root left the interval [a, b]")
    g = Geometry(profile, w0, w1, x, t, signs)
    return np.array([g.moment(), g.integral()])


_newton_tol: ContextVar[float] = ContextVar("newton_tol", default=NEWTON_TOL)


@contextmanager
def newton_tolerance(tol: float):
    """Temporarily change the residual tolerance of every Newton solve in this context."""
    if not tol > 0.0:
        raise InvalidParameterError(f"Newton tolerance must be positive, got {tol}")
    token = _newton_tol.set(float(tol))
    try:
        yield
    finally:
        _newton_tol.reset(token)


def _newton(fun, y0, tol=None, max_iter=30, rel_step=1e-7):
    tol = _newton_tol.get() if tol is None else tol
    y = np.array(y0, dtype=float)
    f = fun(y)
    for _ in range(max_iter):
        if np.max(np.abs(f)) <= tol:
            return y, f
        J = np.empty((2, 2))
        for i in range(2):
            h = rel_step * max(1.0, abs(y[i]))
            e = np.zeros(2)
            e[i] = h
            J[:, i] = (fun(y + e) - fun(y - e)) / (2.0 * h)
        step = np.linalg.solve(J, -f)
        lam = 1.0
        for _ in range(12):
            try:
                fn = fun(y + lam * step)
                if np.max(np.abs(fn)) < np.max(np.abs(f)) or np.max(np.abs(fn)) <= tol:
                    break
            except NumericError:
                pass
            lam *= 0.5
        else:
            raise NumericError("Newton stagnated")
        y = y + lam * step
        f = fn
    if np.max(np.abs(f)) <= tol * 10:
        return y, f
    raise NumericError(f"Newton did not converge, residual {np.max(np.abs(f)):.3e}")


def solve_pq(profile, x, t, guess: ModulationState) -> ModulationState:
    """Newton on (M, I) over (p, q) from a nearby state."""
    fun = lambda y: _residuals_pq(profile, y[0], y[1], x, t, guess.signs, guess.case_tag)
    y, f = _newton(fun, [guess.p, guess.q])
    w0, w1, case = roots_from_pq(y[0], y[1])
    st = ModulationState(x=float(x), t=float(t), case_tag=case, w0=w0, w1=w1, p=float(y[0]),
                         q=float(y[1]), signs=guess.signs, residual=(float(f[0]), float(f[1])),
                         Phi=guess.Phi, chart="pq")
    if case == "R":
        a, b = profile.a, profile.b
        st = replace(st, k_prec=guess.signs[0] * np.sqrt(w0.real - a),
                     k_succ=guess.signs[1] * np.sqrt(b - w1.real))
    return derived_fields(st)


# --- near-origin chart --------------------------------------------------------------


class HatChart:
    """M, I and H in the square-root coordinates w0 = a + k_prec^2, w1 = b - k_succ^2."""

    def __init__(self, profile: ImpulseProfile, k_prec: float, k_succ: float, x: float, t: float):
        self.profile = profile
        self.kp, self.ks = float(k_prec), float(k_succ)
        self.x, self.t = float(x), float(t)
        a, b = profile.a, profile.b
        self.a, self.b = a, b
        kp2, ks2 = self.kp**2, self.ks**2
        self.w0, self.w1 = a + kp2, b - ks2
        self.root_pi = np.sqrt(1.0 - a * ks2 + b * kp2 - kp2 * ks2)
        d0, d1, wts = tanh_sinh_rule(HAT_LEVEL)
        s = d0
        # prec piece: xi = a + kp^2 s
        xp = a + kp2 * s
        gp = np.real(profile.theta0_prime(xp + 0j)) * np.sqrt(-xp)
        gp = gp / (np.sqrt(d1) * np.sqrt(b - a - ks2 - kp2 * s))
        # succ piece: xi = b - ks^2 s
        xs = b - ks2 * s
        gs = np.real(profile.theta0_prime(xs + 0j)) * np.sqrt(-xs)
        gs = gs / (np.sqrt(d1) * np.sqrt(b - a - kp2 - ks2 * s))
        self._xp, self._gp, self._xs, self._gs, self._w = xp, gp, xs, gs, wts

    def moment(self) -> float:
        val = (self.x - self.t) / self.root_pi + self.x + self.t
        val -= 4.0 * self.kp / np.pi * np.sum(self._gp * self._w)
        val += 4.0 * self.ks / np.pi * np.sum(self._gs * self._w)
        return float(val)

    def h(self, w):
        w = np.atleast_1d(np.asarray(w, dtype=complex))
        cp = np.sum(self._gp * self._w / (self._xp[None, :] - w[:, None]), axis=1)
        cs = np.sum(self._gs * self._w / (self._xs[None, :] - w[:, None]), axis=1)
        inner = (self.x - self.t) / (w * self.root_pi) + 4.0 * self.kp / np.pi * cp
        inner -= 4.0 * self.ks / np.pi * cs
        return -inner / (4.0 * np.sqrt(-w))

    def integral(self) -> float:
        p = 0.5 * (self.w0 + self.w1)
        q = (0.5 * (self.w1 - self.w0)) ** 2
        span = self.w1 - self.w0
        s = float(np.clip(-1.0, self.w0 + 0.1 * span, self.w1 - 0.1 * span))
        c, r = 0.5 * (s + 1.0), 0.5 * (1.0 - s)
        u, wu = gauss_legendre01(ARC_NODES)
        ang = np.pi * (1.0 - u)
        xi = c + r * np.exp(1j * ang)
        dxi = -1j * np.pi * r * np.exp(1j * ang) * wu
        return float(np.real(np.sum(radical_straight(xi, p, q) * self.h(xi) * dxi)))


def hat_MI(k_prec: float, k_succ: float, x: float, t: float, profile: ImpulseProfile):
    """(M, I) in the near-origin square-root coordinates."""
    ch = HatChart(profile, k_prec, k_succ, x, t)
    return ch.moment(), ch.integral()


def hat_jacobian_origin(profile: ImpulseProfile) -> float:
    """Closed-form determinant of d(M, I)/d(k_prec, k_succ) at the origin."""
    g0 = profile.g0
    a, b = profile.a, profile.b
    D0 = scale_D("R", 0.5 * (a + b), (0.5 * (b - a)) ** 2)
    slope = float(np.real(profile.dpsi_dv(-g0)))
    return -4.0 * D0 / np.pi**2 * (g0 * g0 - 4.0) * slope**2


def delta_config_for_signs(k_prec: float, k_succ: float) -> str:
    if k_prec >= 0.0 and k_succ >= 0.0:
        return "DeltaEmpty"
    if k_prec < 0.0 and k_succ >= 0.0:
        return "DeltaPrecK"
    if k_prec >= 0.0 and k_succ < 0.0:
        return "DeltaKSucc"
    return "NablaEmpty"


def _sign(v: float) -> int:
    return 1 if v >= 0.0 else -1


def solve_hat(profile, x, t, k_guess) -> ModulationState:
    fun = lambda y: np.array(hat_MI(y[0], y[1], x, t, profile))
    y, f = _newton(fun, k_guess)
    kp, ks = float(y[0]), float(y[1])
    a, b = profile.a, profile.b
    w0, w1 = complex(a + kp * kp), complex(b - ks * ks)
    p = 0.5 * (w0.real + w1.real)
    q = (0.5 * (w1.real - w0.real)) ** 2
    st = ModulationState(x=float(x), t=float(t), case_tag="R", w0=w0, w1=w1, p=p, q=q,
                         signs=(_sign(kp), _sign(ks)), k_prec=kp, k_succ=ks,
                         residual=(float(f[0]), float(f[1])), chart="hat")
    return derived_fields(st)


def _near_origin(profile, state: ModulationState) -> bool:
    if state.case_tag != "R":
        return False
    a, b = profile.a, profile.b
    return min(abs(state.w0.real - a), abs(b - state.w1.real)) < CHART_FRACTION * (b - a)


def _solve_at(profile, x, t, guess: ModulationState, k_guess=None) -> ModulationState:
    if _near_origin(profile, guess):
        kg = k_guess if k_guess is not None else (guess.k_prec, guess.k_succ)
        return solve_hat(profile, x, t, kg)
    return solve_pq(profile, x, t, guess)


def _predict(prev: ModulationState | None, cur: ModulationState, t_new: float):
    """Linear extrapolation of (p, q) and (k_prec, k_succ)."""
    if prev is None or cur.t == prev.t:
        k = (cur.k_prec, cur.k_succ) if cur.k_prec is not None else None
        return cur, k
    r = (t_new - cur.t) / (cur.t - prev.t)
    p = cur.p + r * (cur.p - prev.p)
    q = cur.q + r * (cur.q - prev.q)
    if (q < 0.0) != (cur.q < 0.0):
        p, q = cur.p, cur.q
    k = None
    if cur.k_prec is not None and prev.k_prec is not None:
        k = (cur.k_prec + r * (cur.k_prec - prev.k_prec), cur.k_succ + r * (cur.k_succ - prev.k_succ))
    elif cur.k_prec is not None:
        k = (cur.k_prec, cur.k_succ)
    w0, w1, _ = roots_from_pq(p, q)
    return replace(cur, p=p, q=q, w0=w0, w1=w1), k


def newton_continue(profile: ImpulseProfile, state: ModulationState, target_t: float,
                    steps: int = 20, record: bool = False):
    """Continue a solved state in t with equal steps, accumulating Phi by the trapezoid rule.

    Returns the final state, or the list of all states when record is True.
    """
    ts = np.linspace(state.t, target_t, int(steps) + 1)
    prev, cur = None, state
    out = [state]
    for t_new in ts[1:]:
        guess, k = _predict(prev, cur, t_new)
        try:
            new = _solve_at(profile, state.x, t_new, guess, k)
        except NumericError:
            try:
                new = _solve_at(profile, state.x, t_new, cur)
            except NumericError as exc:
                raise ContinuationError(f"continuation failed at t={t_new}: {exc}", cur) from exc
        phi = cur.Phi + 0.5 * (t_new - cur.t) * (cur.dPhi_dt + new.dPhi_dt)
        new = replace(new, Phi=float(phi))
        if new.case_tag == "R":
            try:
                new = replace(new, w_plus=find_w_plus(new.w0, new.w1, new.x, new.t, profile, new.signs))
            except NumericError:
                new = replace(new, w_plus=None)
        prev, cur = cur, new
        out.append(new)
    return out if record else cur


def origin_continue(profile: ImpulseProfile, x: float, t: float, steps: int | None = None) -> ModulationState:
    """State at (x, t) near the origin via the square-root chart, continued from t = 0."""
    if profile.x_crit is None or abs(x) >= profile.x_crit:
        raise DomainError("origin chart requires |x| < x_crit")
    start = initial_state(profile, x)
    start = replace(start, chart="hat")
    if steps is None:
        steps = max(4, int(np.ceil(abs(t) / 0.01)))
    ts = np.linspace(0.0, t, steps + 1)
    prev, cur = None, start
    for t_new in ts[1:]:
        guess, k = _predict(prev, cur, t_new)
        new = solve_hat(profile, x, t_new, k)
        phi = cur.Phi + 0.5 * (t_new - cur.t) * (cur.dPhi_dt + new.dPhi_dt)
        prev, cur = cur, replace(new, Phi=float(phi))
    if min(abs(cur.k_prec), abs(cur.k_succ)) < EXCLUDED_MARGIN and t != 0.0:
        raise ExcludedCurveError(f"(x, t) = ({x}, {t}) lies on an excluded curve")
    return cur


def continue_column(profile: ImpulseProfile, x: float, t_grid, max_dt: float = 0.005):
    """States at every t of an increasing grid in [0, inf), from one continuation out of t = 0."""
    state = initial_state(profile, x)
    results = []
    for tg in np.asarray(t_grid, dtype=float):
        if tg < state.t:
            raise DomainError("t_grid must be increasing and nonnegative")
        if tg > state.t:
            n = max(1, int(np.ceil((tg - state.t) / max_dt)))
            state = newton_continue(profile, state, tg, n)
        results.append(state)
    return results


def jacobian_crosscheck(profile, state: ModulationState, h: float = 1e-6) -> float:
    """Largest relative entry difference between the FD and closed-form (p, q) Jacobians."""
    fd = jacobian_fd(profile, state, h)
    cf = jacobian_closed_form(profile, state)
    return float(np.max(np.abs(fd - cf)) / np.max(np.abs(cf)))


def _root_map(state: ModulationState) -> np.ndarray:
    """d(w0, w1)/d(p, q) with w0 = p - r, w1 = p + r, r^2 = q."""
    r = 0.5 * (state.w1 - state.w0)
    return np.array([[1.0, -0.5 / r], [1.0, 0.5 / r]])


def jacobian_fd(profile, state: ModulationState, h: float = 1e-6) -> np.ndarray:
    """Central-difference d(M, I)/d(p, q) at a state."""
    def fun(p, q):
        w0, w1, _ = roots_from_pq(p, q)
        g = Geometry(profile, w0, w1, state.x, state.t, state.signs)
        return np.array([g.moment(), g.integral()])

    J = np.empty((2, 2))
    J[:, 0] = (fun(state.p + h, state.q) - fun(state.p - h, state.q)) / (2.0 * h)
    J[:, 1] = (fun(state.p, state.q + h) - fun(state.p, state.q - h)) / (2.0 * h)
    return J


def jacobian_closed_form(profile, state: ModulationState) -> np.ndarray:
    """d(M, I)/d(p, q) assembled from the root partials by the chain rule."""
    parts, _ = partials_closed_form(profile, state)
    Jw = np.array([[parts[0][0], parts[1][0]], [parts[0][1], parts[1][1]]])
    return np.real(Jw @ _root_map(state))


def partials_closed_form(profile, state: ModulationState):
    """(dM/dw_k, dI/dw_k) for k = 0, 1 from H at the roots."""
    g = Geometry(profile, state.w0, state.w1, state.x, state.t, state.signs)
    out = []
    for k, wk in enumerate((g.w0, g.w1)):
        hk = g.h_at_root(k)
        sq = np.sqrt(-wk)
        dM = 2.0 * sq * hk
        dI = -0.25 * sq * hk * g.band_kernel(wk)
        out.append((dM, dI))
    return out, g


def jacobian_formula(profile, state: ModulationState) -> complex:
    """det d(M, I)/d(w0, w1) in closed form: -D sqrt(-w0) sqrt(-w1) H(w0) H(w1) (w1 - w0)."""
    g = Geometry(profile, state.w0, state.w1, state.x, state.t, state.signs)
    D = scale_D(state.case_tag, state.p, state.q)
    h0, h1 = g.h_at_root(0), g.h_at_root(1)
    return -D * np.sqrt(-g.w0) * np.sqrt(-g.w1) * h0 * h1 * (g.w1 - g.w0)
