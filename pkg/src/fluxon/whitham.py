"""Whitham modulation toolkit for superluminal sine-Gordon wavetrains.

The averaged action J(E) is a combination of complete elliptic integrals and
solves J'' = J / (4 (1 - E^2)) in both cases.  In the variables (n_p, E) the
modulation system reads U_t + A(n_p, E) U_x = 0 with

    A = (1/N) [[n (J J'' + J'^2), -(1 - n^2)^2 J' J''],
               [J J',              n (J J'' + J'^2)]],   N = n^2 J J'' + J'^2,

and the band endpoints w0, w1 are Riemann invariants with velocities c_j.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .elliptic import complete_E, complete_K
from .errors import DomainError, NumericError
from .modulation import ModulationState, solve_pq
from .profiles import ImpulseProfile
from .quadrature import gauss_legendre01, segment_points, tanh_sinh, tanh_sinh_rule

ARC_NODES = 200
LINE_LEVEL = 6


def _check_energy(energy: float, case: str) -> None:
    if case == "R" and not energy > 1.0:
        raise DomainError(f"rotational waves need E > 1, got {energy}")
    if case == "L" and not -1.0 < energy < 1.0:
        raise DomainError(f"librational waves need -1 < E < 1, got {energy}")
    if case not in ("L", "R"):
        raise DomainError(f"unknown case {case!r}")


def J_and_derivatives(energy: float, case: str) -> tuple[float, float, float]:
    """(J, J', J'') from the closed forms in K and E."""
    _check_energy(energy, case)
    if case == "R":
        m = 2.0 / (1.0 + energy)
        J = 4.0 / np.pi * np.sqrt(0.5 * (1.0 + energy)) * complete_E(m)
        Jp = 1.0 / np.pi * np.sqrt(m) * complete_K(m)
    else:
        m = 0.5 * (1.0 + energy)
        J = 8.0 / np.pi * complete_E(m) - 4.0 / np.pi * (1.0 - energy) * complete_K(m)
        Jp = 2.0 / np.pi * complete_K(m)
    return J, Jp, J / (4.0 * (1.0 - energy * energy))


def J_quadrature(energy: float, case: str) -> float:
    """J(E) from its defining average of sqrt(cos(phi) + E), by quadrature."""
    _check_energy(energy, case)
    if case == "R":
        top = np.pi
        scale = np.sqrt(2.0) / np.pi
    else:
        top = np.arccos(-energy)
        scale = 2.0 * np.sqrt(2.0) / np.pi

    def f(d0, d1):
        phi = top * d0
        if case == "R":
            gap = np.cos(phi) + energy
        else:
            # cos(phi) - cos(top) written as a product so the endpoint zero is resolved
            gap = 2.0 * np.sin(0.5 * (top + phi)) * np.sin(0.5 * top * d1)
        return np.sqrt(np.maximum(gap, 0.0)) * top

    return scale * float(tanh_sinh(f, tol=1e-14))


def roots_to_fields(w0: complex, w1: complex) -> tuple[float, float]:
    """(n_p, E) from the band endpoints."""
    sp = np.sqrt(complex(w0) * complex(w1)).real
    energy = -np.real(complex(w0) + complex(w1)) / (2.0 * sp)
    return (1.0 - sp) / (1.0 + sp), energy


def _case_of(w0: complex, w1: complex) -> str:
    return "L" if abs(complex(w0).imag) > 0.0 else "R"


def characteristic_velocities(w0: complex, w1: complex, case: str | None = None):
    """Riemann-invariant velocities (c0, c1) from J(E) and its derivative."""
    case = case or _case_of(w0, w1)
    w = (complex(w0), complex(w1))
    if w[0] == w[1]:
        raise NumericError("degenerate band endpoints")
    sp = np.sqrt(w[0] * w[1]).real
    _, energy = roots_to_fields(*w)
    J, Jp, _ = J_and_derivatives(energy, case)
    out = []
    for j in (0, 1):
        d = w[j] - w[1 - j]
        num = sp * (1.0 + sp) * J + d * (1.0 - sp) * Jp
        den = sp * (1.0 - sp) * J + d * (1.0 + sp) * Jp
        out.append(num / den)
    return out[0], out[1]


def _band_path(w0: complex, w1: complex, case: str):
    """Nodes, weights (including dxi) and the radical on the band path to xi = 1 in C+."""
    p = 0.5 * (w0 + w1).real
    if case == "R":
        lo, hi = w0.real, w1.real
        s = float(np.clip(-1.0, lo + 0.1 * (hi - lo), hi - 0.1 * (hi - lo)))
        c, r = 0.5 * (s + 1.0), 0.5 * (1.0 - s)
        u, wu = gauss_legendre01(ARC_NODES)
        ang = np.pi * (1.0 - u)
        xi = c + r * np.exp(1j * ang)
        dxi = -1j * np.pi * r * np.exp(1j * ang) * wu
        off0, off1 = xi - w0, xi - w1
    else:
        d0, d1, wts = tanh_sinh_rule(LINE_LEVEL)
        span = 1.0 - w0
        xi = segment_points(w0, 1.0 + 0j, d0, d1)
        off0 = np.where(d0 <= d1, span * d0, xi - w0)
        keep = np.abs(off0) > 1e-150 * abs(span)
        xi, off0, dxi = xi[keep], off0[keep], (span * wts)[keep]
        off1 = xi - w1
    d = xi - p
    radical = d * np.sqrt(off0 * off1 / (d * d))
    return xi, dxi, radical


def band_integrals(w0: complex, w1: complex, case: str | None = None) -> tuple[float, float]:
    """(U, V): band integrals over the path in C+ plus its mirror image in C-."""
    case = case or _case_of(w0, w1)
    w0, w1 = complex(w0), complex(w1)
    xi, dxi, radical = _band_path(w0, w1, case)
    base = 1.0 / (np.sqrt(-xi) * radical)
    sp = np.sqrt(w0 * w1).real
    A = 2.0 * np.real(np.sum((2.0 * xi - w0 - w1) * base * dxi))
    V = 2.0 * np.real(np.sum(base * dxi))
    return A / sp, V


def hat_velocities(w0: complex, w1: complex, case: str | None = None):
    """Velocities from the band integrals U and V instead of J and J'."""
    case = case or _case_of(w0, w1)
    w = (complex(w0), complex(w1))
    U, V = band_integrals(w[0], w[1], case)
    sp = np.sqrt(w[0] * w[1]).real
    out = []
    for j in (0, 1):
        d = w[j] - w[1 - j]
        num = sp * (1.0 + sp) * U + d * (1.0 - sp) * V
        den = sp * (1.0 - sp) * U + d * (1.0 + sp) * V
        out.append(num / den)
    return out[0], out[1]


class Classification(str, Enum):
    HYPERBOLIC = "hyperbolic"
    ELLIPTIC = "elliptic"


@dataclass(frozen=True)
class ClassificationResult:
    kind: Classification
    discriminant: float  # J J''


def classify(energy: float, case: str) -> ClassificationResult:
    """Hyperbolic exactly when J J'' < 0."""
    J, _, Jpp = J_and_derivatives(energy, case)
    disc = J * Jpp
    kind = Classification.HYPERBOLIC if disc < 0.0 else Classification.ELLIPTIC
    return ClassificationResult(kind, float(disc))


def system_matrix(n_p: float, energy: float, case: str) -> np.ndarray:
    J, Jp, Jpp = J_and_derivatives(energy, case)
    N = n_p * n_p * J * Jpp + Jp * Jp
    s = J * Jpp + Jp * Jp
    return np.array([[n_p * s, -((1.0 - n_p * n_p) ** 2) * Jp * Jpp], [J * Jp, n_p * s]]) / N


def invariant_jacobian(w0: complex, w1: complex) -> np.ndarray:
    """S = d(n_p, E)/d(w0, w1), the change of variables that diagonalizes the system."""
    w0, w1 = complex(w0), complex(w1)
    sp = np.sqrt(w0 * w1).real
    top = (1.0 + sp) ** 2 * sp
    return np.array([[-w1 / top, -w0 / top],
                     [(w1 - w0) / (4.0 * w0 * sp), (w0 - w1) / (4.0 * w1 * sp)]])


def whitham_residual(n_p, energy, case_map, hx: float, ht: float) -> np.ndarray:
    """Centered-difference residual of U_t + A U_x on a uniform [ix, it] grid (interior nodes)."""
    n_p = np.asarray(n_p, dtype=float)
    energy = np.asarray(energy, dtype=float)
    case_map = np.asarray(case_map)
    nx, nt = n_p.shape
    out = np.full((nx, nt, 2), np.nan)
    for i in range(1, nx - 1):
        for k in range(1, nt - 1):
            Ux = np.array([n_p[i + 1, k] - n_p[i - 1, k], energy[i + 1, k] - energy[i - 1, k]]) / (2 * hx)
            Ut = np.array([n_p[i, k + 1] - n_p[i, k - 1], energy[i, k + 1] - energy[i, k - 1]]) / (2 * ht)
            A = system_matrix(n_p[i, k], energy[i, k], str(case_map[i, k]))
            out[i, k] = Ut + A @ Ux
    return out


def riemann_residual(w0, w1, hx: float, ht: float) -> np.ndarray:
    """Centered-difference residual of (w_j)_t + c_j (w_j)_x on a uniform [ix, it] grid."""
    w = [np.asarray(w0, dtype=complex), np.asarray(w1, dtype=complex)]
    nx, nt = w[0].shape
    out = np.full((nx, nt, 2), np.nan, dtype=complex)
    for i in range(1, nx - 1):
        for k in range(1, nt - 1):
            c = characteristic_velocities(w[0][i, k], w[1][i, k])
            for j in (0, 1):
                wx = (w[j][i + 1, k] - w[j][i - 1, k]) / (2 * hx)
                wt = (w[j][i, k + 1] - w[j][i, k - 1]) / (2 * ht)
                out[i, k, j] = wt + c[j] * wx
    return out


@dataclass(frozen=True)
class StencilResidual:
    h: float
    system: np.ndarray  # residual of the (n_p, E) form
    riemann: np.ndarray  # residuals of the two Riemann-invariant equations

    @property
    def max_residual(self) -> float:
        return float(max(np.max(np.abs(self.system)), np.max(np.abs(self.riemann))))


def stencil_residual(profile: ImpulseProfile, state: ModulationState, h: float) -> StencilResidual:
    """Both residual forms from a five-point stencil of states solved around ``state``."""
    x, t = state.x, state.t
    if t - h < 0.0:
        raise DomainError("the stencil needs t >= h")
    nb = {d: solve_pq(profile, x + d[0], t + d[1], state)
          for d in ((h, 0.0), (-h, 0.0), (0.0, h), (0.0, -h))}
    n_p = np.full((3, 3), state.n_p)
    energy = np.full((3, 3), state.energy_E)
    w0 = np.full((3, 3), state.w0, dtype=complex)
    w1 = np.full((3, 3), state.w1, dtype=complex)
    cases = np.full((3, 3), state.case_tag)
    for (dx, dt), s in nb.items():
        i, k = 1 + int(np.sign(dx)), 1 + int(np.sign(dt))
        n_p[i, k], energy[i, k], w0[i, k], w1[i, k] = s.n_p, s.energy_E, s.w0, s.w1
    return StencilResidual(h, whitham_residual(n_p, energy, cases, h, h)[1, 1],
                           riemann_residual(w0, w1, h, h)[1, 1])
