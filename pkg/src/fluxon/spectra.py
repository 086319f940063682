"""Spectral-plane maps, the WKB phase, Bohr-Sommerfeld eigenvalues and pole bookkeeping."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, InvalidParameterError
from .profiles import ImpulseProfile
from .quadrature import segment_points, tanh_sinh

# Distance from v = 2 below which an eigenvalue is treated as a double point.
V_TWO_EXCLUSION = 1e-9


def _sqrt_minus(w, side: int | None):
    """Principal sqrt(-w); on the positive real axis a side (+1 above, -1 below) is required."""
    w = np.asarray(w, dtype=complex)
    on_cut = (w.imag == 0.0) & (w.real >= 0.0)
    if np.any(on_cut):
        if side is None:
            raise DomainError("w on the positive real axis needs an explicit side")
        # boundary value from above: -w = -xi - i0, sqrt -> -i sqrt(xi)
        r = np.sqrt(-w)
        return np.where(on_cut, -1j * side * np.sqrt(w.real), r)
    return np.sqrt(-w)


def E_of(w, side: int | None = None):
    """E(w) = (i/4)(sqrt(-w) + 1/sqrt(-w))."""
    s = _sqrt_minus(w, side)
    return 0.25j * (s + 1.0 / s)


def D_of(w, side: int | None = None):
    """D(w) = (i/4)(sqrt(-w) - 1/sqrt(-w))."""
    s = _sqrt_minus(w, side)
    return 0.25j * (s - 1.0 / s)


def Q_of(w, x: float, t: float, side: int | None = None):
    """Q(w; x, t) = E(w) x + D(w) t."""
    return E_of(w, side) * x + D_of(w, side) * t


def wkb_phase(profile: ImpulseProfile, v: float, tol: float = 1e-12) -> float:
    """Psi(iv/4) = (1/2) int_0^{x(-v)} sqrt(G(s)^2 - v^2) ds by tanh-sinh quadrature.

    Profiles defined through their inverse use the equivalent integral over g^2.
    """
    if not 0.0 < v < -profile.g0:
        raise DomainError(f"wkb_phase needs 0 < v < {-profile.g0}, got {v}")
    if not profile.has_closed_form_gap:
        # without a closed-form G every x-node costs a root solve; integrate in g instead
        return float(np.real(profile.psi(v)))
    turning = profile.G_inverse(-v)

    def f(d0, d1):
        gap = profile.gap_sq(turning * d0, turning, turning * d1)
        return np.sqrt(np.maximum(gap, 0.0))

    return 0.5 * turning * float(tanh_sinh(f, tol=tol))


def phase_slope(profile: ImpulseProfile, v: float) -> float:
    """dPsi/dv by a central difference of wkb_phase with step 1e-5 times the v-range."""
    span = -profile.g0
    h = 1e-5 * span
    lo, hi = max(v - h, 0.5 * v), min(v + h, 0.5 * (v + span))
    return (wkb_phase(profile, hi) - wkb_phase(profile, lo)) / (hi - lo)


def abel_inverse(profile: ImpulseProfile, w: float, tol: float = 1e-10) -> float:
    """Reconstruct x = G^{-1}(w) from the phase slope: -(4/pi) int_{-w}^{-G0} phi(v) / sqrt(v^2 - w^2) dv."""
    if not profile.g0 < w < 0.0:
        raise DomainError(f"abel_inverse needs G0 < w < 0, got {w}")
    lo, hi = -w, -profile.g0
    span = hi - lo

    def f(d0, d1):
        v = segment_points(lo, hi, d0, d1).real
        # nodes that round onto the top endpoint reuse the slope just below it
        v_eval = np.minimum(v, hi * (1.0 - 1e-9))
        phi = np.array([phase_slope(profile, vi) for vi in v_eval])
        return phi * span / np.sqrt(span * d0 * (v + lo))

    return -4.0 / np.pi * float(tanh_sinh(f, tol=tol, min_level=2, max_level=7))


class PoleKind(str, Enum):
    KINK = "Kink"
    BREATHER = "Breather"


class DeltaConfig(str, Enum):
    DELTA_EMPTY = "DeltaEmpty"
    NABLA_EMPTY = "NablaEmpty"
    DELTA_PREC_K = "DeltaPrecK"
    DELTA_K_SUCC = "DeltaKSucc"
    NABLA_PREC_K = "NablaPrecK"
    NABLA_K_SUCC = "NablaKSucc"


@dataclass(frozen=True)
class PoleRecord:
    w: complex
    k: int
    kind: PoleKind
    sign: int
    in_delta: bool = False


@dataclass(frozen=True)
class ScatteringData:
    N: int
    eps: float
    v: np.ndarray = field(repr=False)
    poles: tuple[PoleRecord, ...] = field(repr=False)
    delta_config: DeltaConfig = DeltaConfig.DELTA_EMPTY
    tau_inf: float | None = None
    tau_N: float | None = None

    @property
    def n_breather(self) -> int:
        return int(np.sum(self.v < 2.0))

    @property
    def n_kink(self) -> int:
        return int(np.sum(self.v > 2.0))

    @property
    def delta_count(self) -> int:
        return sum(p.in_delta for p in self.poles)

    def to_json(self) -> str:
        return json.dumps(
            {
                "N": self.N,
                "eps": self.eps,
                "v_k": [float(x) for x in self.v],
                "poles": [
                    {
                        "w_re": p.w.real,
                        "w_im": p.w.imag,
                        "k": p.k,
                        "kind": p.kind.value,
                        "sign": p.sign,
                        "in_delta": p.in_delta,
                    }
                    for p in self.poles
                ],
                "delta_config": self.delta_config.value,
                "tau_inf": self.tau_inf,
                "tau_N": self.tau_N,
            },
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "ScatteringData":
        d = json.loads(text)
        poles = tuple(
            PoleRecord(
                complex(p["w_re"], p["w_im"]), p["k"], PoleKind(p["kind"]), p["sign"], p["in_delta"]
            )
            for p in d["poles"]
        )
        return cls(
            d["N"], d["eps"], np.array(d["v_k"]), poles,
            DeltaConfig(d["delta_config"]), d["tau_inf"], d["tau_N"],
        )


def poles_from_v(v: float, k: int) -> list[PoleRecord]:
    """The two w-plane solutions of E(w) = iv/4."""
    sign = 1 if (k + 1) % 2 == 0 else -1
    if v < 2.0:
        theta = np.arccos(0.5 * v)
        return [
            PoleRecord(complex(-np.exp(2j * theta)), k, PoleKind.BREATHER, sign),
            PoleRecord(complex(-np.exp(-2j * theta)), k, PoleKind.BREATHER, sign),
        ]
    r = np.sqrt(v * v - 4.0)
    big = 0.5 * (v + r)
    small = 1.0 / big
    return [
        PoleRecord(complex(-big * big), k, PoleKind.KINK, sign),
        PoleRecord(complex(-small * small), k, PoleKind.KINK, sign),
    ]


def bohr_sommerfeld(profile: ImpulseProfile, N: int, tol: float = 1e-13,
                    quad_tol: float = 1e-12) -> ScatteringData:
    """WKB eigenvalues Psi(v_k) = pi eps (k + 1/2), k = 0..N-1, with eps = ||G||_1 / (4 pi N)."""
    if int(N) != N or N < 1:
        raise InvalidParameterError(f"N must be a positive integer, got {N}")
    N = int(N)
    eps = profile.l1_norm / (4.0 * np.pi * N)
    vmax = -profile.g0
    vs = []
    for k in range(N):
        target = np.pi * eps * (k + 0.5)
        f = lambda v: wkb_phase(profile, v, quad_tol) - target
        v = brentq(f, 1e-12 * vmax, vmax * (1.0 - 1e-12), xtol=tol, rtol=1e-15)
        if abs(v - 2.0) < V_TWO_EXCLUSION:
            raise InvalidParameterError(f"eigenvalue v_{k} = {v} is within the exclusion band of 2")
        vs.append(v)
    poles = tuple(p for k, v in enumerate(vs) for p in poles_from_v(v, k))
    return ScatteringData(N, eps, np.array(vs), poles)


def eigenvalue_count(profile: ImpulseProfile, eps: float) -> int:
    """Number of v in (0, -G0) with Psi(v) = pi eps (k + 1/2); equals floor(||G||_1/(4 pi eps) + 1/2)."""
    return int(np.floor(profile.l1_norm / (4.0 * np.pi * eps) + 0.5))


def transition_point(profile: ImpulseProfile, tau_inf: float, N: int) -> float:
    """Real tau_N near tau_inf with theta0(tau_N) = pi eps floor(theta0(tau_inf)/(pi eps))."""
    a, b = profile.a, profile.b
    if a is None or not (a < tau_inf < b) or tau_inf == -1.0:
        raise DomainError(f"tau_inf must lie in (a,-1) or (-1,b), got {tau_inf}")
    eps = profile.l1_norm / (4.0 * np.pi * N)
    theta = lambda tau: float(np.real(profile.theta0(tau)))
    level = np.pi * eps * np.floor(theta(tau_inf) / (np.pi * eps))
    lo, hi = (a, tau_inf) if tau_inf < -1.0 else (tau_inf, b)
    g = lambda tau: theta(tau) - level
    if g(lo) * g(hi) > 0.0:
        return lo if abs(g(lo)) < abs(g(hi)) else hi
    if g(lo) == 0.0:
        return lo
    if g(hi) == 0.0:
        return hi
    return brentq(g, lo, hi, xtol=1e-15, rtol=1e-15)


def configure_delta(
    profile: ImpulseProfile, data: ScatteringData, config: DeltaConfig, tau_inf: float | None = None
) -> ScatteringData:
    """Mark the poles belonging to Delta according to a configuration."""
    config = DeltaConfig(config)
    tau_N = None
    if config in (DeltaConfig.DELTA_EMPTY, DeltaConfig.NABLA_EMPTY):
        flags = [config is DeltaConfig.NABLA_EMPTY] * len(data.poles)
    else:
        if tau_inf is None:
            raise InvalidParameterError(f"{config.value} requires tau_inf")
        tau_N = transition_point(profile, tau_inf, data.N)
        left = [p.kind is PoleKind.KINK and p.w.real < tau_N for p in data.poles]
        right = [p.kind is PoleKind.KINK and p.w.real > tau_N for p in data.poles]
        chosen = left if config in (DeltaConfig.DELTA_PREC_K, DeltaConfig.NABLA_PREC_K) else right
        if config in (DeltaConfig.DELTA_PREC_K, DeltaConfig.DELTA_K_SUCC):
            flags = chosen
        else:
            flags = [not c for c in chosen]
    poles = tuple(replace(p, in_delta=bool(f)) for p, f in zip(data.poles, flags))
    return replace(data, poles=poles, delta_config=config, tau_inf=tau_inf, tau_N=tau_N)


def default_delta(profile: ImpulseProfile, data: ScatteringData, x: float) -> ScatteringData:
    """Delta empty for x >= 0 and Nabla empty for x < 0."""
    config = DeltaConfig.DELTA_EMPTY if x >= 0.0 else DeltaConfig.NABLA_EMPTY
    if data.delta_config is config and data.tau_N is None:
        return data
    return configure_delta(profile, data, config)
