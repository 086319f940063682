"""Leading-order elliptic wavetrains built from modulation states.

With W = 2 Phi K(m) / (pi eps):

* librational states: cos(u/2) = dn W, sin(u/2) = -sqrt(m) sn W,
  eps u_t = -(4K/pi) Phi_t sqrt(m) cn W;
* rotational states: cos(u/2) = cn W, sin(u/2) = -sn W,
  eps u_t = -(4K/pi) Phi_t dn W.

The theta-ratio forms of the same quantities are kept as an independent route
for cross-checking.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .elliptic import complete_K, elliptic_params, jacobi_sn_cn_dn, riemann_theta
from .errors import DomainError
from .exact_ist import WaveSample
from .modulation import ModulationState


def fast_argument(state: ModulationState, eps: float) -> float:
    """W = 2 Phi K(m) / (pi eps)."""
    return 2.0 * state.Phi * complete_K(state.m) / (np.pi * eps)


def _sample(state: ModulationState, c: float, s: float, g: float) -> WaveSample:
    u = 2.0 * np.arctan2(s, c)
    if u >= 2.0 * np.pi:
        u -= 4.0 * np.pi
    return WaveSample(state.x, state.t, float(c), float(s), float(g), float(u))


def evaluate_librational(state: ModulationState, eps: float) -> WaveSample:
    if state.case_tag != "L":
        raise DomainError("librational formulas need a case-L state")
    K = complete_K(state.m)
    sn, cn, dn = jacobi_sn_cn_dn(fast_argument(state, eps), state.m)
    rm = np.sqrt(state.m)
    return _sample(state, dn, -rm * sn, -4.0 * K / np.pi * state.dPhi_dt * rm * cn)


def evaluate_rotational(state: ModulationState, eps: float) -> WaveSample:
    if state.case_tag != "R":
        raise DomainError("rotational formulas need a case-R state")
    K = complete_K(state.m)
    sn, cn, dn = jacobi_sn_cn_dn(fast_argument(state, eps), state.m)
    return _sample(state, cn, -sn, -4.0 * K / np.pi * state.dPhi_dt * dn)


def evaluate(state: ModulationState, eps: float) -> WaveSample:
    """Dispatch on the state's case."""
    if state.case_tag == "L":
        return evaluate_librational(state, eps)
    return evaluate_rotational(state, eps)


# --- theta-ratio route ----------------------------------------------------------------


@dataclass(frozen=True)
class ThetaReport:
    case: str
    nu: float
    delta_count: int
    C_theta: complex
    S_theta: complex
    C_jacobi: float
    S_jacobi: float

    @property
    def discrepancy(self) -> float:
        return float(max(abs(self.C_theta - self.C_jacobi), abs(self.S_theta - self.S_jacobi)))


def _theta_librational(m: float, nu: float, parity: float) -> tuple[complex, complex]:
    ep = elliptic_params(m)
    H = 0.5 * (ep.H0 + 2j * np.pi)
    phi1, phi2 = nu - 0.5 * np.pi, nu + 0.5 * np.pi
    e_zeta = np.sqrt(1.0 - m) + 1j * np.sqrt(m)
    pref = parity * e_zeta * riemann_theta(1j * np.pi, H) / riemann_theta(0.0, H)
    r = riemann_theta(1j * phi2, H) / riemann_theta(1j * phi1, H)
    return 0.5 * pref * (r + 1.0 / r), pref / 2j * (r - 1.0 / r)


def _theta_rotational(m: float, nu: float, parity: float) -> tuple[complex, complex]:
    ep = elliptic_params(m)
    H = 2.0 * ep.H0
    phi1 = nu - 0.5 * np.pi - 1j * H / 8.0
    phi2 = nu + 0.5 * np.pi + 1j * H / 8.0
    ratio_quarter = (1.0 + np.sqrt(1.0 - m)) / np.sqrt(m)  # (w0/w1)^(1/4)
    pref = parity * ratio_quarter * riemann_theta(0.5 * H, H) / riemann_theta(0.0, H) * np.exp(H / 8.0)
    r = riemann_theta(2j * phi1, H) / riemann_theta(2j * phi2, H) * np.exp(1j * nu)
    return 0.5 * pref * (r + 1.0 / r), -pref / 2j * (r - 1.0 / r)


def theta_crosscheck(state: ModulationState | str, nu: float, delta_count: int = 0,
                     m: float | None = None) -> ThetaReport:
    """Compare the theta-ratio values of C and S at fast phase nu with the Jacobi forms.

    ``state`` may be a ModulationState or a case tag "L"/"R" together with ``m``.
    The fast phase is nu = Phi/eps + pi * delta_count.
    """
    case = state if isinstance(state, str) else state.case_tag
    m = state.m if m is None else m
    parity = -1.0 if delta_count % 2 else 1.0
    W = 2.0 * complete_K(m) * (nu - np.pi * delta_count) / np.pi
    sn, cn, dn = jacobi_sn_cn_dn(W, m)
    if case == "L":
        if delta_count % 2:
            raise DomainError("the Delta count is even for librational states")
        C, S = _theta_librational(m, nu, parity)
        Cj, Sj = dn, -np.sqrt(m) * sn
    elif case == "R":
        C, S = _theta_rotational(m, nu, parity)
        Cj, Sj = cn, -sn
    else:
        raise DomainError(f"unknown case {case!r}")
    return ThetaReport(case, float(nu), int(delta_count), complex(C), complex(S), float(Cj), float(Sj))


# --- differential relations ---------------------------------------------------------


@dataclass(frozen=True)
class ConsistencyReport:
    t: np.ndarray
    residual_S: np.ndarray
    residual_C: np.ndarray

    @property
    def max_residual(self) -> float:
        return float(max(np.max(np.abs(self.residual_S)), np.max(np.abs(self.residual_C))))


def differential_consistency(states, eps: float) -> ConsistencyReport:
    """Centered-difference residuals of eps S_t - C G / 2 and eps C_t + S G / 2 along t."""
    states = list(states)
    if len(states) < 5:
        raise DomainError("need at least five states")
    ts = np.array([s.t for s in states])
    steps = np.diff(ts)
    if not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
        raise DomainError("states must be equally spaced in t")
    h = steps[0]
    samples = [evaluate(s, eps) for s in states]
    C = np.array([s.cos_half for s in samples])
    S = np.array([s.sin_half for s in samples])
    G = np.array([s.eps_ut for s in samples])
    dS = (S[2:] - S[:-2]) / (2.0 * h)
    dC = (C[2:] - C[:-2]) / (2.0 * h)
    res_S = eps * dS - 0.5 * C[1:-1] * G[1:-1]
    res_C = eps * dC + 0.5 * S[1:-1] * G[1:-1]
    return ConsistencyReport(ts[1:-1], res_S, res_C)
