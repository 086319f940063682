"""Exact reflectionless sine-Gordon solutions by partial fractions.

The matrix unknown is unfolded to z with z^2 = w, where it becomes a rational
function of z with simple poles at z_y = i sqrt(-y) and -z_y:

    S(z) = I + sum_y [ R_y / (z - z_y) + Rt_y / (z + z_y) ],  Rt_y = -s2 R_y s2.

For a pole in Nabla only the first column of R_y is nonzero, for a pole in Delta
only the second.  Each residue condition gives one 2-vector equation, so the
unknowns are fixed by a dense 4N x 4N complex system.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg as sla

from .errors import ConditioningError, NumericError
from .spectra import DeltaConfig, PoleKind, Q_of, ScatteringData

DEFAULT_COND_CAP = 1e12
# exp(-700) is close to the smallest normal double
_UNDERFLOW = -700.0


@dataclass(frozen=True)
class WaveSample:
    x: float
    t: float
    cos_half: float
    sin_half: float
    eps_ut: float
    u_mod4pi: float


@dataclass(frozen=True)
class ResidueSystem:
    """Dense residue system; row 2j, 2j+1 belong to pole j."""

    matrix: np.ndarray
    rhs: np.ndarray
    z: np.ndarray
    in_delta: np.ndarray
    cond_estimate: float
    unknowns: np.ndarray | None = None


def _z_of(w: complex) -> complex:
    return 1j * np.sqrt(-complex(w))


def _log_blaschke_factors(z: np.ndarray, in_delta: np.ndarray, j: int) -> complex:
    """log of Res_{w=y_j} of Pi_N (Nabla pole) or of 1/Pi_N (Delta pole)."""
    zj = z[j]
    total = np.log(4.0 * zj * zj)
    for i, zi in enumerate(z):
        if i == j:
            continue
        if abs(zi - zj) < 1e-12:
            raise NumericError("two poles coincide within 1e-12")
        ratio = (zj + zi) / (zj - zi)
        # Nabla factors (z+z_p)/(z-z_p), Delta factors the reciprocal; invert for Delta residues
        flip = in_delta[i] != in_delta[j]
        total += -np.log(ratio) if flip else np.log(ratio)
    return total


def blaschke_residue(data: ScatteringData, pole_index: int) -> complex:
    """Residue at the pole of Pi_N (Nabla pole) or of 1/Pi_N (Delta pole)."""
    z = np.array([_z_of(p.w) for p in data.poles])
    in_delta = np.array([p.in_delta for p in data.poles])
    return complex(np.exp(_log_blaschke_factors(z, in_delta, pole_index)))


def _log_couplings(data: ScatteringData, x: float, t: float) -> tuple[np.ndarray, np.ndarray]:
    z = np.array([_z_of(p.w) for p in data.poles])
    in_delta = np.array([p.in_delta for p in data.poles])
    logs = np.empty(len(z), dtype=complex)
    for j, pole in enumerate(data.poles):
        phase = 2j * Q_of(pole.w, x, t) / data.eps
        if pole.in_delta:
            phase = -phase
        sign = 0.0 if pole.sign > 0 else 1j * np.pi
        # chain rule: Res_w = 2 z_y Res_z
        logs[j] = phase + sign + _log_blaschke_factors(z, in_delta, j) - np.log(2.0 * z[j])
    return z, logs


def assemble_system(data: ScatteringData, x: float, t: float) -> ResidueSystem:
    """Build the scaled 4N x 4N residue system at (x, t)."""
    z, logk = _log_couplings(data, x, t)
    in_delta = np.array([p.in_delta for p in data.poles])
    n = len(z)
    M = np.zeros((2 * n, 2 * n), dtype=complex)
    rhs = np.zeros(2 * n, dtype=complex)
    for j in range(n):
        rows = slice(2 * j, 2 * j + 2)
        # column of S(z_j) that the residue condition samples: second for Nabla, first for Delta
        col = 0 if in_delta[j] else 1
        # coefficient block C with S(z_j)[:, col] = e_col + sum_i C_i u_i
        blocks = np.zeros((2, 2 * n), dtype=complex)
        for i in range(n):
            ci = slice(2 * i, 2 * i + 2)
            if in_delta[i] and col == 1:
                # R_i = [0, b]: second column b / (z_j - z_i)
                if i != j:
                    blocks[:, ci] += np.eye(2) / (z[j] - z[i])
            elif not in_delta[i] and col == 0:
                # R_i = [a, 0]: first column a / (z_j - z_i)
                if i != j:
                    blocks[:, ci] += np.eye(2) / (z[j] - z[i])
            elif not in_delta[i] and col == 1:
                # Rt_i second column = (a2, -a1)
                blocks[:, ci] += np.array([[0.0, 1.0], [-1.0, 0.0]]) / (z[j] + z[i])
            else:
                # Delta pole, first column of Rt_i = (-b2, b1)
                blocks[:, ci] += np.array([[0.0, -1.0], [1.0, 0.0]]) / (z[j] + z[i])
        e = np.zeros(2, dtype=complex)
        e[col] = 1.0
        lk = logk[j]
        if lk.real > 0.0:
            # u_j / kappa - C u = e
            M[rows, :] = -blocks
            M[rows, rows] += np.exp(-lk) * np.eye(2)
            rhs[rows] = e
        elif lk.real < _UNDERFLOW:
            M[rows, rows] = np.eye(2)
        else:
            kappa = np.exp(lk)
            M[rows, :] = -kappa * blocks
            M[rows, rows] += np.eye(2)
            rhs[rows] = kappa * e
    if not np.all(np.isfinite(M)):
        raise NumericError("non-finite entries in the residue system")
    lu, piv = sla.lu_factor(M, check_finite=False)
    anorm = np.linalg.norm(M, 1)
    rcond, info = sla.lapack.zgecon(lu, anorm, norm="1")
    cond = np.inf if rcond == 0.0 else 1.0 / rcond
    u = sla.lu_solve((lu, piv), rhs, check_finite=False)
    return ResidueSystem(M, rhs, z, in_delta, max(cond, 1.0), u.reshape(n, 2))


def _residue_matrices(system: ResidueSystem):
    n = len(system.z)
    R = np.zeros((n, 2, 2), dtype=complex)
    Rt = np.zeros((n, 2, 2), dtype=complex)
    for j, (vec, d) in enumerate(zip(system.unknowns, system.in_delta)):
        if d:
            R[j, :, 1] = vec
            Rt[j, :, 0] = (-vec[1], vec[0])
        else:
            R[j, :, 0] = vec
            Rt[j, :, 1] = (vec[1], -vec[0])
    return R, Rt


def solve_exact(
    data: ScatteringData, x: float, t: float, cond_cap: float = DEFAULT_COND_CAP
) -> WaveSample:
    """Exact condensate values cos(u/2), sin(u/2), eps u_t at (x, t)."""
    return _extract(assemble_system(data, x, t), x, t, cond_cap)


def _extract(system: ResidueSystem, x: float, t: float, cond_cap: float) -> WaveSample:
    if system.cond_estimate > cond_cap:
        raise ConditioningError(
            f"condition estimate {system.cond_estimate:.3e} exceeds cap {cond_cap:.1e}; "
            "use a smaller N or the mirrored Delta policy"
        )
    R, Rt = _residue_matrices(system)
    z = system.z[:, None, None]
    S0 = np.eye(2) + np.sum(-R / z + Rt / z, axis=0)
    S1 = np.sum(-(R + Rt) / z**2, axis=0)
    C = np.sum(R + Rt, axis=0)
    parity = -1.0 if int(np.sum(system.in_delta)) % 2 else 1.0
    A = parity * S0
    B = 1j * np.linalg.solve(S0, S1)
    eps_ut = B[0, 1] - 1j * C[0, 1]
    c, s = A[0, 0], A[1, 0]
    scale = max(1.0, abs(c), abs(s), abs(eps_ut))
    if max(abs(c.imag), abs(s.imag), abs(eps_ut.imag)) > 1e-6 * scale:
        raise NumericError("extracted values are not real; the solve lost accuracy")
    u = 2.0 * np.arctan2(s.real, c.real)
    if u >= 2.0 * np.pi:
        u -= 4.0 * np.pi
    return WaveSample(float(x), float(t), float(c.real), float(s.real), float(eps_ut.real), float(u))


def with_sign_policy(data: ScatteringData, x: float) -> ScatteringData:
    """Delta empty for x >= 0 and every pole in Delta for x < 0."""
    flag = x < 0.0
    if all(p.in_delta == flag for p in data.poles):
        return data
    config = DeltaConfig.NABLA_EMPTY if flag else DeltaConfig.DELTA_EMPTY
    poles = tuple(replace(p, in_delta=flag) for p in data.poles)
    return replace(data, poles=poles, delta_config=config, tau_inf=None, tau_N=None)


def split_configurations(data: ScatteringData):
    """Every mixed Delta assignment that splits the kink poles at one real threshold.

    The solution does not depend on the assignment, only the conditioning does.
    """
    kinks = sorted((p.w.real for p in data.poles if p.kind is PoleKind.KINK))
    cuts = [-np.inf] + [0.5 * (u + v) for u, v in zip(kinks[:-1], kinks[1:])] + [np.inf]
    for cut in cuts:
        for config in (DeltaConfig.DELTA_PREC_K, DeltaConfig.DELTA_K_SUCC,
                       DeltaConfig.NABLA_PREC_K, DeltaConfig.NABLA_K_SUCC):
            prec = config in (DeltaConfig.DELTA_PREC_K, DeltaConfig.NABLA_PREC_K)
            chosen = [p.kind is PoleKind.KINK and ((p.w.real < cut) == prec) for p in data.poles]
            in_delta = chosen if config.value.startswith("Delta") else [not c for c in chosen]
            poles = tuple(replace(p, in_delta=bool(d)) for p, d in zip(data.poles, in_delta))
            yield replace(data, poles=poles, delta_config=config, tau_inf=None, tau_N=None)


def solve_with_fallback(
    data: ScatteringData, x: float, t: float, cond_cap: float = DEFAULT_COND_CAP
) -> tuple[WaveSample, float, DeltaConfig]:
    """Solve under the sign-of-x policy; above the cap, use the best-conditioned kink split."""
    system = assemble_system(with_sign_policy(data, x), x, t)
    best, best_data = system, None
    if system.cond_estimate > cond_cap and data.n_kink > 0:
        for candidate in split_configurations(data):
            trial = assemble_system(candidate, x, t)
            if trial.cond_estimate < best.cond_estimate:
                best, best_data = trial, candidate
    config = (with_sign_policy(data, x) if best_data is None else best_data).delta_config
    return _extract(best, x, t, cond_cap), best.cond_estimate, config


@dataclass
class FieldTable:
    x: np.ndarray
    t: np.ndarray
    samples: list[list[WaveSample | None]]
    failures: list[tuple[float, float, str]] = field(default_factory=list)
    max_cond: float = 1.0

    def column(self, name: str) -> np.ndarray:
        """Array indexed [ix, it]; NaN where a node failed."""
        out = np.full((len(self.x), len(self.t)), np.nan)
        for i, row in enumerate(self.samples):
            for j, s in enumerate(row):
                if s is not None:
                    out[i, j] = getattr(s, name)
        return out


def _unwrap_half(angle: np.ndarray) -> np.ndarray:
    # u = 2 * atan2(...) is continuous modulo 4 pi; unwrap the half-angle
    ok = np.isfinite(angle)
    out = angle.copy()
    if ok.sum() > 1:
        out[ok] = 2.0 * np.unwrap(0.5 * angle[ok])
    return out


def field_grid(
    data: ScatteringData,
    x_grid,
    t_grid,
    cond_cap: float = DEFAULT_COND_CAP,
    sign_policy: bool = True,
    delta_search: bool = False,
) -> FieldTable:
    """Exact samples on a grid; u is unwrapped along increasing t in each x-column.

    With delta_search, nodes whose sign-policy system exceeds cond_cap are
    retried under the best-conditioned kink split.
    """
    xs = np.asarray(x_grid, dtype=float)
    ts = np.asarray(t_grid, dtype=float)
    table = FieldTable(xs, ts, [])
    for x in xs:
        local = with_sign_policy(data, x) if sign_policy else data
        row: list[WaveSample | None] = []
        for t in ts:
            try:
                if delta_search:
                    sample, cond, _ = solve_with_fallback(data, x, t, cond_cap)
                    table.max_cond = max(table.max_cond, cond)
                    row.append(sample)
                    continue
                system = assemble_system(local, x, t)
                table.max_cond = max(table.max_cond, system.cond_estimate)
                row.append(_extract(system, x, t, cond_cap))
            except (NumericError, np.linalg.LinAlgError) as exc:
                table.failures.append((float(x), float(t), str(exc)))
                row.append(None)
        angle = np.array([np.nan if s is None else s.u_mod4pi for s in row])
        unwrapped = _unwrap_half(angle)
        row = [
            None if s is None else replace(s, u_mod4pi=float(u)) for s, u in zip(row, unwrapped)
        ]
        table.samples.append(row)
    return table


def sine_gordon_residual(center: float, east: float, west: float, north: float, south: float,
                         h: float, eps: float) -> float:
    """|eps^2 (u_tt - u_xx) + sin u| on a 5-point stencil (north/south are t +- h).

    Neighbouring values are shifted by multiples of 4 pi to lie next to the center.
    """
    def near(v):
        return center + _wrap4(v - center)

    e, w_, n, s = (near(v) for v in (east, west, north, south))
    utt = (n - 2.0 * center + s) / h**2
    uxx = (e - 2.0 * center + w_) / h**2
    return float(abs(eps * eps * (utt - uxx) + np.sin(center)))


def _wrap4(d: float) -> float:
    return (d + 2.0 * np.pi) % (4.0 * np.pi) - 2.0 * np.pi


def residual_at(data: ScatteringData, x: float, t: float, h: float) -> float:
    """Stencil residual of the exact solution centred at (x, t) with spacing h."""
    def u(xx, tt):
        return solve_exact(with_sign_policy(data, xx), xx, tt).u_mod4pi

    return sine_gordon_residual(
        u(x, t), u(x + h, t), u(x - h, t), u(x, t + h), u(x, t - h), h, data.eps
    )
