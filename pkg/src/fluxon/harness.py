"""Scenario configuration, orchestration, comparison metrics and CSV/SVG emission.

A scenario is one JSON document, for example::

    {
      "mode": "compare",
      "profile": {"kind": "sech", "A": 0.75},
      "N": [8, 16],
      "x_grid": {"min": 1.5, "max": 1.5, "count": 1},
      "t_grid": {"min": 0.05, "max": 0.45, "count": 40},
      "delta_policy": "sign",
      "tolerances": {"quadrature": 1e-12, "newton": 1e-11, "cond_cap": 1e12},
      "outputs": {"prefix": "run"},
      "acceptance": {"max_err_cos": 0.15, "ratio_min": 0.3, "ratio_max": 0.8}
    }

Per-node failures are recorded in the summary; the exit status reports
configuration errors (2), global numeric failures (3) and failed acceptance
checks (4).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import exact_ist, modulation, whitham
from .asymptotics import evaluate
from .errors import ConfigError, FluxonError, NumericError
from .exact_ist import DEFAULT_COND_CAP, WaveSample
from .profiles import ImpulseProfile, make_sech_profile, profile_from_scrG
from .spectra import bohr_sommerfeld

MODES = ("spectrum", "exact", "asymptotic", "compare", "whitham", "heatmap")
SAMPLE_FIELDS = ("cos_half", "sin_half", "eps_ut", "u_mod4pi")
ERROR_FIELDS = ("cos", "sin", "ut", "u")
DEFAULT_TOLERANCES = {"quadrature": 1e-12, "newton": modulation.NEWTON_TOL, "cond_cap": DEFAULT_COND_CAP}
ACCEPTANCE_KEYS = ("max_err_cos", "ratio_min", "ratio_max", "max_whitham_residual", "max_velocity_gap")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_ACCEPTANCE = 0, 2, 3, 4


class JoinError(FluxonError, ValueError):
    """Two tables to be compared do not share the same (x, t, N) keys."""


# --- configuration -------------------------------------------------------------------


@dataclass(frozen=True)
class GridSpec:
    min: float
    max: float
    count: int

    def values(self) -> np.ndarray:
        if self.count == 1:
            return np.array([self.min])
        return np.linspace(self.min, self.max, self.count)


@dataclass(frozen=True)
class ScenarioConfig:
    mode: str
    profile: dict
    N: tuple[int, ...]
    x_grid: GridSpec
    t_grid: GridSpec
    delta_policy: str = "sign"
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    outputs: dict = field(default_factory=dict)
    acceptance: dict = field(default_factory=dict)
    whitham_h: float = 5e-3

    @property
    def prefix(self) -> str:
        return str(self.outputs.get("prefix", self.mode))


def _grid(raw, name: str) -> GridSpec:
    if not isinstance(raw, dict):
        raise ConfigError(f"{name} must be an object with min, max, count")
    try:
        g = GridSpec(float(raw["min"]), float(raw["max"]), int(raw["count"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{name}: {exc}") from exc
    if g.count < 1:
        raise ConfigError(f"{name} is empty")
    if not (math.isfinite(g.min) and math.isfinite(g.max)):
        raise ConfigError(f"{name} bounds must be finite")
    if g.max < g.min or (g.count > 1 and g.max == g.min):
        raise ConfigError(f"{name} must be sorted with distinct nodes")
    return g


def validate_config(raw: dict, mode: str | None = None, overrides: dict | None = None) -> ScenarioConfig:
    """Check a decoded JSON document and turn it into a ScenarioConfig."""
    if not isinstance(raw, dict):
        raise ConfigError("the configuration must be a JSON object")
    mode = mode or raw.get("mode")
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}, got {mode!r}")
    profile = raw.get("profile")
    if not isinstance(profile, dict) or profile.get("kind") not in ("sech", "scrG"):
        raise ConfigError("profile must be an object with kind 'sech' or 'scrG'")
    Ns = raw.get("N", [])
    if isinstance(Ns, int):
        Ns = [Ns]
    if not isinstance(Ns, list) or not all(isinstance(n, int) and n >= 1 for n in Ns):
        raise ConfigError("N must be a positive integer or a list of them")
    if mode != "whitham" and not Ns:
        raise ConfigError(f"mode {mode} needs at least one N")
    if Ns != sorted(set(Ns)):
        raise ConfigError("N list must be sorted without repeats")
    x_grid = _grid(raw.get("x_grid"), "x_grid")
    t_grid = _grid(raw.get("t_grid"), "t_grid")
    tol = dict(DEFAULT_TOLERANCES)
    tol.update(raw.get("tolerances", {}))
    tol.update({k: v for k, v in (overrides or {}).items() if v is not None})
    for key, value in tol.items():
        if key not in DEFAULT_TOLERANCES:
            raise ConfigError(f"unknown tolerance {key!r}")
        if not (isinstance(value, (int, float)) and value > 0):
            raise ConfigError(f"tolerance {key} must be positive, got {value!r}")
    policy = raw.get("delta_policy", "sign")
    if policy not in ("sign", "search"):
        raise ConfigError("delta_policy must be 'sign' or 'search'")
    acceptance = raw.get("acceptance", {})
    unknown = set(acceptance) - set(ACCEPTANCE_KEYS)
    if unknown:
        raise ConfigError(f"unknown acceptance keys {sorted(unknown)}")
    if mode in ("asymptotic", "compare", "whitham") and t_grid.min < 0.0:
        raise ConfigError("the asymptotic t_grid must be nonnegative")
    whitham_h = float(raw.get("whitham_h", 5e-3))
    if not whitham_h > 0.0:
        raise ConfigError("whitham_h must be positive")
    outputs = raw.get("outputs", {})
    if not isinstance(outputs, dict):
        raise ConfigError("outputs must be an object")
    return ScenarioConfig(mode, profile, tuple(Ns), x_grid, t_grid, policy,
                          {k: float(v) for k, v in tol.items()}, outputs, dict(acceptance), whitham_h)


def load_config(path: str | Path, mode: str | None = None, overrides: dict | None = None) -> ScenarioConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read configuration: {exc}") from exc
    return validate_config(raw, mode, overrides)


def build_profile(entry: dict) -> ImpulseProfile:
    """sech: {"A": ...}; scrG: {"G0": ..., "coefficients": [...]} with a polynomial in m / G0^2."""
    try:
        if entry["kind"] == "sech":
            return make_sech_profile(float(entry["A"]))
        G0 = float(entry["G0"])
        coeffs = [float(c) for c in entry.get("coefficients", [1.0])]
        return profile_from_scrG(lambda m: np.polyval(coeffs[::-1], np.asarray(m) / (G0 * G0)), G0)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad profile entry: {exc}") from exc


# --- tables and comparison --------------------------------------------------------------

Key = tuple[float, float, int]


@dataclass(frozen=True)
class ComparisonRecord:
    x: float
    t: float
    N: int
    exact: WaveSample
    asymp: WaveSample
    err_cos: float
    err_sin: float
    err_ut: float
    err_u: float


def _wrap4(d: float) -> float:
    return (d + 2.0 * np.pi) % (4.0 * np.pi) - 2.0 * np.pi


def compare(exact_table: dict[Key, WaveSample], asymp_table: dict[Key, WaveSample]):
    """Per-node absolute errors and per-N sup/mean summaries with ratios across consecutive N.

    err_u is the distance of the two angles modulo 4 pi.
    """
    if set(exact_table) != set(asymp_table):
        missing = sorted(set(exact_table) ^ set(asymp_table))[:5]
        raise JoinError(f"tables have different (x, t, N) keys, e.g. {missing}")
    records = []
    for key in sorted(exact_table):
        e, a = exact_table[key], asymp_table[key]
        records.append(ComparisonRecord(
            key[0], key[1], key[2], e, a,
            abs(e.cos_half - a.cos_half), abs(e.sin_half - a.sin_half), abs(e.eps_ut - a.eps_ut),
            abs(_wrap4(e.u_mod4pi - a.u_mod4pi)),
        ))
    return records, summarize(records)


def summarize(records) -> dict:
    """sup and mean of every error column per N, and sup-error ratios across consecutive N."""
    by_N: dict[int, list] = {}
    for r in records:
        by_N.setdefault(int(r.N), []).append(r)
    out: dict = {"per_N": {}, "ratios": {}}
    for n in sorted(by_N):
        rows = by_N[n]
        stats = {"count": len(rows)}
        for name in ERROR_FIELDS:
            vals = np.array([getattr(r, f"err_{name}") for r in rows])
            stats[f"sup_err_{name}"] = float(vals.max())
            stats[f"mean_err_{name}"] = float(vals.mean())
        out["per_N"][str(n)] = stats
    Ns = sorted(by_N)
    for lo, hi in zip(Ns[:-1], Ns[1:]):
        ratios = {}
        for name in ERROR_FIELDS:
            den = out["per_N"][str(lo)][f"sup_err_{name}"]
            num = out["per_N"][str(hi)][f"sup_err_{name}"]
            ratios[name] = float(num / den) if den > 0.0 else None
        out["ratios"][f"{hi}/{lo}"] = ratios
    return out


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    if v is None:
        return "nan"
    return f"{float(v):.17g}"


def write_csv(path: Path, header, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


SAMPLE_HEADER = ["x", "t", "N", *SAMPLE_FIELDS]
COMPARISON_HEADER = (["x", "t", "N"] + [f"{f}_exact" for f in SAMPLE_FIELDS]
                     + [f"{f}_asymp" for f in SAMPLE_FIELDS] + [f"err_{f}" for f in ERROR_FIELDS])
STATE_HEADER = ["x", "t", "case", "w0_re", "w0_im", "w1_re", "w1_im", "n_p", "E", "m", "Phi",
                "dPhi_dx", "dPhi_dt", "w_plus"]
WHITHAM_HEADER = ["x", "t", "case", "E", "classification", "discriminant", "c0_re", "c0_im",
                  "c1_re", "c1_im", "velocity_gap", "h", "residual_h", "residual_half_h", "ratio"]


def sample_rows(table: dict[Key, WaveSample]):
    for key in sorted(table):
        s = table[key]
        yield [key[0], key[1], key[2], *(getattr(s, f) for f in SAMPLE_FIELDS)]


def comparison_rows(records):
    for r in records:
        yield ([r.x, r.t, r.N] + [getattr(r.exact, f) for f in SAMPLE_FIELDS]
               + [getattr(r.asymp, f) for f in SAMPLE_FIELDS]
               + [getattr(r, f"err_{f}") for f in ERROR_FIELDS])


def state_row(s: modulation.ModulationState):
    return [s.x, s.t, s.case_tag, s.w0.real, s.w0.imag, s.w1.real, s.w1.imag, s.n_p, s.energy_E,
            s.m, s.Phi, s.dPhi_dx, s.dPhi_dt, s.w_plus]


def read_comparison_csv(path: str | Path):
    """Records rebuilt from a comparison CSV, enough to recompute the summary."""
    records = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            def sample(tag):
                return WaveSample(float(row["x"]), float(row["t"]),
                                  *(float(row[f"{f}_{tag}"]) for f in SAMPLE_FIELDS))
            records.append(ComparisonRecord(
                float(row["x"]), float(row["t"]), int(row["N"]), sample("exact"), sample("asymp"),
                *(float(row[f"err_{f}"]) for f in ERROR_FIELDS)))
    return records


# --- SVG -------------------------------------------------------------------------------


def cos_color(value: float) -> str:
    """Linear map of cos(u) in [-1, 1] from blue (-1) to red (+1)."""
    s = 0.5 * (min(1.0, max(-1.0, value)) + 1.0)
    lo, hi = (49, 54, 149), (165, 0, 38)
    r, g, b = (round(l + s * (h - l)) for l, h in zip(lo, hi))
    return f"#{r:02x}{g:02x}{b:02x}"


def heatmap_svg(x, t, values, cell: int = 4) -> str:
    """cos(u) over the grid: one rect per cell, rows from the largest t at the top."""
    nx, nt = len(x), len(t)
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{nx * cell}" height="{nt * cell}" '
             f'viewBox="0 0 {nx * cell} {nt * cell}">',
             f"<title>cos(u) on x in [{x[0]:g}, {x[-1]:g}], t in [{t[0]:g}, {t[-1]:g}]</title>"]
    for row in range(nt):
        k = nt - 1 - row
        for i in range(nx):
            v = values[i, k]
            color = "#808080" if not np.isfinite(v) else cos_color(float(v))
            parts.append(f'<rect x="{i * cell}" y="{row * cell}" width="{cell}" height="{cell}" '
                         f'fill="{color}"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


# --- orchestration ---------------------------------------------------------------------


@dataclass
class Bundle:
    files: list[str] = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    acceptance_failures: list[str] = field(default_factory=list)


def _spectra(profile, config):
    out = {}
    for n in config.N:
        out[n] = bohr_sommerfeld(profile, n, quad_tol=config.tolerances["quadrature"])
    return out


def _exact_table(profile, data_by_N, config, failures):
    table: dict[Key, WaveSample] = {}
    max_cond = 1.0
    xs, ts = config.x_grid.values(), config.t_grid.values()
    for n, data in data_by_N.items():
        grid = exact_ist.field_grid(data, xs, ts, config.tolerances["cond_cap"],
                                    delta_search=config.delta_policy == "search")
        max_cond = max(max_cond, grid.max_cond)
        for x, t, msg in grid.failures:
            failures.append({"stage": "exact", "x": x, "t": t, "N": n, "error": msg})
        for i, x in enumerate(xs):
            for k, t in enumerate(ts):
                s = grid.samples[i][k]
                if s is not None:
                    table[(float(x), float(t), n)] = s
    return table, max_cond


def _state_columns(profile, config, failures):
    """Modulation states at every grid node reachable by continuation from t = 0."""
    states = {}
    ts = config.t_grid.values()
    for x in config.x_grid.values():
        try:
            state = modulation.initial_state(profile, float(x))
        except FluxonError as exc:
            failures.append({"stage": "modulation", "x": float(x), "t": None, "error": str(exc)})
            continue
        for t in ts:
            try:
                if t > state.t:
                    n = max(1, int(np.ceil((t - state.t) / 0.005)))
                    state = modulation.newton_continue(profile, state, float(t), n)
            except FluxonError as exc:
                failures.append({"stage": "modulation", "x": float(x), "t": float(t), "error": str(exc)})
                break
            states[(float(x), float(t))] = state
    return states


def _asymptotic_table(states, data_by_N, failures):
    table: dict[Key, WaveSample] = {}
    for n, data in data_by_N.items():
        xs = sorted({k[0] for k in states})
        for x in xs:
            column = sorted((k[1], s) for k, s in states.items() if k[0] == x)
            samples = []
            for t, s in column:
                try:
                    samples.append(evaluate(s, data.eps))
                except FluxonError as exc:
                    failures.append({"stage": "asymptotic", "x": x, "t": t, "N": n, "error": str(exc)})
            angle = np.array([s.u_mod4pi for s in samples])
            unwrapped = 2.0 * np.unwrap(0.5 * angle) if len(angle) > 1 else angle
            for s, u in zip(samples, unwrapped):
                table[(s.x, s.t, n)] = replace(s, u_mod4pi=float(u))
    return table


def _check(bundle: Bundle, name: str, ok: bool, detail: str) -> None:
    bundle.summary.setdefault("acceptance", {})[name] = {"pass": bool(ok), "detail": detail}
    if not ok:
        bundle.acceptance_failures.append(f"{name}: {detail}")


def run_scenario(config: ScenarioConfig, out_dir: str | Path) -> Bundle:
    """Run one scenario and write its CSV/SVG/JSON artifacts into out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    profile = build_profile(config.profile)
    bundle = Bundle()
    failures: list[dict] = []
    summary = bundle.summary
    summary.update({"mode": config.mode, "N": list(config.N), "failures": failures})
    prefix = config.prefix

    def emit(name, header, rows):
        path = out / f"{prefix}_{name}.csv"
        write_csv(path, header, rows)
        bundle.files.append(str(path))

    with modulation.newton_tolerance(config.tolerances["newton"]):
        data_by_N = _spectra(profile, config) if config.N else {}

        if config.mode == "spectrum":
            rows = [[n, k, v, d.eps] for n, d in data_by_N.items() for k, v in enumerate(d.v)]
            emit("spectrum", ["N", "k", "v_k", "eps"], rows)
            for n, d in data_by_N.items():
                path = out / f"{prefix}_scattering_N{n}.json"
                path.write_text(d.to_json() + "\n")
                bundle.files.append(str(path))
            summary["eigenvalue_counts"] = {str(n): len(d.v) for n, d in data_by_N.items()}

        if config.mode in ("exact", "compare", "heatmap"):
            exact, max_cond = _exact_table(profile, data_by_N, config, failures)
            summary["max_condition"] = max_cond
            emit("exact", SAMPLE_HEADER, sample_rows(exact))

        if config.mode in ("asymptotic", "compare", "whitham"):
            states = _state_columns(profile, config, failures)
            emit("states", STATE_HEADER, (state_row(states[k]) for k in sorted(states)))

        if config.mode in ("asymptotic", "compare"):
            asymp = _asymptotic_table(states, data_by_N, failures)
            emit("asymptotic", SAMPLE_HEADER, sample_rows(asymp))

        if config.mode == "compare":
            common = set(exact) & set(asymp)
            records, stats = compare({k: exact[k] for k in common}, {k: asymp[k] for k in common})
            emit("comparison", COMPARISON_HEADER, comparison_rows(records))
            summary.update(stats)
            acc = config.acceptance
            if "max_err_cos" in acc and config.N:
                sup = stats["per_N"].get(str(config.N[0]), {}).get("sup_err_cos", math.inf)
                _check(bundle, "max_err_cos", sup <= acc["max_err_cos"], f"sup err_cos {sup:.6g} at N={config.N[0]}")
            if ("ratio_min" in acc or "ratio_max" in acc) and len(config.N) > 1:
                for label, r in stats["ratios"].items():
                    ratio = r["cos"]
                    lo, hi = acc.get("ratio_min", -math.inf), acc.get("ratio_max", math.inf)
                    ok = ratio is not None and lo <= ratio <= hi
                    _check(bundle, f"ratio_{label}", ok, f"err_cos ratio {ratio}")

        if config.mode == "whitham":
            rows, worst_gap, worst_res = [], 0.0, 0.0
            for key in sorted(states):
                s = states[key]
                try:
                    c = whitham.characteristic_velocities(s.w0, s.w1, s.case_tag)
                    ch = whitham.hat_velocities(s.w0, s.w1, s.case_tag)
                    cls = whitham.classify(s.energy_E, s.case_tag)
                except FluxonError as exc:
                    failures.append({"stage": "whitham", "x": key[0], "t": key[1], "error": str(exc)})
                    continue
                gap = max(abs(c[0] - ch[0]), abs(c[1] - ch[1]))
                worst_gap = max(worst_gap, gap)
                h = config.whitham_h
                res = res2 = None
                if s.t >= h:
                    try:
                        res = whitham.stencil_residual(profile, s, h).max_residual
                        res2 = whitham.stencil_residual(profile, s, 0.5 * h).max_residual
                        worst_res = max(worst_res, res)
                    except FluxonError as exc:
                        failures.append({"stage": "whitham_residual", "x": key[0], "t": key[1],
                                         "error": str(exc)})
                ratio = res / res2 if res is not None and res2 else None
                rows.append([s.x, s.t, s.case_tag, s.energy_E, cls.kind.value, cls.discriminant,
                             c[0].real, c[0].imag, c[1].real, c[1].imag, gap, h, res, res2, ratio])
            emit("whitham", WHITHAM_HEADER, rows)
            summary["max_velocity_gap"] = worst_gap
            summary["max_whitham_residual"] = worst_res
            acc = config.acceptance
            if "max_velocity_gap" in acc:
                _check(bundle, "max_velocity_gap", worst_gap <= acc["max_velocity_gap"], f"{worst_gap:.3e}")
            if "max_whitham_residual" in acc:
                _check(bundle, "max_whitham_residual", worst_res <= acc["max_whitham_residual"],
                       f"{worst_res:.3e}")

        if config.mode == "heatmap":
            xs, ts = config.x_grid.values(), config.t_grid.values()
            n = config.N[0]
            values = np.full((len(xs), len(ts)), np.nan)
            for (x, t, nn), s in exact.items():
                if nn == n:
                    values[np.searchsorted(xs, x), np.searchsorted(ts, t)] = s.cos_half**2 - s.sin_half**2
            path = out / f"{prefix}_heatmap_N{n}.svg"
            cell = int(config.outputs.get("svg_cell", 4))
            path.write_text(heatmap_svg(xs, ts, values, cell))
            bundle.files.append(str(path))

    summary["failure_count"] = len(failures)
    path = out / f"{prefix}_summary.json"
    path.write_text(json.dumps(summary, indent=2, sort_keys=True, default=str) + "\n")
    bundle.files.append(str(path))
    return bundle


# --- CLI -------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fluxon", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode in MODES:
        p = sub.add_parser(mode, help=f"run a {mode} scenario")
        p.add_argument("--config", required=True, help="scenario JSON document")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--quad-tol", type=float, help="quadrature tolerance override")
        p.add_argument("--newton-tol", type=float, help="Newton residual tolerance override")
        p.add_argument("--cond-cap", type=float, help="condition-number cap override")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {"quadrature": args.quad_tol, "newton": args.newton_tol, "cond_cap": args.cond_cap}
    try:
        config = load_config(args.config, args.mode, overrides)
        build_profile(config.profile)
    except (ConfigError, FluxonError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        bundle = run_scenario(config, args.out)
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except FluxonError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for f in bundle.files:
        print(f)
    if bundle.acceptance_failures:
        for msg in bundle.acceptance_failures:
            print(f"acceptance failure: {msg}", file=sys.stderr)
        return EXIT_ACCEPTANCE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
