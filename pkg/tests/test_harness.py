from __future__ import annotations

import json
import re

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fluxon import ConfigError, ScatteringData, WaveSample
from fluxon.harness import (
    JoinError,
    _fmt,
    compare,
    cos_color,
    heatmap_svg,
    main,
    read_comparison_csv,
    run_scenario,
    summarize,
    validate_config,
)


def _raw(mode="compare", **kw):
    raw = {
        "mode": mode,
        "profile": {"kind": "sech", "A": 0.75},
        "N": [4, 8],
        "x_grid": {"min": 1.4, "max": 1.6, "count": 2},
        "t_grid": {"min": 0.05, "max": 0.1, "count": 2},
    }
    raw.update(kw)
    return raw


def _write(tmp_path, raw, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(raw))
    return str(path)


def test_empty_grid_rejected():
    with pytest.raises(ConfigError):
        validate_config(_raw(t_grid={"min": 0.0, "max": 1.0, "count": 0}))


@pytest.mark.parametrize("bad", [
    {"tolerances": {"bogus": 1e-3}},
    {"tolerances": {"newton": -1.0}},
    {"N": [8, 4]},
    {"x_grid": {"min": 1.0, "max": 0.0, "count": 3}},
    {"profile": {"kind": "gaussian"}},
    {"acceptance": {"max_err_sin": 1.0}},
])
def test_invalid_configs_rejected(bad):
    with pytest.raises(ConfigError):
        validate_config(_raw(**bad))


def test_flag_overrides_take_precedence():
    cfg = validate_config(_raw(tolerances={"newton": 1e-9}), overrides={"newton": 1e-6, "cond_cap": None})
    assert cfg.tolerances["newton"] == 1e-6
    assert cfg.tolerances["cond_cap"] == 1e12


def test_cli_config_error_exit_code(tmp_path, capsys):
    path = _write(tmp_path, _raw(t_grid={"min": 0.0, "max": 1.0, "count": 0}))
    assert main(["compare", "--config", path, "--out", str(tmp_path)]) == 2
    assert main(["exact", "--config", str(tmp_path / "missing.json")]) == 2


def test_cli_acceptance_failure_exit_code(tmp_path, capsys):
    path = _write(tmp_path, _raw(acceptance={"max_err_cos": 1e-12}))
    assert main(["compare", "--config", path, "--out", str(tmp_path)]) == 4
    assert "acceptance failure" in capsys.readouterr().err


def test_cli_success_and_outputs(tmp_path, capsys):
    path = _write(tmp_path, _raw(acceptance={"max_err_cos": 0.5}))
    assert main(["compare", "--config", path, "--out", str(tmp_path)]) == 0
    names = {p.name for p in tmp_path.iterdir()}
    assert {"compare_exact.csv", "compare_asymptotic.csv", "compare_states.csv",
            "compare_comparison.csv", "compare_summary.json"} <= names
    header = (tmp_path / "compare_exact.csv").read_text().splitlines()[0]
    assert header == "x,t,N,cos_half,sin_half,eps_ut,u_mod4pi"


def _sample(x, t, c, s, g=0.0):
    return WaveSample(x, t, c, s, g, 2.0 * np.arctan2(s, c))


def test_compare_identical_tables_gives_zero_errors():
    table = {(0.1 * i, 0.2, 8): _sample(0.1 * i, 0.2, np.cos(i), np.sin(i), i) for i in range(5)}
    records, stats = compare(table, dict(table))
    assert all(r.err_cos == r.err_sin == r.err_ut == r.err_u == 0.0 for r in records)
    assert stats["per_N"]["8"]["sup_err_cos"] == 0.0


def test_compare_key_mismatch():
    a = {(0.0, 0.0, 8): _sample(0.0, 0.0, 1.0, 0.0)}
    b = {(0.0, 0.1, 8): _sample(0.0, 0.1, 1.0, 0.0)}
    with pytest.raises(JoinError):
        compare(a, b)


@given(st.lists(st.tuples(st.floats(-1, 1), st.floats(-1, 1)), min_size=1, max_size=20))
def test_sup_bounded_by_mean_times_count(pairs):
    exact = {(float(i), 0.0, 4): _sample(float(i), 0.0, a, 0.0) for i, (a, _) in enumerate(pairs)}
    asymp = {(float(i), 0.0, 4): _sample(float(i), 0.0, b, 0.0) for i, (_, b) in enumerate(pairs)}
    _, stats = compare(exact, asymp)
    s = stats["per_N"]["4"]
    assert s["sup_err_cos"] <= s["mean_err_cos"] * s["count"] * (1 + 1e-12) + 1e-300


def test_ratios_across_consecutive_N():
    exact = {(0.0, 0.0, n): _sample(0.0, 0.0, 1.0, 0.0) for n in (4, 8)}
    asymp = {(0.0, 0.0, 4): _sample(0.0, 0.0, 0.8, 0.0), (0.0, 0.0, 8): _sample(0.0, 0.0, 0.9, 0.0)}
    _, stats = compare(exact, asymp)
    assert stats["ratios"]["8/4"]["cos"] == pytest.approx(0.5)


def test_rerun_is_byte_identical_and_summary_recomputable(tmp_path):
    cfg = validate_config(_raw())
    run_scenario(cfg, tmp_path / "a")
    run_scenario(cfg, tmp_path / "b")
    for name in ("compare_exact.csv", "compare_comparison.csv", "compare_states.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    summary = json.loads((tmp_path / "a" / "compare_summary.json").read_text())
    again = summarize(read_comparison_csv(tmp_path / "a" / "compare_comparison.csv"))
    assert again["ratios"] == summary["ratios"]
    assert again["per_N"] == summary["per_N"]


def test_seventeen_digit_formatting():
    assert _fmt(0.1) == "0.10000000000000001"
    assert float(_fmt(np.pi)) == np.pi
    assert _fmt(np.int64(8)) == "8" and _fmt("R") == "R" and _fmt(None) == "nan"


def test_svg_heatmap_structure():
    xs, ts = np.linspace(0, 1, 3), np.linspace(0, 1, 4)
    values = np.linspace(-1, 1, 12).reshape(3, 4)
    values[0, 0] = np.nan
    svg = heatmap_svg(xs, ts, values, cell=2)
    assert svg.count("<rect") == 12
    assert cos_color(-1.0) == "#313695" and cos_color(1.0) == "#a50026"
    assert 'fill="#808080"' in svg
    # the largest t is drawn in the top row
    first = re.search(r'<rect x="0" y="0"[^>]*fill="([^"]+)"', svg).group(1)
    assert first == cos_color(values[0, 3])


def test_spectrum_mode_round_trips_scattering_data(tmp_path):
    cfg = validate_config(_raw(mode="spectrum", N=[8]))
    run_scenario(cfg, tmp_path)
    data = ScatteringData.from_json((tmp_path / "spectrum_scattering_N8.json").read_text())
    assert data.N == 8 and len(data.v) == 8
    assert data.v[0] == pytest.approx(2.8125, abs=1e-12)


def test_whitham_mode_reports_residuals(tmp_path):
    raw = _raw(mode="whitham", N=[], x_grid={"min": 1.5, "max": 1.5, "count": 1},
               t_grid={"min": 0.05, "max": 0.05, "count": 1},
               acceptance={"max_velocity_gap": 1e-8, "max_whitham_residual": 1e-2})
    bundle = run_scenario(validate_config(raw), tmp_path)
    assert not bundle.acceptance_failures
    assert bundle.summary["max_whitham_residual"] > 0.0
