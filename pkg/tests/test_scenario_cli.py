from __future__ import annotations

import csv
import io
import json
import math

import pytest

from heatstokes.cli import main
from heatstokes.jumps import jump_numeric
from heatstokes.errors import ParseError, SectorError, ValidationError
from heatstokes.scenario import (CSV_HEADER, load_scenario, report_json,
                                 run_validation, scenario_from_dict, sweep, sweep_csv)
from conftest import SCENARIO_DIR

CORPUS = sorted(SCENARIO_DIR.glob("*.json"))
POLE = {"datum": {"kind": "laurent", "z0": [1, 0], "coefficients": [1]}, "t": [0.1]}


def write(tmp_path, obj, name="s.json"):
    path = tmp_path / name
    path.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return path


# loading

def test_defaults(tmp_path):
    sc = load_scenario(write(tmp_path, POLE))
    assert sc.name == "s"
    assert (sc.p, sc.q, sc.z, sc.r) == (1, 2, 0j, 1.0)
    assert sc.eps_dir == 0.3 and sc.tolerance == 1e-6 and sc.prefer_heat
    assert sc.stokes_direction() == pytest.approx(0.0)


def test_malformed_json_reports_position(tmp_path):
    with pytest.raises(ParseError, match="line 2, column"):
        load_scenario(write(tmp_path, '{"t": [0.1],\n  "datum": }'))


@pytest.mark.parametrize("patch,exc,field", [
    ({"datum": {"kind": "power", "z0": [1, 0], "lambda": 2.0}}, ValidationError, "datum.lambda"),
    ({"datum": {"kind": "log", "z0": [0, 0]}}, ValidationError, "datum.z0"),
    ({"datum": {"kind": "hyperbolic", "z0": [1, 0]}}, ParseError, "datum.kind"),
    ({"t": "0.1"}, ParseError, "'t'"),
    ({"t": [0.0]}, ValidationError, "t[0]"),
    ({"p": 2, "q": 2}, ValidationError, "'p'"),
    ({"z": [1.5, 0]}, ValidationError, "'z'"),
    ({"eps_dir": -1}, ValidationError, "eps_dir"),
    ({"bogus": 1}, ParseError, "bogus"),
    ({"expected": "nope"}, ValidationError, "expected"),
])
def test_field_errors(tmp_path, patch, exc, field):
    with pytest.raises(exc, match=field.replace("[", r"\[").replace(".", r"\.")):
        load_scenario(write(tmp_path, {**POLE, **patch}))


@pytest.mark.parametrize("path", CORPUS, ids=[p.stem for p in CORPUS])
def test_corpus_passes(path):
    report = run_validation(load_scenario(path))
    assert report.passed, [r.error or r.rel_err for r in report.rows]


def test_row_level_sector_error():
    sc = scenario_from_dict({**POLE, "t": [0.1, [0.0, 0.5]]})
    report = run_validation(sc)
    good, bad = report.rows
    assert good.passed and good.error is None
    assert not bad.passed and bad.error.startswith("SectorError")
    assert not report.passed
    with pytest.raises(SectorError):
        jump_numeric(sc.data[0], 0, 0.5j, 0.0, sc.eps_dir)


def test_polynomial_rows_use_absolute_rule():
    row = run_validation(load_scenario(SCENARIO_DIR / "polynomial.json")).rows[0]
    assert row.closed_jump == 0 and row.passed
    assert row.rel_err == row.abs_err <= 1e-8


def test_reports_deterministic_across_threads():
    sc = load_scenario(SCENARIO_DIR / "pole.json")
    texts = {report_json([run_validation(sc, n)]) for n in (1, 1, 2, 4)}
    assert len(texts) == 1


# sweeps

def read_csv(text):
    rows = list(csv.reader(io.StringIO(text)))
    return tuple(rows[0]), [[float(x) for x in r] for r in rows[1:]]


def test_t_modulus_sweep_matches_pole_magnitude():
    sc = load_scenario(SCENARIO_DIR / "pole.json")
    grid = list(sc.sweep_grid)
    header, rows = read_csv(sweep_csv(grid, sweep(sc)))
    assert header == CSV_HEADER
    for g, r in zip(grid, rows):
        mag = math.hypot(r[3], r[4])
        assert mag == pytest.approx(math.sqrt(math.pi / g) * math.exp(-1 / (4 * g)), rel=1e-12)
        assert r[5] <= sc.tolerance


def test_eps_dir_sweep_constant():
    sc = load_scenario(SCENARIO_DIR / "essential_sqrt2.json")
    rows = sweep(sc, "eps_dir", [0.2, 0.3, 0.4])
    ref = rows[0].numeric_jump
    assert all(abs(r.numeric_jump - ref) <= 1e-6 * abs(ref) for r in rows)


def test_z_real_sweep():
    sc = load_scenario(SCENARIO_DIR / "log.json")
    rows = sweep(sc, "z-real", [-0.2, 0.0, 0.2])
    assert all(r.passed for r in rows)


def test_bad_sweep_axis():
    with pytest.raises(ValidationError):
        sweep(load_scenario(SCENARIO_DIR / "pole.json"), "angle", [0.1])


# command line

def test_cli_validate(tmp_path):
    out = tmp_path / "r.json"
    assert main(["validate", "--config", str(SCENARIO_DIR / "pole.json"), "--out", str(out)]) == 0
    body = json.loads(out.read_text())
    assert body["pass"] and body["reports"][0]["scenario"] == "pole"


def test_cli_validate_failure_exit(tmp_path):
    path = write(tmp_path, {**POLE, "t": [[0.0, 0.5]]})
    assert main(["validate", "--config", str(path), "--out", str(tmp_path / "o")]) == 1


def test_cli_tol_override(tmp_path):
    out = tmp_path / "r.json"
    main(["validate", "--config", str(SCENARIO_DIR / "pole.json"), "--tol", "1e-3",
          "--out", str(out)])
    assert json.loads(out.read_text())["reports"][0]["tolerance"] == 1e-3


def test_cli_parse_error_exit(tmp_path, capsys):
    path = write(tmp_path, "{")
    assert main(["validate", "--config", str(path)]) == 2
    assert "ParseError" in capsys.readouterr().err


def test_cli_sweep_and_empty_grid(tmp_path):
    out = tmp_path / "s.csv"
    cfg = str(SCENARIO_DIR / "pole.json")
    assert main(["sweep", "--config", cfg, "--axis", "t-modulus", "--grid", "0.1", "0.2",
                 "--out", str(out)]) == 0
    header, rows = read_csv(out.read_text())
    assert header == CSV_HEADER and [r[0] for r in rows] == [0.1, 0.2]
    assert main(["sweep", "--config", cfg, "--axis", "t-modulus", "--grid",
                 "--out", str(out)]) == 0
    assert out.read_text() == ",".join(CSV_HEADER) + "\n"


def test_cli_sum_and_jump(tmp_path):
    cfg = str(SCENARIO_DIR / "pole.json")
    out = tmp_path / "o.json"
    assert main(["jump", "--config", cfg, "--out", str(out)]) == 0
    jump = json.loads(out.read_text())["jumps"][0]["rows"][0]
    assert jump["methods"] == ["theorem1"]
    assert main(["sum", "--config", cfg, "--out", str(out)]) == 0
    rows = json.loads(out.read_text())["sums"][0]["rows"]
    assert all(r["error"] is None for r in rows)


def test_cli_kernel(tmp_path):
    out = tmp_path / "k.csv"
    assert main(["kernel", "--alpha", "2", "--re", "0", "1", "3", "--out", str(out)]) == 0
    rows = list(csv.reader(io.StringIO(out.read_text())))
    assert rows[0] == ["re_tau", "im_tau", "re_value", "im_value"]
    assert float(rows[1][2]) == pytest.approx(1 / math.sqrt(math.pi), rel=1e-14)


def test_cli_threads_must_be_positive():
    with pytest.raises(SystemExit):
        main(["validate", "--config", "x", "--threads", "0"])
