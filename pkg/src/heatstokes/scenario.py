"""Scenario files, the validation runner and parameter sweeps.

A scenario is one JSON file describing a datum (or a list of data whose
contributions are added), the evaluation point ``z``, the times ``t`` and the
numerical settings. ``docs/scenario_schema.md`` lists every field.
"""

from __future__ import annotations

import cmath
import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

from .data import (CauchyDatum, EssentialPower, LaurentTail, LogBranch, Polynomial, PowerBranch,
                   exp_pole, local_stokes_direction)
from .errors import HeatStokesError, ParseError, SectorError, ValidationError
from .kernels import unwrap_near
from .jumps import closed_form_jump, jump_numeric
from .lateral import LateralSumRequest, lateral_sum, sector_check
from .quadrature import QuadratureSettings

DATUM_KINDS = ("polynomial", "laurent", "exp_pole", "log", "power", "essential_power")
SWEEP_AXES = ("t-modulus", "z-real", "eps_dir")
CSV_HEADER = ("axis", "re_num", "im_num", "re_closed", "im_closed", "rel_err")
ZERO_JUMP_ABS_TOL = 1e-8
REL_FLOOR = 1e-300


@dataclass(frozen=True)
class Scenario:
    """Validated scenario.

    Parameters
    ----------
    name : str
    data : tuple of CauchyDatum
        Contributions are added; all of them share the Stokes direction used.
    descriptors : tuple of dict
        The parsed datum descriptors, kept for reports.
    z : complex
    t_values : tuple of complex
    p, q : int
    eps_dir : float
        Half-opening between the two lateral directions.
    delta : float or None
        Stokes direction in the ``t`` plane; ``None`` means ``q arg(z0 - z)/p``
        of the first singular datum.
    tolerance : float
        Relative tolerance of the pass test.
    series_tol : float
    quadrature : QuadratureSettings
    r, eps_tilde : float
    prefer_heat : bool
        Use the Gaussian kernel for ``(p, q) = (1, 2)``.
    expected : str or None
        Tag of an independent closed-form reference (see ``EXPECTED_TAGS``).
    sweep_axis : str or None
    sweep_grid : tuple of float
    """

    name: str
    data: tuple
    descriptors: tuple
    z: complex = 0j
    t_values: tuple = (0.1 + 0j,)
    p: int = 1
    q: int = 2
    eps_dir: float = 0.3
    delta: float | None = None
    tolerance: float = 1e-6
    series_tol: float = 1e-12
    quadrature: QuadratureSettings = field(default_factory=QuadratureSettings)
    r: float = 1.0
    eps_tilde: float = 0.05
    prefer_heat: bool = True
    expected: str | None = None
    sweep_axis: str | None = None
    sweep_grid: tuple = ()

    def stokes_direction(self, z: complex | None = None) -> float:
        if self.delta is not None:
            return self.delta
        z = self.z if z is None else z
        for d in self.data:
            if d.z0 is not None:
                return local_stokes_direction(d, z, self.p, self.q)
        return 0.0


# ---------------------------------------------------------------- parsing


def _complex(value: Any, fieldname: str) -> complex:
    if isinstance(value, bool):
        raise ParseError(f"field '{fieldname}': expected a number or [re, im], got {value!r}")
    if isinstance(value, (int, float)):
        return complex(float(value), 0.0)
    if (isinstance(value, list) and len(value) == 2
            and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)):
        return complex(float(value[0]), float(value[1]))
    raise ParseError(f"field '{fieldname}': expected a number or [re, im], got {value!r}")


def _number(value: Any, fieldname: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"field '{fieldname}': expected a real number, got {value!r}")
    return float(value)


def _integer(value: Any, fieldname: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ParseError(f"field '{fieldname}': expected an integer, got {value!r}")
    return int(value)


def _require(obj: dict, key: str, where: str) -> Any:
    if key not in obj:
        raise ParseError(f"field '{where}{key}': missing")
    return obj[key]


def _check_keys(obj: dict, allowed: Sequence[str], where: str) -> None:
    extra = sorted(set(obj) - set(allowed))
    if extra:
        raise ParseError(f"field '{where}{extra[0]}': unknown key")


def parse_datum(desc: Any, where: str = "datum.") -> CauchyDatum:
    """Build a datum from its JSON descriptor."""
    if not isinstance(desc, dict):
        raise ParseError(f"field '{where.rstrip('.')}': expected an object")
    kind = _require(desc, "kind", where)
    if kind not in DATUM_KINDS:
        raise ParseError(f"field '{where}kind': unknown kind {kind!r}; expected one of {DATUM_KINDS}")
    try:
        if kind == "polynomial":
            _check_keys(desc, ("kind", "coefficients"), where)
            coeffs = _require(desc, "coefficients", where)
            if not isinstance(coeffs, list) or not coeffs:
                raise ParseError(f"field '{where}coefficients': expected a nonempty list")
            return Polynomial(tuple(_complex(c, f"{where}coefficients[{i}]")
                                    for i, c in enumerate(coeffs)))
        z0 = _complex(_require(desc, "z0", where), f"{where}z0")
        if z0 == 0:
            raise ValidationError(f"field '{where}z0': the singular point must be nonzero")
        if kind == "laurent":
            _check_keys(desc, ("kind", "z0", "coefficients"), where)
            coeffs = _require(desc, "coefficients", where)
            if not isinstance(coeffs, list) or not coeffs:
                raise ParseError(f"field '{where}coefficients': expected a nonempty list")
            return LaurentTail(z0, tuple(_complex(c, f"{where}coefficients[{i}]")
                                         for i, c in enumerate(coeffs)))
        if kind == "exp_pole":
            _check_keys(desc, ("kind", "z0"), where)
            return exp_pole(z0)
        if kind == "log":
            _check_keys(desc, ("kind", "z0"), where)
            return LogBranch(z0)
        lam = _number(_require(desc, "lambda", where), f"{where}lambda")
        phase = desc.get("phase", "plus")
        if phase not in ("plus", "minus"):
            raise ParseError(f"field '{where}phase': expected 'plus' or 'minus'")
        if kind == "power":
            _check_keys(desc, ("kind", "z0", "lambda", "phase"), where)
            if float(lam).is_integer():
                raise ValidationError(f"field '{where}lambda': power exponent must not be an integer")
            return PowerBranch(lam, z0, phase)
        _check_keys(desc, ("kind", "z0", "lambda", "phase", "term_count"), where)
        tc = desc.get("term_count")
        if tc is not None:
            tc = _integer(tc, f"{where}term_count")
        return EssentialPower(lam, z0, phase, tc)
    except ValidationError as exc:
        msg = str(exc)
        if not msg.startswith("field"):
            msg = f"field '{where.rstrip('.')}': {msg}"
        raise ValidationError(msg) from None


SCENARIO_KEYS = ("name", "datum", "z", "t", "p", "q", "eps_dir", "delta", "tolerance",
                 "series_tol", "quadrature", "r", "eps_tilde", "prefer_heat", "expected", "sweep")
QUADRATURE_KEYS = ("rel_tol", "abs_tol", "max_radius", "max_refinements")


def scenario_from_dict(obj: Any, default_name: str = "scenario") -> Scenario:
    """Validate a decoded JSON object into a :class:`Scenario`."""
    if not isinstance(obj, dict):
        raise ParseError("field '<root>': expected a JSON object")
    _check_keys(obj, SCENARIO_KEYS, "")
    name = obj.get("name", default_name)
    if not isinstance(name, str):
        raise ParseError("field 'name': expected a string")
    raw = _require(obj, "datum", "")
    descs = raw if isinstance(raw, list) else [raw]
    if not descs:
        raise ValidationError("field 'datum': at least one datum is required")
    data = tuple(parse_datum(d, f"datum[{i}]." if isinstance(raw, list) else "datum.")
                 for i, d in enumerate(descs))
    z = _complex(obj.get("z", 0.0), "z")
    t_raw = _require(obj, "t", "")
    if not isinstance(t_raw, list):
        raise ParseError("field 't': expected a list of times")
    if len(t_raw) == 0:
        raise ValidationError("field 't': the list of times must be nonempty")
    ts = tuple(_complex(v, f"t[{i}]") for i, v in enumerate(t_raw))
    p = _integer(obj.get("p", 1), "p")
    q = _integer(obj.get("q", 2), "q")
    if not 1 <= p < q:
        raise ValidationError("field 'p': need 1 <= p < q")
    eps_dir = _number(obj.get("eps_dir", 0.3), "eps_dir")
    if not eps_dir > 0:
        raise ValidationError("field 'eps_dir': must be positive")
    delta = obj.get("delta")
    if delta is not None:
        delta = _number(delta, "delta")
    tol = _number(obj.get("tolerance", 1e-6), "tolerance")
    if not tol > 0:
        raise ValidationError("field 'tolerance': must be positive")
    series_tol = _number(obj.get("series_tol", 1e-12), "series_tol")
    if not series_tol > 0:
        raise ValidationError("field 'series_tol': must be positive")
    qd = obj.get("quadrature", {})
    if not isinstance(qd, dict):
        raise ParseError("field 'quadrature': expected an object")
    _check_keys(qd, QUADRATURE_KEYS, "quadrature.")
    qkw = {}
    for key in ("rel_tol", "abs_tol", "max_radius"):
        if key in qd:
            qkw[key] = _number(qd[key], f"quadrature.{key}")
    if "max_refinements" in qd:
        qkw["max_refinements"] = _integer(qd["max_refinements"], "quadrature.max_refinements")
    try:
        settings = QuadratureSettings(**qkw)
    except ValueError as exc:
        raise ValidationError(f"field 'quadrature': {exc}") from None
    r = _number(obj.get("r", 1.0), "r")
    if not r > 0:
        raise ValidationError("field 'r': must be positive")
    if not abs(z) < r:
        raise ValidationError(f"field 'z': |z| must be below the working radius r={r}")
    for d in data:
        if d.z0 is not None and d.z0 == z:
            raise ValidationError("field 'z': coincides with a singular point")
    for i, t in enumerate(ts):
        if t == 0:
            raise ValidationError(f"field 't[{i}]': t must be nonzero")
        if not abs(t) < r:
            raise ValidationError(f"field 't[{i}]': |t| must be below the working radius r={r}")
    eps_tilde = _number(obj.get("eps_tilde", 0.05), "eps_tilde")
    if not 0 < eps_tilde < math.pi * (q - p) / p:
        raise ValidationError("field 'eps_tilde': must lie in (0, pi (q-p)/p)")
    prefer_heat = obj.get("prefer_heat", True)
    if not isinstance(prefer_heat, bool):
        raise ParseError("field 'prefer_heat': expected true or false")
    expected = obj.get("expected")
    if expected is not None and expected not in EXPECTED_TAGS:
        raise ValidationError(f"field 'expected': unknown tag {expected!r}; "
                              f"known tags are {sorted(EXPECTED_TAGS)}")
    sweep = obj.get("sweep")
    axis, grid = None, ()
    if sweep is not None:
        if not isinstance(sweep, dict):
            raise ParseError("field 'sweep': expected an object")
        _check_keys(sweep, ("axis", "grid"), "sweep.")
        axis = _require(sweep, "axis", "sweep.")
        if axis not in SWEEP_AXES:
            raise ValidationError(f"field 'sweep.axis': expected one of {SWEEP_AXES}")
        g = sweep.get("grid", [])
        if not isinstance(g, list):
            raise ParseError("field 'sweep.grid': expected a list of numbers")
        grid = tuple(_number(v, f"sweep.grid[{i}]") for i, v in enumerate(g))
    return Scenario(name, data, tuple(descs), z, ts, p, q, eps_dir, delta, tol, series_tol,
                    settings, r, eps_tilde, prefer_heat, expected, axis, grid)


def load_scenario(path: str | Path) -> Scenario:
    """Read and validate a scenario JSON file.

    Raises
    ------
    ParseError
        Malformed JSON (with line and column) or a field of the wrong type.
    ValidationError
        A field violating a mathematical precondition.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"{path}: cannot read ({exc.strerror})") from None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    try:
        return scenario_from_dict(obj, path.stem)
    except ParseError as exc:
        raise ParseError(f"{path}: {exc}") from None
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from None


# ---------------------------------------------------------------- references


def _ref_heat_pole(sc: Scenario, t: complex, z: complex) -> complex:
    # a/(w - z0) with the Gaussian kernel: -2 pi i a K(z0 - z)
    d = sc.data[0]
    a = complex(d.coefficients[0])
    c = d.z0 - z
    arg_t = unwrap_near(cmath.phase(t), sc.stokes_direction(z))
    root = math.sqrt(abs(t)) * cmath.exp(0.5j * arg_t)
    return -2j * math.pi * a * cmath.exp(-c * c / (4 * t)) / (2.0 * math.sqrt(math.pi) * root)


def _ref_heat_log(sc: Scenario, t: complex, z: complex) -> complex:
    from scipy.special import erfc

    c = (sc.data[0].z0 - z)
    if abs(c.imag) > 0 or c.real <= 0 or t.imag != 0 or t.real <= 0:
        raise ValidationError("the erfc reference needs real positive z0 - z and t")
    return -1j * math.pi * erfc(c.real / (2.0 * math.sqrt(t.real)))


EXPECTED_TAGS = {"heat_pole": _ref_heat_pole, "heat_log_erfc": _ref_heat_log, "zero": None}


# ---------------------------------------------------------------- running


def _csum(values) -> complex:
    values = list(values)
    return complex(math.fsum(v.real for v in values), math.fsum(v.imag for v in values))


def _cjson(z: complex | None):
    return None if z is None else [float(z.real), float(z.imag)]


@dataclass
class ReportRow:
    """One ``(scenario, t)`` comparison; ``error`` holds a captured exception."""

    t: complex
    z: complex
    eps_dir: float
    delta: float
    numeric_jump: complex | None = None
    closed_jump: complex | None = None
    abs_err: float | None = None
    rel_err: float | None = None
    u_plus: complex | None = None
    u_minus: complex | None = None
    reference: complex | None = None
    reference_rel_err: float | None = None
    diagnostics: dict = field(default_factory=dict)
    passed: bool = False
    error: str | None = None

    def to_json(self) -> dict:
        def num(x):
            return None if x is None else float(x)

        return {
            "t": _cjson(self.t), "z": _cjson(self.z), "eps_dir": self.eps_dir,
            "delta": self.delta,
            "numeric_jump": _cjson(self.numeric_jump), "closed_jump": _cjson(self.closed_jump),
            "abs_err": num(self.abs_err), "rel_err": num(self.rel_err),
            "u_plus": _cjson(self.u_plus), "u_minus": _cjson(self.u_minus),
            "reference": _cjson(self.reference), "reference_rel_err": num(self.reference_rel_err),
            "diagnostics": self.diagnostics, "pass": self.passed, "error": self.error,
        }


@dataclass
class ValidationReport:
    scenario: str
    tolerance: float
    rows: list

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def to_json(self) -> dict:
        return {"scenario": self.scenario, "tolerance": self.tolerance, "pass": self.passed,
                "rows": [r.to_json() for r in self.rows]}


def evaluate_row(sc: Scenario, t: complex, z: complex | None = None,
                 eps_dir: float | None = None) -> ReportRow:
    """Numeric lateral difference and closed-form jump at one ``(t, z, eps_dir)``."""
    z = sc.z if z is None else complex(z)
    eps = sc.eps_dir if eps_dir is None else float(eps_dir)
    t = complex(t)
    row = ReportRow(t, z, eps, float("nan"))
    try:
        delta = sc.stokes_direction(z)
        row.delta = delta
        if not (sector_check(t, delta + eps, sc.p, sc.q, sc.eps_tilde, sc.r)
                or sector_check(t, delta - eps, sc.p, sc.q, sc.eps_tilde, sc.r)):
            raise SectorError(f"t={t} lies outside both lateral sectors around {delta:.6g}")
        nums, closed, plus, minus = [], [], [], []
        diag = {"quadrature_error": 0.0, "evaluations": 0, "truncation_radius": 0.0,
                "series_terms": [], "tail_bound": 0.0, "methods": []}
        for d in sc.data:
            nj = jump_numeric(d, z, t, delta, eps, sc.p, sc.q, sc.quadrature, sc.prefer_heat,
                              sc.eps_tilde, sc.r)
            cj = closed_form_jump(d, z, t, sc.p, sc.q, sc.quadrature, sc.series_tol,
                                  sc.prefer_heat)
            nums.append(nj.value)
            plus.append(nj.plus.value)
            minus.append(nj.minus.value)
            closed.append(cj.value)
            diag["quadrature_error"] += nj.error_estimate + cj.error_estimate
            diag["evaluations"] += nj.plus.evaluations + nj.minus.evaluations + cj.evaluations
            diag["truncation_radius"] = max(diag["truncation_radius"],
                                            nj.plus.truncation_radius_used,
                                            nj.minus.truncation_radius_used)
            diag["series_terms"].append(cj.truncation_terms)
            diag["tail_bound"] += cj.tail_bound
            diag["methods"].append(cj.method)
        row.numeric_jump = _csum(nums)
        row.closed_jump = _csum(closed)
        row.u_plus = _csum(plus)
        row.u_minus = _csum(minus)
        row.abs_err = abs(row.numeric_jump - row.closed_jump)
        # a vanishing closed form has no relative scale; report the absolute error
        row.rel_err = (row.abs_err / abs(row.closed_jump) if row.closed_jump != 0
                       else row.abs_err)
        row.diagnostics = diag
        if row.closed_jump == 0:
            row.passed = abs(row.numeric_jump) <= ZERO_JUMP_ABS_TOL
        else:
            row.passed = row.rel_err <= sc.tolerance
        ref = EXPECTED_TAGS.get(sc.expected) if sc.expected else None
        if sc.expected == "zero":
            row.reference = 0j
            row.reference_rel_err = abs(row.closed_jump)
            row.passed = row.passed and abs(row.closed_jump) == 0
        elif ref is not None:
            row.reference = ref(sc, t, z)
            row.reference_rel_err = abs(row.closed_jump - row.reference) / max(abs(row.reference),
                                                                               REL_FLOOR)
            row.passed = row.passed and row.reference_rel_err <= sc.tolerance
    except HeatStokesError as exc:
        row.error = f"{type(exc).__name__}: {exc}"
        row.passed = False
    return row


def _map_ordered(fn, items: Sequence, threads: int) -> list:
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def run_validation(sc: Scenario, threads: int = 1) -> ValidationReport:
    """Compare the numeric lateral difference with the closed-form jump for every ``t``."""
    rows = _map_ordered(lambda t: evaluate_row(sc, t), list(sc.t_values), threads)
    return ValidationReport(sc.name, sc.tolerance, rows)


def sweep(sc: Scenario, axis: str | None = None, grid: Sequence[float] | None = None,
          threads: int = 1) -> list[ReportRow]:
    """Evaluate rows along one axis.

    ``t-modulus`` keeps ``arg t`` of the first scenario time, ``z-real`` keeps
    ``Im z`` and the first time, ``eps_dir`` keeps the first time and ``z``.
    """
    axis = axis or sc.sweep_axis
    if axis not in SWEEP_AXES:
        raise ValidationError(f"sweep axis must be one of {SWEEP_AXES}, got {axis!r}")
    grid = list(sc.sweep_grid if grid is None else grid)
    t0 = sc.t_values[0]
    phase = cmath.exp(1j * cmath.phase(t0))

    def one(g: float) -> ReportRow:
        if axis == "t-modulus":
            return evaluate_row(sc, g * phase)
        if axis == "z-real":
            return evaluate_row(sc, t0, complex(g, sc.z.imag))
        return evaluate_row(sc, t0, eps_dir=g)

    return _map_ordered(one, grid, threads)


def sweep_csv(axis_values: Sequence[float], rows: Sequence[ReportRow]) -> str:
    """CSV table with the fixed header; failed rows carry ``nan`` entries."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    nan = float("nan")
    for g, row in zip(axis_values, rows):
        num = row.numeric_jump if row.numeric_jump is not None else complex(nan, nan)
        clo = row.closed_jump if row.closed_jump is not None else complex(nan, nan)
        rel = row.rel_err if row.rel_err is not None else nan
        w.writerow([repr(float(g)), repr(num.real), repr(num.imag), repr(clo.real),
                    repr(clo.imag), repr(float(rel))])
    return buf.getvalue()


def report_json(reports: Sequence[ValidationReport]) -> str:
    """Deterministic JSON text of one or more reports."""
    body = {"reports": [r.to_json() for r in reports],
            "pass": all(r.passed for r in reports)}
    return json.dumps(body, indent=2, sort_keys=True, allow_nan=True) + "\n"


def lateral_rows(sc: Scenario, theta: float | None = None, threads: int = 1) -> list[dict]:
    """Lateral sums in direction ``theta`` (default: ``delta + eps_dir``) for every ``t``."""
    th = sc.stokes_direction() + sc.eps_dir if theta is None else float(theta)

    def one(t: complex) -> dict:
        out = {"t": _cjson(t), "theta": th}
        try:
            vals, err, ev = [], 0.0, 0
            for d in sc.data:
                req = LateralSumRequest(d, th, t, sc.z, sc.p, sc.q, sc.quadrature, sc.eps_tilde,
                                        sc.r)
                res = lateral_sum(req, sc.prefer_heat)
                vals.append(res.value)
                err += res.error_estimate
                ev += res.evaluations
            out.update(value=_cjson(_csum(vals)), error_estimate=err, evaluations=ev,
                       error=None)
        except HeatStokesError as exc:
            out.update(value=None, error_estimate=None, evaluations=None,
                       error=f"{type(exc).__name__}: {exc}")
        return out

    return _map_ordered(one, list(sc.t_values), threads)


def jump_rows(sc: Scenario, threads: int = 1) -> list[dict]:
    """Closed-form jumps for every ``t``."""

    def one(t: complex) -> dict:
        out = {"t": _cjson(t), "delta": sc.stokes_direction()}
        try:
            vals, terms, tail, methods = [], [], 0.0, []
            for d in sc.data:
                cj = closed_form_jump(d, sc.z, t, sc.p, sc.q, sc.quadrature, sc.series_tol,
                                      sc.prefer_heat)
                vals.append(cj.value)
                terms.append(cj.truncation_terms)
                tail += cj.tail_bound
                methods.append(cj.method)
            out.update(value=_cjson(_csum(vals)), truncation_terms=terms, tail_bound=tail,
                       methods=methods, error=None)
        except HeatStokesError as exc:
            out.update(value=None, truncation_terms=None, tail_bound=None, methods=None,
                       error=f"{type(exc).__name__}: {exc}")
        return out

    return _map_ordered(one, list(sc.t_values), threads)
