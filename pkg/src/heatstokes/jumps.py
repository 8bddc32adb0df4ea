"""Closed-form Stokes jumps and their numeric counterpart.

The jump across a Stokes line is the pairing of the datum's singular part
(a hyperfunction supported on the singular ray) with the summation kernel.
Poles and convergent Laurent tails give finite combinations of derivatives of
the kernel at the singular point; branch points give integrals of the
monodromy density along the cut.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .data import (CauchyDatum, LaurentTail, Polynomial, VariationDensity, VariationTerm,
                   variation)
from .errors import NoConvergenceError, SectorError, UnsupportedError
from .kernels import EcalleDecayModel, EcalleKernelSpec, make_kernel, unwrap_near
from .lateral import LateralSumRequest, lateral_sum, sector_check
from .quadrature import (DecayBound, QuadratureResult, QuadratureSettings, Ray, RayDirection,
                         angle_of, integrate_ray, integrate_two_sided)


@dataclass(frozen=True)
class DeltaSeries:
    """``sum_k c_k delta^(k)`` centred at ``center``; ``delta^(k)[K] = (-1)^k K^(k)(center)``.

    For a Laurent tail ``sum a_n/(z + s - z0)^n`` the coefficients are
    ``c_{n-1} = -2 pi i a_n (-1)^(n-1)/(n-1)!``.
    """

    center: complex
    coefficients: tuple = ()
    generator: Callable[[int], complex] | None = None
    bound: tuple | None = None

    def coefficient(self, k: int) -> complex:
        if k < len(self.coefficients):
            return self.coefficients[k]
        if self.generator is None:
            return 0j
        return self.generator(k)

    @property
    def is_finite(self) -> bool:
        return self.generator is None


@dataclass(frozen=True)
class VariationIntegral:
    density: VariationDensity

    @property
    def start(self) -> complex:
        return self.density.start

    @property
    def direction(self) -> RayDirection:
        return self.density.direction


@dataclass(frozen=True)
class ZeroRepresentation:
    """Singular part of entire data."""


JumpRepresentation = Union[DeltaSeries, VariationIntegral, ZeroRepresentation]


@dataclass(frozen=True)
class JumpResult:
    value: complex
    truncation_terms: int
    tail_bound: float
    method: str
    error_estimate: float = 0.0
    evaluations: int = 0

    def __post_init__(self) -> None:
        if not self.tail_bound >= 0:
            raise ValueError("tail_bound must be non-negative")


def _delta_coefficient(a_n: complex, n: int) -> complex:
    return -2j * math.pi * a_n * (-1) ** (n - 1) / math.factorial(n - 1)


def jump_representation(datum: CauchyDatum, z: complex) -> JumpRepresentation:
    """Singular part of ``phi(z + s)`` as a delta series, a variation integral, or zero."""
    z = complex(z)
    if isinstance(datum, Polynomial):
        return ZeroRepresentation()
    if isinstance(datum, LaurentTail):
        center = datum.z0 - z
        if datum.is_finite:
            coeffs = tuple(_delta_coefficient(complex(a), n)
                           for n, a in enumerate(datum.coefficients, start=1))
            return DeltaSeries(center, coeffs, None, datum.coefficient_bound())

        def gen(k: int, _d=datum) -> complex:
            n = k + 1
            a = _d.coefficient(n)
            return -2j * math.pi * a * (-1) ** k * math.exp(-math.lgamma(n))

        prefix = tuple(gen(k) for k in range(8))
        return DeltaSeries(center, prefix, gen, datum.coefficient_bound())
    if getattr(datum, "multivalued", False):
        return VariationIntegral(variation(datum, z))
    raise UnsupportedError(f"no jump representation for {type(datum).__name__}")


def jump_kernel(t: complex, center: complex, p: int = 1, q: int = 2, prefer_heat: bool = True,
                spec: EcalleKernelSpec | None = None,
                decay_model: EcalleDecayModel | None = None):
    """Summation kernel with ``t^(p/q)`` chosen so ``arg T`` is nearest the singular ray.

    The determination of ``arg t`` closest to ``q arg(center)/p`` is the one the
    lateral sums use when the Stokes line through ``center`` is crossed.
    """
    ref = q * cmath.phase(complex(center)) / p
    arg_t = unwrap_near(cmath.phase(complex(t)), ref)
    return make_kernel(t, p, q, arg_t, prefer_heat, spec, decay_model)


def fit_derivative_bound(kernel, center: complex, n_fit: int = 12) -> tuple[float, float]:
    """``(A, B)`` with ``|K^(j)(center)| <= A B^j (j!)^(1/2)`` on the first ``n_fit`` derivatives."""
    js, ys = [], []
    for j in range(n_fit):
        d = abs(complex(kernel.derivative(j, center)))
        if d > 0 and math.isfinite(d):
            js.append(j)
            ys.append(math.log(d) - 0.5 * math.lgamma(j + 1.0))
    if len(js) < 2:
        return (math.exp(ys[0]) if ys else 0.0), 1.0
    x = np.array(js, dtype=float)
    y = np.array(ys)
    slope, intercept = np.polyfit(x, y, 1)
    shift = float(np.max(y - (intercept + slope * x)))
    return math.exp(intercept + shift), math.exp(slope)


def delta_tail_bound(M: float, rho: float, A: float, B: float, n_done: int) -> float:
    """Bound on ``sum_{j >= n_done} |c_j K^(j)|``.

    Uses ``|a_n| <= M rho^n`` and ``|K^(j)| <= A B^j (j!)^(1/2)``, so the terms are
    dominated by ``2 pi M rho^(j+1) A B^j / (j!)^(1/2)`` whose ratio decreases;
    ``inf`` until that ratio drops below one.
    """
    ratio = rho * B / math.sqrt(n_done + 1.0)
    if ratio >= 1.0:
        return math.inf
    log_next = (math.log(2.0 * math.pi * max(M, 1e-300) * max(A, 1e-300))
                + (n_done + 1) * math.log(rho) + n_done * math.log(B)
                - 0.5 * math.lgamma(n_done + 1.0))
    return math.exp(log_next) / (1.0 - ratio)


def pair_delta_series(rep: DeltaSeries, kernel, series_tol: float = 1e-12,
                      max_terms: int = 400, min_terms: int = 8) -> JumpResult:
    """Distributional pairing ``sum_k c_k (-1)^k K^(k)(center)`` with a certified tail."""
    center = rep.center
    terms = []
    if rep.is_finite:
        for k, c in enumerate(rep.coefficients):
            if c != 0:
                terms.append(c * (-1) ** k * complex(kernel.derivative(k, center)))
        val = complex(math.fsum(x.real for x in terms), math.fsum(x.imag for x in terms))
        return JumpResult(val, len(rep.coefficients), 0.0, "theorem1")
    A, B = fit_derivative_bound(kernel, center)
    M, rho = rep.bound
    for k in range(max_terms):
        c = rep.coefficient(k)
        terms.append(c * (-1) ** k * complex(kernel.derivative(k, center)))
        n_done = k + 1
        if n_done < min_terms:
            continue
        tail = delta_tail_bound(M, rho, A, B, n_done)
        partial = abs(sum(terms))
        if tail <= series_tol * max(partial, 1e-300):
            val = complex(math.fsum(x.real for x in terms), math.fsum(x.imag for x in terms))
            return JumpResult(val, n_done, tail, "theorem1")
    raise NoConvergenceError(f"delta series tail bound not reached within {max_terms} terms")


def jump_theorem1(rep: DeltaSeries, t: complex, z: complex = 0j, series_tol: float = 1e-12,
                  p: int = 1, q: int = 2, prefer_heat: bool = True, max_terms: int = 400,
                  spec: EcalleKernelSpec | None = None) -> JumpResult:
    """Jump of a pole or convergent Laurent tail: the delta series paired with the kernel."""
    kernel = jump_kernel(t, rep.center, p, q, prefer_heat, spec)
    return pair_delta_series(rep, kernel, series_tol, max_terms)


def _term_integral(term: VariationTerm, density: VariationDensity, kernel,
                   settings: QuadratureSettings) -> QuadratureResult:
    a = density.start
    u = density.direction.unit
    k = term.order

    def f(s, x):
        return term.value(x) * kernel.derivative(k, s)

    nu = term.exponent
    mu = nu if nu < 0 else 0.0
    scale = abs(term.coefficient) * max(abs(complex(kernel.derivative(k, a + u))), 1e-300)
    kd = kernel.decay(a, density.direction.angle, max(nu, 0.0) + k)
    decay = DecayBound(kd.amplitude * max(scale, abs(term.coefficient)) * 4.0 ** k, kd.rate,
                       kd.power, kd.degree)
    mult = getattr(kernel, "radius_multiplier", 1.0)
    return integrate_ray(f, Ray(a, density.direction), settings, decay, mu, mult, with_radius=True)


def _pair_variation(rep: VariationIntegral, kernel, settings: QuadratureSettings,
                    series_tol: float, max_terms: int = 80) -> JumpResult:
    dens = rep.density
    if dens.case_class in (1, 2):
        term = dens.terms[0]
        res = _term_integral(term, dens, kernel, settings)
        value = -((-1) ** term.order) * res.value
        return JumpResult(value, 1, 0.0, f"theorem2_case{dens.case_class}",
                          res.error_estimate, res.evaluations)

    # case 3: increasing n, inner tolerance series_tol / 2^(n+2)
    vals, err, evals = [], 0.0, 0
    n = 0
    while True:
        n += 1
        term = dens.term(n)
        inner = settings.replace(abs_tol=min(settings.abs_tol, series_tol / 2.0 ** (n + 2)))
        res = _term_integral(term, dens, kernel, inner)
        vals.append(-((-1) ** term.order) * res.value)
        err += res.error_estimate
        evals += res.evaluations
        if n < dens.term_count:
            continue
        tail = _case3_tail(vals, dens)
        total = complex(math.fsum(v.real for v in vals), math.fsum(v.imag for v in vals))
        if tail <= series_tol * max(abs(total), 1e-300):
            return JumpResult(total, n, tail, "theorem2_case3", err, evals)
        if n >= max_terms:
            raise NoConvergenceError(f"essential-power series tail {tail:.3e} after {n} terms")


def _case3_tail(vals: list, dens: VariationDensity) -> float:
    """Tail bound ``sum_{j>N} A B^j / (j!)^(lam/2 + 1)`` with ``A, B`` fitted to the computed terms."""
    lam = -dens.terms[0].exponent + dens.terms[0].order
    power = lam / 2.0 + 1.0
    js, ys = [], []
    for j, v in enumerate(vals, start=1):
        if abs(v) > 0:
            js.append(j)
            ys.append(math.log(abs(v)) + power * math.lgamma(j + 1.0))
    if len(js) < 3:
        return math.inf
    x = np.array(js, dtype=float)
    y = np.array(ys)
    slope, intercept = np.polyfit(x, y, 1)
    intercept += float(np.max(y - (intercept + slope * x)))
    N = len(vals)
    tail = 0.0
    for j in range(N + 1, N + 200):
        term = math.exp(intercept + slope * j - power * math.lgamma(j + 1.0))
        tail += term
        if term < 1e-30 * max(tail, 1e-300):
            break
    return tail


def jump_theorem2(rep: VariationIntegral, t: complex, z: complex = 0j, p: int = 1, q: int = 2,
                  settings: QuadratureSettings | None = None, series_tol: float = 1e-12,
                  prefer_heat: bool = True, spec: EcalleKernelSpec | None = None,
                  decay_model: EcalleDecayModel | None = None) -> JumpResult:
    """Jump of a branch point: the monodromy density integrated against the kernel.

    Case 1 integrates the density itself; case 2 integrates an antiderivative of
    order ``m`` against ``(-1)^m`` times the ``m``-th kernel derivative; case 3
    sums such terms.
    """
    settings = settings or QuadratureSettings()
    kernel = jump_kernel(t, rep.start, p, q, prefer_heat, spec, decay_model)
    return _pair_variation(rep, kernel, settings, series_tol)


def closed_form_jump(datum: CauchyDatum, z: complex, t: complex, p: int = 1, q: int = 2,
                     settings: QuadratureSettings | None = None, series_tol: float = 1e-12,
                     prefer_heat: bool = True) -> JumpResult:
    """Closed-form jump for any catalogue datum."""
    rep = jump_representation(datum, z)
    if isinstance(rep, ZeroRepresentation):
        return JumpResult(0j, 0, 0.0, "zero")
    if isinstance(rep, DeltaSeries):
        return jump_theorem1(rep, t, z, series_tol, p, q, prefer_heat)
    return jump_theorem2(rep, t, z, p, q, settings, series_tol, prefer_heat)


@dataclass(frozen=True)
class NumericJump:
    value: complex
    error_estimate: float
    plus: QuadratureResult
    minus: QuadratureResult


def jump_numeric(datum: CauchyDatum, z: complex, t: complex, delta, eps_dir: float = 0.3,
                 p: int = 1, q: int = 2, settings: QuadratureSettings | None = None,
                 prefer_heat: bool = True, eps_tilde: float = 0.05, r: float = 1.0,
                 clearance: float = 1e-6) -> NumericJump:
    """Difference of the lateral sums in directions ``delta + eps_dir`` and ``delta - eps_dir``."""
    settings = settings or QuadratureSettings()
    d = angle_of(delta)
    out = []
    for th in (d + eps_dir, d - eps_dir):
        if not sector_check(t, th, p, q, eps_tilde, r):
            raise SectorError(f"t={complex(t)} outside the lateral sector at direction {th:.6g}")
        req = LateralSumRequest(datum, th, complex(t), complex(z), p, q, settings, eps_tilde, r,
                                clearance)
        out.append(lateral_sum(req, prefer_heat))
    plus, minus = out
    return NumericJump(plus.value - minus.value, plus.error_estimate + minus.error_estimate,
                       plus, minus)


def pair_hyperfunction(rep: JumpRepresentation, kernel, contour: tuple | None = None,
                       settings: QuadratureSettings | None = None,
                       defining_function: Callable | None = None,
                       series_tol: float = 1e-12) -> complex:
    """Pair a jump representation with a test kernel.

    Parameters
    ----------
    rep : JumpRepresentation
    kernel :
        Object with ``__call__``, ``derivative(m, s)`` and ``decay(origin, angle, degree)``.
    contour : (vertex, theta_minus, theta_plus), optional
        Path entering along ``theta_minus`` and leaving along ``theta_plus``,
        used with ``defining_function``.
    defining_function : callable, optional
        Analytic function whose boundary values define the hyperfunction; when
        given the pairing is the contour integral of ``g * K``.
    """
    settings = settings or QuadratureSettings()
    if defining_function is not None:
        if contour is None:
            raise ValueError("a defining function needs a contour")
        vertex, th_m, th_p = contour
        dm = kernel.decay(complex(vertex), angle_of(th_m), 0.0)
        dp = kernel.decay(complex(vertex), angle_of(th_p), 0.0)
        scale = 1.0 / max(1e-3, min(Ray(vertex, RayDirection(angle_of(th_m))).distance_to(rep.center)
                                    if isinstance(rep, DeltaSeries) else 1.0, 1.0))
        dm = DecayBound(dm.amplitude * scale, dm.rate, dm.power, dm.degree)
        dp = DecayBound(dp.amplitude * scale, dp.rate, dp.power, dp.degree)
        res = integrate_two_sided(lambda s: defining_function(s) * kernel(s), vertex, th_m, th_p,
                                  settings, dm, dp, getattr(kernel, "radius_multiplier", 1.0))
        return res.value
    if isinstance(rep, ZeroRepresentation):
        return 0j
    if isinstance(rep, DeltaSeries):
        return pair_delta_series(rep, kernel, series_tol).value
    return _pair_variation(rep, kernel, settings, series_tol).value
