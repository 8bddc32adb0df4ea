"""Formal power series: formal solutions, Gevrey classification, deceleration, acceleration."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .data import CauchyDatum
from .errors import (AtSingularityError, GrowthViolationError, OutsideDiskError)
from .kernels import EcalleDecayModel, EcalleKernelSpec, ecalle_kernel, unwrap_near
from .quadrature import (DecayBound, QuadratureResult, QuadratureSettings, Ray, RayDirection,
                         angle_of, integrate_ray)


@dataclass(frozen=True)
class FormalSeries:
    """Coefficients ``c_0, c_1, ...`` of a formal power series in ``t``.

    Parameters
    ----------
    coefficients : tuple
        Stored prefix; entries may be ``Fraction`` for exact work.
    gevrey_order : float, optional
        Claimed Gevrey order, if known.
    generator : callable, optional
        ``n -> c_n`` for indices beyond the prefix.
    """

    coefficients: tuple
    gevrey_order: float | None = None
    generator: Callable[[int], complex] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "coefficients", tuple(self.coefficients))
        if len(self.coefficients) < 1:
            raise ValueError("a formal series needs at least one stored coefficient")

    def __len__(self) -> int:
        return len(self.coefficients)

    def coefficient(self, n: int):
        if n < len(self.coefficients):
            return self.coefficients[n]
        if self.generator is None:
            raise IndexError(f"coefficient {n} beyond the stored prefix")
        return self.generator(n)

    @property
    def is_exact(self) -> bool:
        return all(isinstance(c, (Fraction, int)) for c in self.coefficients)


@dataclass(frozen=True)
class SumParameters:
    k: float
    direction: RayDirection
    eps_dir: float = 0.3

    def __post_init__(self) -> None:
        if not self.k > 0:
            raise ValueError("k must be positive")
        if not self.eps_dir > 0:
            raise ValueError("eps_dir must be positive")


def formal_solution(datum: CauchyDatum, z, N: int, p: int = 1, q: int = 2,
                    exact: bool = True) -> FormalSeries:
    """Formal solution of ``d_t^p u = d_z^q u`` with ``u(0, .) = phi`` and vanishing lower time derivatives.

    The coefficient of ``t^(p j)`` is ``phi^(q j)(z) / (p j)!``; all others vanish.
    With ``exact=True`` rational data yield ``Fraction`` coefficients.

    Parameters
    ----------
    datum : CauchyDatum
    z : complex
        Point of analyticity.
    N : int
        Highest power of ``t`` kept.
    p, q : int
        ``1 <= p < q``.
    exact : bool
    """
    if not 1 <= p < q:
        raise ValueError("need 1 <= p < q")
    if datum.z0 is not None and complex(z) == datum.z0:
        raise AtSingularityError("z coincides with the singular point")
    coeffs: list = []
    use_exact = exact
    for n in range(N + 1):
        if n % p:
            coeffs.append(Fraction(0) if use_exact else 0j)
            continue
        j = n // p
        if use_exact:
            d = datum.exact_derivative(q * j, z)
            if d is None:
                use_exact = False
                coeffs = [complex(c) for c in coeffs]
            else:
                coeffs.append(d / math.factorial(n))
                continue
        val = datum.derivative(q * j, z)
        coeffs.append(val / math.factorial(n) if n < 171
                      else val * math.exp(-math.lgamma(n + 1.0)))
    return FormalSeries(tuple(coeffs), gevrey_order=float(q - p) / p if datum.z0 is not None else None)


def classify_gevrey(series: FormalSeries, s: float, slack: float = 2.0,
                    prefix: int = 32) -> tuple[bool, float, float]:
    """Least-squares Gevrey diagnostic.

    Fits ``log|c_n| - s log n! ~ log A + n log B`` over the nonzero coefficients of
    the prefix and accepts when every residual stays within ``slack``.

    Returns
    -------
    (holds, A, B)
    """
    n_avail = min(prefix, len(series))
    if n_avail < 8:
        raise ValueError("Gevrey classification needs a prefix of at least 8 terms")
    ns, ys = [], []
    for n in range(n_avail):
        c = series.coefficient(n)
        mag = abs(complex(c)) if not isinstance(c, Fraction) else abs(float(c))
        if mag == 0.0:
            continue
        ns.append(n)
        ys.append(math.log(mag) - s * math.lgamma(n + 1.0))
    if len(ns) < 2:
        return True, 0.0, 0.0
    x = np.array(ns, dtype=float)
    y = np.array(ys)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (intercept + slope * x)
    holds = bool(np.max(np.abs(resid)) <= slack)
    return holds, float(math.exp(intercept)), float(math.exp(slope))


def deceleration_factor(n: int, k: float) -> float:
    """``Gamma(1 + n) / Gamma(1 + n (k+1)/k)`` in log-Gamma arithmetic."""
    return math.exp(math.lgamma(1.0 + n) - math.lgamma(1.0 + n * (k + 1.0) / k))


def _exact_deceleration_factor(n: int, k) -> Fraction | None:
    kf = Fraction(k).limit_denominator(10 ** 6) if not isinstance(k, Fraction) else k
    if abs(float(kf) - float(k)) > 1e-15:
        return None
    ratio = (kf + 1) / kf
    top = n * ratio
    if top.denominator != 1:
        return None
    return Fraction(math.factorial(n), math.factorial(int(top)))


def decelerate(series: FormalSeries, k: float) -> FormalSeries:
    """Rescale ``c_n -> c_n Gamma(1+n)/Gamma(1+n(k+1)/k)``.

    Exact ``Fraction`` coefficients stay exact whenever every factor is rational
    (``(k+1)/k`` an integer); otherwise log-Gamma arithmetic is used.
    """
    if not k > 0:
        raise ValueError("k must be positive")
    out = []
    for n, c in enumerate(series.coefficients):
        if isinstance(c, (Fraction, int)):
            f = _exact_deceleration_factor(n, k)
            if f is not None:
                out.append(Fraction(c) * f)
                continue
        out.append(complex(c) * deceleration_factor(n, k))
    gen = None
    if series.generator is not None:
        base = series.generator
        gen = lambda n: complex(base(n)) * deceleration_factor(n, k)  # noqa: E731
    order = None if series.gevrey_order is None else series.gevrey_order - 1.0 / k
    return FormalSeries(tuple(out), gevrey_order=order, generator=gen)


def estimate_radius(series: FormalSeries, tail: int = 8) -> float:
    """Ratio-test estimate of the radius of convergence from the last stored coefficients."""
    mags = [abs(complex(c)) for c in series.coefficients]
    pairs = [(mags[n], mags[n + 1]) for n in range(len(mags) - 1) if mags[n] > 0 and mags[n + 1] > 0]
    if not pairs:
        return math.inf
    pairs = pairs[-tail:]
    ratios = [a / b for a, b in pairs]
    return float(min(ratios))


def sum_series_disk(series: FormalSeries, t: complex, tol: float = 1e-15,
                    max_terms: int = 100000, margin: float = 0.9) -> complex:
    """Sum a convergent series inside ``margin`` times its estimated radius.

    Raises
    ------
    OutsideDiskError
        When ``|t|`` is not strictly below the safe radius.
    """
    t = complex(t)
    radius = estimate_radius(series)
    if not abs(t) < margin * radius:
        raise OutsideDiskError(f"|t|={abs(t):.4g} not below {margin} x radius {radius:.4g}")
    ratio = abs(t) / radius if math.isfinite(radius) else 0.0
    acc = 0j
    terms = []
    n = 0
    while True:
        try:
            c = complex(series.coefficient(n))
        except IndexError:
            break
        term = c * t ** n
        terms.append(term)
        n += 1
        if n >= len(series):
            bound = abs(term) * ratio / (1.0 - ratio)
            if bound <= tol * max(abs(sum(terms)), 1e-300) or n >= max_terms:
                break
    acc = complex(math.fsum(x.real for x in terms), math.fsum(x.imag for x in terms))
    return acc


@dataclass(frozen=True)
class GrowthCertificate:
    """``|g(s)| <= amplitude * exp(rate |s|^order)`` along the acceleration ray."""

    order: float
    amplitude: float = 1.0
    rate: float = 0.0


def accelerate(g: Callable, k: float, theta, t: complex,
               settings: QuadratureSettings | None = None,
               certificate: GrowthCertificate | None = None,
               spec: EcalleKernelSpec | None = None,
               decay_model: EcalleDecayModel | None = None) -> QuadratureResult:
    """Acceleration of ``g`` from the Borel-type plane back to ``t``.

    Computes ``t^(-kb) int_0^{inf e^{i theta kb}} g(sigma^alpha) C_alpha(sigma/t^kb) d sigma``
    with ``kb = k/(k+1)`` and ``alpha = (k+1)/k``; the substitution
    ``sigma = s^kb`` turns the integral in ``s`` along direction ``theta`` into
    this ray integral. ``t^kb`` uses the determination of ``arg t`` nearest
    ``theta``.

    Parameters
    ----------
    g : callable
        Vectorised analytic continuation of the decelerated series along the ray.
    k : float
    theta : RayDirection or float
    t : complex
    settings : QuadratureSettings
    certificate : GrowthCertificate
        Required; its order must not exceed ``k``.
    """
    if certificate is None:
        raise GrowthViolationError("acceleration requires a growth certificate for g")
    if certificate.order > k:
        raise GrowthViolationError(
            f"growth order {certificate.order} exceeds the acceleration order {k}")
    settings = settings or QuadratureSettings()
    decay_model = decay_model or EcalleDecayModel()
    kb = k / (k + 1.0)
    alpha = (k + 1.0) / k
    spec = spec or EcalleKernelSpec(alpha)
    th = angle_of(theta)
    t = complex(t)
    arg_t = unwrap_near(cmath.phase(t), th)
    T = abs(t) ** kb * cmath.exp(1j * kb * arg_t)
    ray_angle = th * kb

    def f(sig):
        r = np.abs(sig)
        s = r ** alpha * cmath.exp(1j * th)
        return np.asarray(g(s), dtype=complex) * ecalle_kernel(spec, sig / T)

    beta = alpha / (alpha - 1.0)
    c = (alpha - 1.0) / alpha ** beta
    rel = ray_angle - kb * arg_t
    rate = decay_model.rate_fraction * c * math.cos(beta * rel) / abs(T) ** beta
    if certificate.order == k and certificate.rate > 0:
        # g(sigma^alpha) grows like exp(rate |sigma|^(k+1)) = exp(rate |sigma|^beta)
        rate -= certificate.rate
    if rate <= 0:
        raise GrowthViolationError("growth of g is not dominated by the kernel decay")
    decay = DecayBound(certificate.amplitude * decay_model.amplitude, rate, beta, 0.0)
    res = integrate_ray(f, Ray(0.0, RayDirection(ray_angle)), settings, decay,
                        radius_multiplier=decay_model.radius_multiplier)
    scale = 1.0 / T
    return QuadratureResult(res.value * scale, res.error_estimate * abs(scale),
                            res.evaluations, res.truncation_radius_used)
