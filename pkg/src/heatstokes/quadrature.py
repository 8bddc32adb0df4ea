"""Adaptive Gauss-Kronrod quadrature along complex rays.

Integrals of the form ``int_0^inf f(origin + r e^{i angle}) e^{i angle} dr`` are
truncated at a radius derived from a caller-supplied decay envelope and then
integrated on ``[0, R]`` with a vectorised adaptive G7/K15 rule.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import optimize, special

from .errors import HeatStokesError, NoConvergenceError, NonFiniteError, TruncationError

TWO_PI = 2.0 * math.pi

Integrand = Callable[[np.ndarray], np.ndarray]


def normalize_angle(angle: float) -> float:
    """Reduce an angle to ``(-pi, pi]``; a tie at ``-pi`` maps to ``+pi``."""
    a = math.remainder(float(angle), TWO_PI)
    if a <= -math.pi:
        a += TWO_PI
    return a


def angle_of(direction: "RayDirection | float") -> float:
    return direction.angle if isinstance(direction, RayDirection) else float(direction)


@dataclass(frozen=True)
class RayDirection:
    """Direction of a ray, stored normalised to ``(-pi, pi]``."""

    angle: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "angle", normalize_angle(self.angle))

    @property
    def unit(self) -> complex:
        return cmath.exp(1j * self.angle)


@dataclass(frozen=True)
class Ray:
    """The half line ``origin + r e^{i angle}``, ``r >= 0``."""

    origin: complex
    direction: RayDirection

    def __post_init__(self) -> None:
        object.__setattr__(self, "origin", complex(self.origin))
        if not isinstance(self.direction, RayDirection):
            object.__setattr__(self, "direction", RayDirection(float(self.direction)))

    def point(self, r):
        return self.origin + np.asarray(r) * self.direction.unit

    def distance_to(self, w: complex) -> float:
        """Euclidean distance from ``w`` to the ray."""
        d = (complex(w) - self.origin) * cmath.exp(-1j * self.direction.angle)
        if d.real <= 0.0:
            return abs(d)
        return abs(d.imag)


@dataclass(frozen=True)
class QuadratureSettings:
    """Tolerances and budgets for :func:`integrate_ray`.

    Parameters
    ----------
    rel_tol, abs_tol : float
        Target accuracy; the adaptive loop stops once the summed error estimate
        is below ``max(abs_tol, rel_tol * |value|)`` or below the round-off
        floor ``100 eps int |f|``, whichever is largest.
    max_radius : float
        Largest admissible truncation radius of the semi-infinite ray.
    max_refinements : int
        Number of bisection passes allowed.
    """

    rel_tol: float = 1e-11
    abs_tol: float = 1e-14
    max_radius: float = 400.0
    max_refinements: int = 40

    def __post_init__(self) -> None:
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("rel_tol and abs_tol must be positive")
        if not self.max_radius > 0:
            raise ValueError("max_radius must be positive")
        if int(self.max_refinements) < 1:
            raise ValueError("max_refinements must be at least 1")

    def replace(self, **kw) -> "QuadratureSettings":
        data = dict(rel_tol=self.rel_tol, abs_tol=self.abs_tol,
                    max_radius=self.max_radius, max_refinements=self.max_refinements)
        data.update(kw)
        return QuadratureSettings(**data)


@dataclass(frozen=True)
class QuadratureResult:
    value: complex
    error_estimate: float
    evaluations: int
    truncation_radius_used: float

    def __post_init__(self) -> None:
        if not self.error_estimate >= 0:
            raise ValueError("error_estimate must be non-negative")


@dataclass(frozen=True)
class DecayBound:
    """Envelope ``|f(r)| <= amplitude * (1 + r)**degree * exp(-rate * r**power)``.

    Only the part of the ray beyond ``r = 1`` is used for the tail estimate.
    """

    amplitude: float
    rate: float
    power: float = 2.0
    degree: float = 0.0

    def envelope(self, r: float) -> float:
        return self.amplitude * (1.0 + r) ** self.degree * math.exp(-self.rate * r ** self.power)

    def tail(self, radius: float) -> float:
        """Upper bound of ``int_R^inf envelope(r) dr`` for ``R >= 1``."""
        R = max(float(radius), 1.0)
        d = max(self.degree, 0.0)
        a = (d + 1.0) / self.power
        x = self.rate * R ** self.power
        log_pref = (math.log(max(self.amplitude, 1e-300)) + d * math.log(2.0)
                    - math.log(self.power) - a * math.log(self.rate) + special.gammaln(a))
        q = special.gammaincc(a, x)
        if q <= 0.0:
            return 0.0
        return math.exp(log_pref + math.log(q))

    def radius(self, target: float) -> float:
        """Smallest ``R >= 1`` (up to root-finding accuracy) with ``tail(R) <= target``."""
        if self.rate <= 0:
            return math.inf
        if self.tail(1.0) <= target:
            return 1.0
        hi = 2.0
        while self.tail(hi) > target:
            hi *= 2.0
            if hi > 1e8:
                return math.inf

        def h(R: float) -> float:
            return math.log(self.tail(R) + 1e-320) - math.log(target)

        return optimize.brentq(h, hi / 2.0, hi, xtol=1e-10, rtol=1e-12)

    def shifted(self, amplitude_factor: float = 1.0, rate_factor: float = 1.0,
                degree: float | None = None) -> "DecayBound":
        return DecayBound(self.amplitude * amplitude_factor, self.rate * rate_factor,
                          self.power, self.degree if degree is None else degree)


# Gauss-Kronrod 7/15 abscissae and weights on [-1, 1].
_XGK = np.array([0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                 0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                 0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                 0.207784955007898467600689403773245, 0.0])
_WGK = np.array([0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                 0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                 0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                 0.204432940075298892414161999234649, 0.209482141084727828012999174891714])
_WG = np.array([0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                0.381830050505118944950369775488975, 0.417959183673469387755102040816327])

NODES = np.concatenate([-_XGK[:7], [0.0], _XGK[6::-1]])
KRONROD = np.concatenate([_WGK[:7], [_WGK[7]], _WGK[6::-1]])
GAUSS = np.zeros(15)
GAUSS[[1, 3, 5]] = _WG[:3]
GAUSS[7] = _WG[3]
GAUSS[[13, 11, 9]] = _WG[:3]
_EPS = np.finfo(float).eps


def _gk15(g: Integrand, a: np.ndarray, b: np.ndarray):
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    x = mid[:, None] + half[:, None] * NODES[None, :]
    fx = np.asarray(g(x), dtype=complex).reshape(x.shape)
    if not np.all(np.isfinite(fx)):
        bad = x[~np.isfinite(fx)][0]
        raise NonFiniteError(f"integrand not finite at mapped abscissa {bad:.6g}")
    resk = fx @ KRONROD
    resg = fx @ GAUSS
    mean = 0.5 * resk
    resasc = np.abs(fx - mean[:, None]) @ KRONROD * half
    resabs = np.abs(fx) @ KRONROD * half
    err = np.abs(resk - resg) * half
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = resasc * np.minimum(1.0, (200.0 * err / resasc) ** 1.5)
    err = np.where((resasc > 0) & (err > 0), scaled, err)
    err = np.maximum(err, 50.0 * _EPS * resabs)
    return resk * half, err, resabs


def _initial_edges() -> np.ndarray:
    graded = [2.0 ** (-j) for j in range(12, 0, -1)]
    uniform = list(np.linspace(0.0, 1.0, 17))
    return np.unique(np.array([0.0] + graded + uniform))


MAX_PANELS = 20000


def _adaptive(g: Integrand, settings: QuadratureSettings):
    edges = _initial_edges()
    a, b = edges[:-1], edges[1:]
    val, err, babs = _gk15(g, a, b)
    evals = 15 * a.size
    for step in range(settings.max_refinements + 1):
        total = complex(val.sum())
        # round-off floor: no panel can beat 50 eps times its absolute integral
        floor = 50.0 * _EPS * babs
        tol = max(settings.abs_tol, settings.rel_tol * abs(total), 2.0 * floor.sum())
        if err.sum() <= tol:
            break
        if step == settings.max_refinements:
            raise NoConvergenceError(
                f"error estimate {err.sum():.3e} above tolerance {tol:.3e} "
                f"after {settings.max_refinements} refinement passes")
        split = (err > tol / a.size) & (err > 1.01 * floor)
        split[np.argmax(err - floor)] = True
        if np.any((b[split] - a[split]) < 1e-14):
            raise NoConvergenceError("panel width underflow during refinement")
        if a.size + split.sum() > MAX_PANELS:
            raise NoConvergenceError(
                f"error estimate {err.sum():.3e} above tolerance {tol:.3e} with {a.size} panels")
        m = 0.5 * (a[split] + b[split])
        na = np.concatenate([a[split], m])
        nb = np.concatenate([m, b[split]])
        nv, ne, nabs = _gk15(g, na, nb)
        evals += 15 * na.size
        keep = ~split
        a = np.concatenate([a[keep], na])
        b = np.concatenate([b[keep], nb])
        val = np.concatenate([val[keep], nv])
        err = np.concatenate([err[keep], ne])
        babs = np.concatenate([babs[keep], nabs])
    order = np.argsort(a, kind="stable")
    v = val[order]
    total = complex(math.fsum(v.real), math.fsum(v.imag))
    return total, math.fsum(err[order]), evals


def truncation_radius(decay: DecayBound | None, settings: QuadratureSettings,
                      multiplier: float = 1.0) -> float:
    if decay is None:
        return settings.max_radius
    R = decay.radius(settings.abs_tol / 10.0) * multiplier
    if not math.isfinite(R) or R > settings.max_radius:
        raise TruncationError(
            f"decay envelope needs radius {R:.4g} beyond max_radius {settings.max_radius:.4g}")
    return R


def integrate_ray(f: Integrand, ray: Ray, settings: QuadratureSettings | None = None,
                  decay: DecayBound | None = None, endpoint_exponent: float = 0.0,
                  radius_multiplier: float = 1.0, with_radius: bool = False) -> QuadratureResult:
    """Integrate ``f`` along ``ray`` from its origin to infinity.

    Parameters
    ----------
    f : callable
        Vectorised complex integrand of the point ``s`` on the ray.
    ray : Ray
    settings : QuadratureSettings
    decay : DecayBound, optional
        Envelope of ``|f|`` as a function of the ray parameter. Without it the
        ray is truncated at ``settings.max_radius``.
    endpoint_exponent : float
        Exponent ``mu`` in ``(-1, 0]`` of an integrable singularity
        ``r**mu`` at the origin; the mesh is graded accordingly.
    radius_multiplier : float
        Safety factor applied to the radius obtained from ``decay``.
    with_radius : bool
        Call ``f(s, r)`` with the exact ray parameter ``r`` as well, so that
        integrands singular at the origin avoid recomputing ``s - origin``.

    Returns
    -------
    QuadratureResult
        ``error_estimate`` adds the quadrature error and the tail bound.
    """
    settings = settings or QuadratureSettings()
    R = truncation_radius(decay, settings, radius_multiplier)
    unit = ray.direction.unit
    origin = ray.origin
    if with_radius:
        f_r = f
    else:
        def f_r(s, r):
            return f(s)

    # a-posteriori check of the truncation point, extending R if needed
    while True:
        probe = R * np.array([1.0, 1.1, 1.25, 1.5])
        vals = np.abs(np.asarray(f_r(origin + probe * unit, probe), dtype=complex))
        if np.all(np.isfinite(vals)) and vals.max() * R <= settings.abs_tol:
            break
        if R >= settings.max_radius:
            raise TruncationError(
                f"integrand not negligible at truncation radius {R:.4g} "
                f"(|f| up to {vals.max():.3e})")
        R = min(1.5 * R, settings.max_radius)

    mu = float(endpoint_exponent)
    if not -1.0 < mu <= 0.0:
        raise ValueError("endpoint_exponent must lie in (-1, 0]")
    power = 1.0 / (1.0 + mu)

    def g(x: np.ndarray) -> np.ndarray:
        r = R * x ** power
        jac = R * power * x ** (power - 1.0)
        return f_r(origin + r * unit, r) * unit * jac

    value, err, evals = _adaptive(g, settings)
    tail = decay.tail(R) if decay is not None else 0.0
    return QuadratureResult(value, err + tail, evals + 4, R)


def integrate_two_sided(f: Integrand, vertex: complex, theta_minus: RayDirection | float,
                        theta_plus: RayDirection | float,
                        settings: QuadratureSettings | None = None,
                        decay_minus: DecayBound | None = None,
                        decay_plus: DecayBound | None = None,
                        radius_multiplier: float = 1.0) -> QuadratureResult:
    """Integrate over the path coming in along ``theta_minus`` and leaving along ``theta_plus``.

    Returns ``-int(ray theta_minus) + int(ray theta_plus)``. Errors raised on one
    branch carry a ``branch`` attribute set to ``"minus"`` or ``"plus"``.
    """
    results = []
    for branch, theta, decay in (("minus", theta_minus, decay_minus),
                                 ("plus", theta_plus, decay_plus)):
        ray = Ray(complex(vertex), RayDirection(angle_of(theta)))
        try:
            results.append(integrate_ray(f, ray, settings, decay, 0.0, radius_multiplier))
        except HeatStokesError as exc:
            exc.branch = branch
            raise type(exc)(f"{branch} ray: {exc}") from exc
    lo, hi = results
    return QuadratureResult(hi.value - lo.value, lo.error_estimate + hi.error_estimate,
                            lo.evaluations + hi.evaluations,
                            max(lo.truncation_radius_used, hi.truncation_radius_used))
