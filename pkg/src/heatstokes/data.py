"""Catalogue of Cauchy data with one singular point.

Every datum supports principal-sheet evaluation with explicit sheet
selection, continuation from a base point ``z`` along straight segments (the
"cut plane" whose cut leaves the singular point ``z0`` in the direction
``arg(z0 - z)``), closed-form derivatives for the formal solution, growth
envelopes for quadrature truncation, and (for multivalued data) the monodromy
density along the cut.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .errors import (AtSingularityError, OutsideDomainError, UnsupportedError,
                     ValidationError)
from .kernels import heaviside_ray
from .quadrature import RayDirection

TWO_PI = 2.0 * math.pi
RATIONAL_DENOMINATOR_LIMIT = 100
RATIONAL_TOL = 1e-9


@dataclass(frozen=True)
class BranchPoint:
    """Sheet selector: winding count around the singular point (0 is principal)."""

    sheet: int = 0


def _as_fraction(x) -> Fraction | None:
    """Exact rational for real ints, Fractions and floats; ``None`` for non-real input."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    c = complex(x)
    if c.imag != 0.0 or not math.isfinite(c.real):
        return None
    return Fraction(c.real)


def _falling(mu: complex, m: int) -> complex:
    out = 1.0 + 0j
    for j in range(m):
        out *= mu - j
    return out


def _check_distance(w, z0: complex) -> None:
    if np.any(np.asarray(w) == z0):
        raise AtSingularityError(f"evaluation at the singular point {z0}")


def looks_rational(x: float, max_denominator: int = RATIONAL_DENOMINATOR_LIMIT,
                   tol: float = RATIONAL_TOL) -> bool:
    """True when ``x`` is within ``tol`` of a fraction with denominator at most ``max_denominator``."""
    for q in range(1, max_denominator + 1):
        if abs(x * q - round(x * q)) < tol * q:
            return True
    return False


class CauchyDatum:
    """Common interface of catalogue data."""

    z0: complex | None = None
    multivalued = False

    def evaluate(self, w, branch: BranchPoint | int = 0):
        raise NotImplementedError

    def continued(self, w, base: complex, sheet: int = 0):
        """Value at ``w`` continued from ``base`` along the straight segment."""
        return self.evaluate(w, 0)

    def derivative(self, m: int, z: complex) -> complex:
        raise NotImplementedError

    def exact_derivative(self, m: int, z) -> Fraction | None:
        return None

    def envelope(self, z: complex, clearance: float) -> tuple[float, float]:
        """``(A, d)`` with ``|phi(z + s)| <= A (1 + |s|)^d`` wherever ``|z + s - z0| >= clearance``."""
        raise NotImplementedError


def _sheet(branch) -> int:
    return branch.sheet if isinstance(branch, BranchPoint) else int(branch)


@dataclass(frozen=True)
class Polynomial(CauchyDatum):
    """Entire polynomial datum, coefficients in ascending order."""

    coefficients: tuple = (0,)

    def __post_init__(self) -> None:
        coeffs = tuple(self.coefficients) or (0,)
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def degree(self) -> int:
        nz = [k for k, c in enumerate(self.coefficients) if complex(c) != 0]
        return nz[-1] if nz else 0

    def evaluate(self, w, branch=0):
        w = np.asarray(w, dtype=complex)
        acc = np.zeros_like(w)
        for c in reversed(self.coefficients):
            acc = acc * w + complex(c)
        return complex(acc) if acc.ndim == 0 else acc

    def derivative(self, m: int, z: complex) -> complex:
        z = complex(z)
        acc = 0j
        for k in range(len(self.coefficients) - 1, m - 1, -1):
            acc = acc * z + complex(self.coefficients[k]) * math.perm(k, m)
        return acc

    def exact_derivative(self, m: int, z) -> Fraction | None:
        zf = _as_fraction(z)
        cf = [_as_fraction(c) for c in self.coefficients]
        if zf is None or any(c is None for c in cf):
            return None
        acc = Fraction(0)
        for k in range(len(cf) - 1, m - 1, -1):
            acc = acc * zf + cf[k] * math.perm(k, m)
        return acc

    def envelope(self, z: complex, clearance: float) -> tuple[float, float]:
        base = 1.0 + abs(complex(z))
        amp = sum(abs(complex(c)) * base ** k for k, c in enumerate(self.coefficients))
        return max(amp, 1e-300), float(self.degree)


@dataclass(frozen=True)
class LaurentTail(CauchyDatum):
    """``sum_n a_n/(z - z0)^n`` plus an entire polynomial part.

    Parameters
    ----------
    z0 : complex
        Singular point, nonzero.
    coefficients : sequence, optional
        Explicit finite list ``a_1, a_2, ...``.
    entire_part : Polynomial
    generator : callable, optional
        ``n -> a_n`` for an infinite tail; requires ``radius``.
    radius : float, optional
        Certified bound ``limsup |a_n|^(1/n) <= radius < 1``; also the radius of
        the disc around ``z0`` inside which the tail is not evaluated.
    closed_form : callable, optional
        Vectorised closed form of the whole datum (tail plus entire part).
    sup_bound : callable, optional
        ``c -> sup |phi(w)|`` over ``|w - z0| >= c``, for bounded closed forms.
    prefix : int
        Number of generated coefficients inspected by the empirical check.
    """

    z0: complex = 1.0
    coefficients: tuple = ()
    entire_part: Polynomial = field(default_factory=Polynomial)
    generator: Callable[[int], complex] | None = None
    radius: float | None = None
    closed_form: Callable | None = None
    sup_bound: Callable[[float], float] | None = None
    prefix: int = 64
    label: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "z0", complex(self.z0))
        object.__setattr__(self, "coefficients", tuple(self.coefficients))
        if self.z0 == 0:
            raise ValidationError("z0 must be nonzero")
        if self.generator is None:
            if not self.coefficients:
                raise ValidationError("a Laurent tail needs coefficients or a generator")
            return
        if self.radius is None or not (0.0 < self.radius < 1.0):
            raise ValidationError("a generated Laurent tail needs a certified radius in (0, 1)")
        roots = [abs(complex(self.generator(n))) ** (1.0 / n) for n in range(1, self.prefix + 1)]
        late = max(roots[self.prefix // 2:])
        if not late < 1.0:
            raise ValidationError(
                f"empirical |a_n|^(1/n) reaches {late:.4g} on the prefix; the tail must satisfy limsup < 1")

    @property
    def is_finite(self) -> bool:
        return self.generator is None

    def coefficient(self, n: int) -> complex:
        if n < 1:
            return 0j
        if self.generator is None:
            return complex(self.coefficients[n - 1]) if n <= len(self.coefficients) else 0j
        return complex(self.generator(n))

    def coefficient_bound(self) -> tuple[float, float]:
        """``(M, rho)`` with ``|a_n| <= M rho^n`` (certificate trusted beyond the prefix)."""
        if self.generator is None:
            rho = 0.5
            m = max((abs(complex(a)) / rho ** (k + 1) for k, a in enumerate(self.coefficients)),
                    default=0.0)
            return m, rho
        rho = float(self.radius)
        m = max(abs(self.coefficient(n)) / rho ** n for n in range(1, self.prefix + 1))
        return m, rho

    def _tail_sum(self, w: np.ndarray, m: int = 0) -> np.ndarray:
        d = w - self.z0
        if self.generator is None:
            acc = np.zeros_like(d)
            for n in range(len(self.coefficients), 0, -1):
                a = complex(self.coefficients[n - 1])
                acc = acc + a * (-1) ** m * math.exp(math.lgamma(n + m) - math.lgamma(n)) * d ** (-n - m)
            return acc
        if np.any(np.abs(d) <= self.radius):
            raise OutsideDomainError(
                f"Laurent tail evaluated within its radius {self.radius} of z0")
        acc = np.zeros_like(d)
        inv = 1.0 / d
        for n in range(1, 10000):
            rf = math.exp(math.lgamma(n + m) - math.lgamma(n))
            term = self.coefficient(n) * (-1) ** m * rf * inv ** (n + m)
            acc = acc + term
            if n > 4 and np.all(np.abs(term) <= 1e-17 * np.maximum(np.abs(acc), 1e-300)):
                return acc
        raise OutsideDomainError("Laurent tail failed to converge")

    def evaluate(self, w, branch=0):
        w = np.asarray(w, dtype=complex)
        _check_distance(w, self.z0)
        if self.closed_form is not None:
            out = np.asarray(self.closed_form(w), dtype=complex)
        else:
            out = self._tail_sum(w) + self.entire_part.evaluate(w)
        return complex(out) if out.ndim == 0 else out

    def derivative(self, m: int, z: complex) -> complex:
        w = np.asarray(complex(z))
        _check_distance(w, self.z0)
        return complex(self._tail_sum(w, m)) + self.entire_part.derivative(m, z)

    def exact_derivative(self, m: int, z) -> Fraction | None:
        if self.generator is not None:
            return None
        zf, z0f = _as_fraction(z), _as_fraction(self.z0)
        af = [_as_fraction(a) for a in self.coefficients]
        ent = self.entire_part.exact_derivative(m, z)
        if zf is None or z0f is None or ent is None or any(a is None for a in af):
            return None
        d = zf - z0f
        if d == 0:
            raise AtSingularityError("evaluation at the singular point")
        acc = Fraction(0)
        for n, a in enumerate(af, start=1):
            rising = math.factorial(n + m - 1) // math.factorial(n - 1)
            acc += a * (-1) ** m * rising / d ** (n + m)
        return acc + ent

    def envelope(self, z: complex, clearance: float) -> tuple[float, float]:
        if self.sup_bound is not None:
            return self.sup_bound(clearance), 0.0
        amp, deg = self.entire_part.envelope(z, clearance)
        m_, rho = self.coefficient_bound()
        if self.generator is None:
            amp += sum(abs(complex(a)) / clearance ** (n + 1) for n, a in enumerate(self.coefficients))
        else:
            if clearance <= rho:
                raise OutsideDomainError("ray enters the certified disc of the Laurent tail")
            ratio = rho / clearance
            amp += m_ * ratio / (1.0 - ratio)
        return amp, deg


def exp_pole(z0: complex) -> LaurentTail:
    """The datum ``exp(1/(z - z0))`` as a Laurent tail with ``a_n = 1/n!``."""
    z0c = complex(z0)
    return LaurentTail(
        z0=z0c, entire_part=Polynomial((1,)),
        generator=lambda n: 1.0 / math.factorial(n) if n < 171 else 0.0,
        radius=0.5, closed_form=lambda w: np.exp(1.0 / (np.asarray(w) - z0c)),
        sup_bound=lambda c: math.exp(min(1.0 / c, 700.0)), label="exp_pole")


class _Multivalued(CauchyDatum):
    """Data written as ``F(log(w - z0))`` for an entire-in-log function ``F``."""

    multivalued = True

    def _from_log(self, L):
        raise NotImplementedError

    def log_coordinate(self, w, sheet: int = 0):
        w = np.asarray(w, dtype=complex)
        _check_distance(w, self.z0)
        return np.log(w - self.z0) + 2j * math.pi * sheet

    def evaluate(self, w, branch: BranchPoint | int = 0):
        out = self._from_log(self.log_coordinate(w, _sheet(branch)))
        return complex(out) if np.ndim(out) == 0 else out

    def continued_log(self, w, base: complex, sheet: int = 0):
        """Log coordinate at ``w`` continued from ``base`` (principal there) along a segment."""
        w = np.asarray(w, dtype=complex)
        _check_distance(w, self.z0)
        base_arg = cmath.phase(complex(base) - self.z0)
        d = np.angle(w - self.z0) - base_arg
        d = np.mod(d + math.pi, TWO_PI) - math.pi
        return np.log(np.abs(w - self.z0)) + 1j * (base_arg + d + TWO_PI * sheet)

    def continued(self, w, base: complex, sheet: int = 0):
        out = self._from_log(self.continued_log(w, base, sheet))
        return complex(out) if np.ndim(out) == 0 else out

    def plus_side_arg(self, z: complex) -> float:
        """Argument of ``w - z0`` on the counter-clockwise side of the cut from ``z0`` along ``arg(z0 - z)``.

        Continuing from ``z`` with its principal value, this is ``theta_z`` when
        ``theta_z <= 0`` and ``theta_z - 2 pi`` otherwise.
        """
        theta = cmath.phase(self.z0 - complex(z))
        return theta if theta <= 0.0 else theta - TWO_PI


def _phase_factor(mu: float, phase: str) -> complex:
    """Monodromy factor of ``(w - z0)^mu``: ``e^{2 pi i mu} - 1`` or the mirrored choice."""
    if phase == "plus":
        return cmath.exp(2j * math.pi * mu) - 1.0
    if phase == "minus":
        return 1.0 - cmath.exp(-2j * math.pi * mu)
    raise ValueError(f"unknown phase convention {phase!r}")


@dataclass(frozen=True)
class LogBranch(_Multivalued):
    z0: complex = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "z0", complex(self.z0))
        if self.z0 == 0:
            raise ValidationError("z0 must be nonzero")

    def _from_log(self, L):
        return L

    def derivative(self, m: int, z: complex) -> complex:
        d = complex(z) - self.z0
        if d == 0:
            raise AtSingularityError("evaluation at the singular point")
        if m == 0:
            return cmath.log(d)
        return (-1) ** (m - 1) * math.factorial(m - 1) * d ** (-m)

    def envelope(self, z: complex, clearance: float) -> tuple[float, float]:
        amp = abs(math.log(clearance)) + math.log1p(abs(complex(z) - self.z0)) + 3.0 * TWO_PI
        return amp, 1.0


@dataclass(frozen=True)
class PowerBranch(_Multivalued):
    """``(z - z0)^lam`` with non-integer real ``lam``."""

    lam: float = 0.5
    z0: complex = 1.0
    phase: str = "plus"

    def __post_init__(self) -> None:
        object.__setattr__(self, "z0", complex(self.z0))
        object.__setattr__(self, "lam", float(self.lam))
        if self.z0 == 0:
            raise ValidationError("z0 must be nonzero")
        if abs(self.lam - round(self.lam)) < 1e-12:
            raise ValidationError("power exponent must not be an integer")
        _phase_factor(0.5, self.phase)

    def _from_log(self, L):
        return np.exp(self.lam * L)

    def derivative(self, m: int, z: complex) -> complex:
        d = complex(z) - self.z0
        if d == 0:
            raise AtSingularityError("evaluation at the singular point")
        return _falling(self.lam, m) * cmath.exp((self.lam - m) * cmath.log(d))

    def envelope(self, z: complex, clearance: float) -> tuple[float, float]:
        if self.lam >= 0:
            return (1.0 + abs(complex(z) - self.z0)) ** self.lam, self.lam
        return clearance ** self.lam, 0.0


@dataclass(frozen=True)
class EssentialPower(_Multivalued):
    """``exp(1/(z - z0)^lam)`` with irrational ``lam > 0``.

    Irrationality is checked by rejecting fractions with denominators up to
    100 within ``1e-9``.
    """

    lam: float = math.sqrt(2.0)
    z0: complex = 1.0
    phase: str = "plus"
    term_count: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "z0", complex(self.z0))
        object.__setattr__(self, "lam", float(self.lam))
        if self.z0 == 0:
            raise ValidationError("z0 must be nonzero")
        if not self.lam > 0:
            raise ValidationError("essential-power exponent must be positive")
        if looks_rational(self.lam):
            raise ValidationError("essential-power exponent must be irrational")
        _phase_factor(0.5, self.phase)

    def _from_log(self, L):
        with np.errstate(over="ignore"):
            return np.exp(np.exp(-self.lam * L))

    def derivative(self, m: int, z: complex) -> complex:
        d = complex(z) - self.z0
        if d == 0:
            raise AtSingularityError("evaluation at the singular point")
        L = cmath.log(d)
        acc = 0j
        logfact = 0.0
        for n in range(0, 5000):
            if n:
                logfact += math.log(n)
            mu = -self.lam * n
            term = _falling(mu, m) * cmath.exp((mu - m) * L - logfact)
            acc += term
            if n > 8 and abs(term) <= 1e-17 * max(abs(acc), 1e-300):
                return acc
        raise OutsideDomainError("derivative series did not converge")

    def envelope(self, z: complex, clearance: float) -> tuple[float, float]:
        return math.exp(min(clearance ** (-self.lam), 700.0)), 0.0


def evaluate(datum: CauchyDatum, z, branch: BranchPoint | int = 0):
    """Value of ``datum`` at ``z`` on the requested sheet (principal is sheet 0)."""
    return datum.evaluate(z, branch)


def stokes_direction(datum: CauchyDatum, z: complex, p: int = 1, q: int = 2):
    """Stokes direction ``q arg(z0)/p`` and singular ray direction ``arg(z0 - z)``.

    Returns
    -------
    (RayDirection, RayDirection)
    """
    if datum.z0 is None:
        raise UnsupportedError("entire data have no Stokes direction")
    if complex(z) == datum.z0:
        raise AtSingularityError("z coincides with the singular point")
    if not 1 <= p < q:
        raise ValueError("need 1 <= p < q")
    delta = q * cmath.phase(datum.z0) / p
    return RayDirection(delta), RayDirection(cmath.phase(datum.z0 - complex(z)))


def local_stokes_direction(datum: CauchyDatum, z: complex, p: int = 1, q: int = 2) -> float:
    """Unnormalised Stokes direction ``q arg(z0 - z)/p`` seen from the point ``z``."""
    return q * cmath.phase(datum.z0 - complex(z)) / p


@dataclass(frozen=True)
class VariationTerm:
    """Density ``coefficient * (w - z0)^exponent`` on the cut, paired with the ``order``-th kernel derivative.

    ``(w - z0)`` is taken on the counter-clockwise side of the cut, with
    argument ``arg_plus``.
    """

    coefficient: complex
    exponent: float
    order: int
    arg_plus: float

    def value(self, x, derivative: int = 0):
        """Value (or ``s``-derivative) at cut coordinate ``x = |w - z0| > 0``; zero for ``x <= 0``."""
        x = np.asarray(x, dtype=float)
        pos = x > 0
        xs = np.where(pos, x, 1.0)
        nu = self.exponent - derivative
        out = (self.coefficient * _falling(self.exponent, derivative)
               * np.exp(nu * (np.log(xs) + 1j * self.arg_plus)))
        return np.where(pos, out, 0.0)


@dataclass(frozen=True)
class VariationDensity:
    """Monodromy density of a multivalued datum along the cut ``start + x e^{i theta_z}``.

    ``case_class`` 1: integrable density paired with the kernel; 2: an
    antiderivative paired with the ``m``-th kernel derivative; 3: a series of
    such antiderivatives, one per power in the expansion of the datum.
    """

    case_class: int
    start: complex
    direction: RayDirection
    terms: tuple
    derivative_order: object
    term_count: int
    term_generator: Callable[[int], VariationTerm] | None = None
    growth_constants: tuple | None = None

    def coordinate(self, s) -> np.ndarray:
        """Signed coordinate of ``s`` along the cut, measured from ``start``."""
        s = np.asarray(s, dtype=complex)
        return ((s - self.start) * cmath.exp(-1j * self.direction.angle)).real

    def indicator(self, s) -> int:
        return heaviside_ray(self.direction, complex(s), self.start)

    def density(self, s):
        """Value of the stored density at points ``s`` on the cut line.

        For case 1 and 2 this is the (antiderivative) density itself; for case
        3 it is the full monodromy ``varF`` (the sum of the terms' ``k_n``-th
        derivatives).
        """
        x = self.coordinate(s)
        if self.case_class == 3:
            acc = np.zeros(np.shape(x), dtype=complex)
            for term in self.terms:
                acc = acc + term.value(x, derivative=term.order)
            return acc
        return self.terms[0].value(x)

    def term(self, n: int) -> VariationTerm:
        if n <= len(self.terms):
            return self.terms[n - 1]
        if self.term_generator is None:
            raise IndexError(n)
        return self.term_generator(n)


def essential_term_count(lam: float, series_tol: float) -> int:
    """First ``n`` with ``(n!)^(-(lam/2 + 1)) < series_tol``."""
    n, logfact = 1, 0.0
    while True:
        logfact += math.log(n)
        if -(lam / 2.0 + 1.0) * logfact < math.log(series_tol):
            return n
        n += 1


def variation(datum: CauchyDatum, z: complex, series_tol: float = 1e-12) -> VariationDensity:
    """Monodromy density of a multivalued datum seen from the point ``z``.

    Raises
    ------
    UnsupportedError
        For single-valued data.
    """
    if not getattr(datum, "multivalued", False):
        raise UnsupportedError("single-valued data have no variation density")
    z = complex(z)
    if z == datum.z0:
        raise AtSingularityError("z coincides with the singular point")
    start = datum.z0 - z
    theta = RayDirection(cmath.phase(start))
    argp = datum.plus_side_arg(z)

    if isinstance(datum, LogBranch):
        term = VariationTerm(2j * math.pi, 0.0, 0, argp)
        return VariationDensity(1, start, theta, (term,), 0, 1)

    if isinstance(datum, PowerBranch):
        lam = datum.lam
        factor = _phase_factor(lam, datum.phase)
        if lam > -1.0:
            return VariationDensity(1, start, theta, (VariationTerm(factor, lam, 0, argp),), 0, 1)
        m = math.floor(-lam)
        denom = 1.0
        for j in range(1, m + 1):
            denom *= lam + j
        term = VariationTerm(factor / denom, lam + m, m, argp)
        return VariationDensity(2, start, theta, (term,), m, 1)

    if isinstance(datum, EssentialPower):
        lam = datum.lam

        def make(n: int) -> VariationTerm:
            mu = -lam * n
            k = math.floor(lam * n)
            denom = math.factorial(n) if n < 171 else math.inf
            for j in range(1, k + 1):
                denom *= mu + j
            return VariationTerm(_phase_factor(mu, datum.phase) / denom, mu + k, k, argp)

        count = datum.term_count or essential_term_count(lam, series_tol)
        terms = tuple(make(n) for n in range(1, count + 1))
        orders = tuple(t.order for t in terms)
        return VariationDensity(3, start, theta, terms, orders, count, make)

    raise UnsupportedError(f"no variation for {type(datum).__name__}")


def growth_certificate(datum: CauchyDatum, p: int = 1, q: int = 2) -> tuple[float, bool]:
    """Exponential order of growth at infinity and admissibility for ``(p, q)``.

    All catalogue data grow at most polynomially away from ``z0``, hence order 0.
    """
    order = 0.0
    return order, order <= q / (q - p)
