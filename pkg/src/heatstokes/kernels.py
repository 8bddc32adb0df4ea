"""Special kernels: reciprocal Gamma, Ecalle kernels, heat kernel, Gaussian derivatives.

The Ecalle kernel ``C_alpha(tau) = sum_n (-tau)^n / (n! Gamma(1 - (n+1)/alpha))``
is evaluated from its power series near the origin. Farther out the series
cancels catastrophically in double precision, so it is evaluated from the
equivalent loop integral

    C_alpha(tau) = alpha/(2 pi i) * int exp(v**alpha - tau v) dv,

taken along the steepest-descent curve through the saddle
``v0 = (tau/alpha)**(1/(alpha-1))``. After scaling ``v = v0 w`` that curve is
``w = rho(phi) e^{i phi}`` with ``rho**(alpha-1) = alpha sin(phi)/sin(alpha phi)``,
on which the phase ``w**alpha - alpha w`` is real.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import NoConvergenceError, NonFiniteError, OffRayError
from .quadrature import DecayBound, RayDirection, angle_of

_LANCZOS_G = 7.0
_LANCZOS = (0.99999999999980993, 676.5203681218851, -1259.1392167224028,
            771.32342877765313, -176.61502916214059, 12.507343278686905,
            -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7)
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
INTEGER_TOL = 1e-12


def _sinpi(z: complex) -> complex:
    """``sin(pi z)`` with argument reduction, exact sign at integers."""
    n = round(z.real)
    return (-1.0) ** (n % 2) * cmath.sin(math.pi * (z - n))


def _log_gamma_lanczos(z: complex) -> complex:
    """``log Gamma(z)`` (some branch) for ``Re z >= 1/2``."""
    z = z - 1.0
    x = _LANCZOS[0]
    for i in range(1, 9):
        x += _LANCZOS[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return _LOG_SQRT_2PI + (z + 0.5) * cmath.log(t) - t + cmath.log(x)


def is_nonpositive_integer(z: complex, tol: float = INTEGER_TOL) -> bool:
    z = complex(z)
    if abs(z.imag) > tol or z.real > 0.5:
        return False
    return abs(z.real - round(z.real)) <= tol


def reciprocal_gamma(z: complex) -> complex:
    """Entire function ``1/Gamma(z)``.

    Uses a Lanczos approximation (g = 7, nine terms) on ``Re z >= 1/2`` and the
    reflection formula elsewhere, which vanishes exactly at nonpositive
    integers and keeps full relative accuracy next to them.
    """
    z = complex(z)
    if z.real >= 0.5:
        return cmath.exp(-_log_gamma_lanczos(z))
    # 1/Gamma(z) = Gamma(1-z) sin(pi z) / pi
    return _sinpi(z) / math.pi * cmath.exp(_log_gamma_lanczos(1.0 - z))


def _scaled_reciprocal_gamma(y: float, j: int) -> float:
    """Real ``1/(Gamma(y) j!)`` in log arithmetic; exact zero at the poles of Gamma."""
    if is_nonpositive_integer(y):
        return 0.0
    if y >= 0.5:
        return math.exp(-math.lgamma(y) - math.lgamma(j + 1.0))
    return _sinpi(complex(y)).real / math.pi * math.exp(math.lgamma(1.0 - y) - math.lgamma(j + 1.0))


@dataclass(frozen=True)
class EcalleKernelSpec:
    """Parameters of an Ecalle kernel evaluation.

    Parameters
    ----------
    alpha : float
        Kernel index, ``alpha > 1``.
    series_tol : float
        Absolute bound on the neglected series tail.
    max_terms : int
        Largest number of series terms.
    tau_max : float, optional
        Working radius of the plain power series; defaults to 30 for
        ``alpha = 2`` and 20 otherwise.
    method : {"auto", "series", "contour"}
        ``series`` uses only the power series (raising beyond ``tau_max``);
        ``contour`` uses only the loop integral; ``auto`` picks the series near
        the origin and the loop integral elsewhere inside the decay sector.
    """

    alpha: float
    series_tol: float = 1e-17
    max_terms: int = 600
    tau_max: float | None = None
    method: str = "auto"

    def __post_init__(self) -> None:
        if not self.alpha > 1.0:
            raise ValueError("alpha must exceed 1")
        if int(self.max_terms) < 1:
            raise ValueError("max_terms must be at least 1")
        if self.method not in ("auto", "series", "contour"):
            raise ValueError(f"unknown method {self.method!r}")

    @property
    def working_radius(self) -> float:
        if self.tau_max is not None:
            return float(self.tau_max)
        return 30.0 if self.alpha == 2.0 else 20.0

    @property
    def switch_radius(self) -> float:
        """Radius below which the series is used in ``auto`` mode.

        On the positive axis the largest series term grows like
        ``exp(c |tau|^beta)`` while the kernel decays like ``exp(-c |tau|^beta)``;
        the radius keeps their ratio below about ``1e3``.
        """
        a = self.alpha
        beta = a / (a - 1.0)
        r = a * (math.log(1e3) / (2.0 * (a - 1.0))) ** (1.0 / beta)
        return min(max(r, 0.5), 5.0)

    @property
    def decay_sector(self) -> float:
        """Half opening of the sector where ``C_alpha`` decays at infinity."""
        return math.pi * (self.alpha - 1.0) / (2.0 * self.alpha)


@lru_cache(maxsize=128)
def _series_table(alpha: float, m: int, nterms: int):
    """Coefficients ``b_j = 1/(j! Gamma(1-(j+m+1)/alpha))`` and upper bounds of ``|b_j|``."""
    coef = np.empty(nterms)
    bound = np.empty(nterms)
    for j in range(nterms):
        x = (j + m + 1) / alpha
        coef[j] = _scaled_reciprocal_gamma(1.0 - x, j)
        if x > 1.0:
            # |1/Gamma(1-x)| = |sin(pi x)| Gamma(x)/pi <= Gamma(x)/pi
            bound[j] = math.exp(math.lgamma(x) - math.lgamma(j + 1.0)) / math.pi
        else:
            bound[j] = abs(coef[j])
    return coef, bound


def _series_terms_needed(spec: EcalleKernelSpec, m: int, radius: float) -> int:
    nmax = int(spec.max_terms)
    _, bound = _series_table(spec.alpha, m, nmax + 1)
    if radius == 0.0:
        return 1
    logr = math.log(radius)
    for n in range(1, nmax):
        # geometric tail bound once consecutive bound ratios fall below 1
        b0, b1 = bound[n], bound[n + 1]
        if b0 == 0.0:
            continue
        q = b1 / b0 * radius
        if q < 1.0:
            term = math.exp(math.log(b0) + n * logr)
            if term / (1.0 - q) <= spec.series_tol:
                return n
    raise NoConvergenceError(
        f"Ecalle series for alpha={spec.alpha} needs more than {nmax} terms at |tau|={radius:.4g}")


def _ecalle_series(spec: EcalleKernelSpec, tau: np.ndarray, m: int,
                   fallback: np.ndarray | None = None) -> np.ndarray:
    """Series values; points flagged in ``fallback`` that cancel are left as NaN."""
    radius = float(np.max(np.abs(tau))) if tau.size else 0.0
    if radius > spec.working_radius:
        raise NoConvergenceError(
            f"|tau|={radius:.4g} beyond the series working radius {spec.working_radius:.4g}")
    n = _series_terms_needed(spec, m, radius)
    coef, _ = _series_table(spec.alpha, m, int(spec.max_terms) + 1)
    x = -tau
    acc = np.zeros_like(tau, dtype=complex)
    mag = np.zeros(tau.shape)
    ax = np.abs(tau)
    for j in range(n - 1, -1, -1):
        acc = acc * x + coef[j]
        mag = mag * ax + abs(coef[j])
    rounding = 8.0 * np.finfo(float).eps * mag
    bad = rounding > 1e-9 * np.maximum(np.abs(acc), spec.series_tol)
    if fallback is not None:
        acc[bad & fallback] = np.nan
        bad = bad & ~fallback
    if np.any(bad):
        raise NoConvergenceError(
            f"Ecalle series loses accuracy to cancellation at |tau|={float(ax[bad].max()):.4g}")
    return (-1.0) ** m * acc


@lru_cache(maxsize=64)
def _contour_nodes(alpha: float, h: float, half_width: float, odd_only: bool):
    """Nodes ``w`` and weights ``dw`` of the trapezoid rule on the scaled steepest-descent curve.

    The curve parameter ``phi`` in ``(-pi/alpha, pi/alpha)`` is reached through
    ``phi = (pi/alpha) tanh(x)`` so the rule clusters toward both ends.
    """
    k = np.arange(-half_width, half_width + 0.5 * h, h)
    if odd_only:
        k = k[:-1] + 0.5 * h
    phi = (math.pi / alpha) * np.tanh(k)
    dphi = (math.pi / alpha) / np.cosh(k) ** 2
    small = np.abs(phi) < 1e-4
    ps = np.where(small, 1.0, phi)
    ratio = np.where(small, 1.0 + (alpha ** 2 - 1.0) * phi ** 2 / 6.0,
                     alpha * np.sin(ps) / np.sin(alpha * ps))
    rho = ratio ** (1.0 / (alpha - 1.0))
    dlog = np.where(small, phi * (alpha ** 2 - 1.0) / 3.0,
                    1.0 / np.tan(ps) - alpha / np.tan(alpha * ps))
    drho = rho * dlog / (alpha - 1.0)
    e = np.exp(1j * phi)
    w = rho * e
    dw = (drho + 1j * rho) * e * dphi
    # real phase relative to its saddle value 1 - alpha
    with np.errstate(over="ignore", invalid="ignore"):
        g = rho ** alpha * np.cos(alpha * phi) - alpha * rho * np.cos(phi) - (1.0 - alpha)
    g = np.where(np.isfinite(g), g, -np.inf)
    keep = np.isfinite(dw) & np.isfinite(w)
    return w[keep], dw[keep] * h, g[keep]


def _ecalle_contour(alpha: float, tau: np.ndarray, m: int) -> np.ndarray:
    v0 = (tau / alpha) ** (1.0 / (alpha - 1.0))
    lam = v0 ** alpha
    half_width = 6.5
    h = 0.1
    out = np.empty(tau.shape, dtype=complex)
    active = np.arange(tau.size)
    lam_f, v0_f = lam.ravel(), v0.ravel()

    def partial(idx, h_, odd):
        w, dw, g = _contour_nodes(alpha, h_, half_width, odd)
        ex = lam_f[idx, None] * g[None, :]
        with np.errstate(under="ignore", over="ignore", invalid="ignore"):
            vals = np.where(ex.real > -745.0, np.exp(ex), 0.0) * dw[None, :]
            if m:
                vals = vals * (-v0_f[idx, None] * w[None, :]) ** m
        return vals.sum(axis=1)

    s = partial(active, h, False)
    flat = out.ravel()
    for _ in range(10):
        s_new = 0.5 * s + partial(active, h, True) * 0.5
        h *= 0.5
        done = np.abs(s_new - s) <= 1e-9 * np.abs(s_new)
        if h <= 0.05:
            flat[active[done]] = s_new[done]
            active, s = active[~done], s_new[~done]
        else:
            s = s_new
        if active.size == 0:
            break
    else:
        raise NoConvergenceError("Ecalle loop integral did not converge")
    pref = alpha * v0 / (2j * math.pi) * np.exp(lam * (1.0 - alpha))
    return pref * out


def ecalle_kernel(spec: EcalleKernelSpec | float, tau, derivative: int = 0):
    """Ecalle kernel ``C_alpha`` or its ``derivative``-th derivative at ``tau``.

    Parameters
    ----------
    spec : EcalleKernelSpec or float
        Kernel parameters; a bare float is taken as ``alpha``.
    tau : complex or array_like
    derivative : int

    Returns
    -------
    complex or ndarray
    """
    if not isinstance(spec, EcalleKernelSpec):
        spec = EcalleKernelSpec(float(spec))
    m = int(derivative)
    if m < 0:
        raise ValueError("derivative order must be non-negative")
    arr = np.asarray(tau, dtype=complex)
    flat = arr.ravel()
    out = np.empty(flat.shape, dtype=complex)
    if spec.method == "series":
        use_series = np.ones(flat.shape, dtype=bool)
    else:
        beta = spec.alpha / (spec.alpha - 1.0)
        in_sector = np.abs(np.angle(flat)) * beta < 0.49 * math.pi
        if spec.method == "contour":
            use_series = np.zeros(flat.shape, dtype=bool)
        else:
            use_series = (np.abs(flat) <= spec.switch_radius) | ~in_sector
    if np.any(use_series):
        # in auto mode, in-sector points where the series cancels go to the contour
        fb = in_sector[use_series] if spec.method == "auto" else None
        out[use_series] = _ecalle_series(spec, flat[use_series], m, fb)
        if fb is not None:
            use_series[use_series] = ~np.isnan(out[use_series])
    if np.any(~use_series):
        out[~use_series] = _ecalle_contour(spec.alpha, flat[~use_series], m)
    if not np.all(np.isfinite(out)):
        raise NonFiniteError("Ecalle kernel evaluation overflowed")
    out = out.reshape(arr.shape)
    return complex(out) if out.ndim == 0 else out


def heat_kernel(t: complex, s, sqrt_t: complex | None = None):
    """``(4 pi t)^(-1/2) exp(-s^2/(4t))`` with the principal root unless ``sqrt_t`` is given."""
    t = complex(t)
    r = cmath.sqrt(t) if sqrt_t is None else complex(sqrt_t)
    s = np.asarray(s, dtype=complex)
    with np.errstate(under="ignore"):
        out = np.exp(-s * s / (4.0 * t)) / (2.0 * math.sqrt(math.pi) * r)
    return complex(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class GaussianDerivativeRequest:
    order: int
    point: complex
    time: complex

    def __post_init__(self) -> None:
        if int(self.order) < 0:
            raise ValueError("order must be non-negative")
        if complex(self.time) == 0:
            raise ValueError("time must be nonzero")


def gaussian_derivative(order, s=None, t=None, sqrt_t: complex | None = None):
    """``d^m/ds^m exp(-s^2/(4t))``.

    Accepts either a :class:`GaussianDerivativeRequest` or ``(m, s, t)``.
    Evaluated with the orthonormal Hermite recurrence and a log-scale
    prefactor, which equals ``(-1)^m (2 sqrt t)^(-m) H_m(x) exp(-x^2)`` with
    ``x = s/(2 sqrt t)``.
    """
    if isinstance(order, GaussianDerivativeRequest):
        order, s, t = order.order, order.point, order.time
    m = int(order)
    t = complex(t)
    if t == 0:
        raise ValueError("time must be nonzero")
    root = cmath.sqrt(t) if sqrt_t is None else complex(sqrt_t)
    s_arr = np.asarray(s, dtype=complex)
    x = s_arr / (2.0 * root)
    h_prev = np.zeros_like(x)
    h = np.ones_like(x)
    for j in range(m):
        h, h_prev = (math.sqrt(2.0 / (j + 1)) * x * h - math.sqrt(j / (j + 1.0)) * h_prev), h
    # H_m = sqrt(2^m m!) h_m
    log_scale = 0.5 * (m * math.log(2.0) + math.lgamma(m + 1.0)) - m * cmath.log(2.0 * root)
    with np.errstate(under="ignore"):
        out = (-1.0) ** m * h * np.exp(-x * x + log_scale)
    return complex(out) if out.ndim == 0 else out


def heaviside_ray(theta_z: RayDirection | float, s: complex, pivot: complex,
                  tol: float = 1e-9) -> int:
    """Directional Heaviside function: 1 beyond ``pivot`` along ``theta_z``, else 0."""
    d = (complex(s) - complex(pivot)) * cmath.exp(-1j * angle_of(theta_z))
    if abs(d.imag) > tol * max(1.0, abs(d)):
        raise OffRayError(f"point {s} is not on the line through {pivot} at angle {angle_of(theta_z)}")
    return 1 if d.real > 0 else 0


def unwrap_near(angle: float, reference: float) -> float:
    """Representative of ``angle`` modulo ``2 pi`` closest to ``reference``."""
    return reference + math.remainder(angle - reference, 2.0 * math.pi)


@dataclass(frozen=True)
class EcalleDecayModel:
    """Assumed decay ``|C_alpha(tau)| <= amplitude * exp(-rate_fraction * c |tau|^beta cos(beta arg tau))``.

    ``c = (alpha-1)/alpha^beta`` and ``beta = alpha/(alpha-1)`` are the saddle
    point constants; ``rate_fraction < 1`` leaves room for the algebraic
    prefactor, and ``radius_multiplier`` enlarges the truncation radius.
    """

    amplitude: float = 1.0
    rate_fraction: float = 0.5
    radius_multiplier: float = 1.5


class HeatKernel:
    """``(4 pi t)^(-1/2) exp(-s^2/(4t))`` with a chosen branch of ``sqrt t``.

    Parameters
    ----------
    t : complex
    arg_t : float, optional
        Determination of ``arg t`` fixing the square root; principal by default.
    """

    alpha = 2.0
    p, q = 1, 2

    def __init__(self, t: complex, arg_t: float | None = None):
        self.t = complex(t)
        if self.t == 0:
            raise ValueError("t must be nonzero")
        self.arg_t = cmath.phase(self.t) if arg_t is None else float(arg_t)
        self.sqrt_t = math.sqrt(abs(self.t)) * cmath.exp(0.5j * self.arg_t)

    def __call__(self, s):
        return heat_kernel(self.t, s, self.sqrt_t)

    def derivative(self, m: int, s):
        pref = 1.0 / (2.0 * math.sqrt(math.pi) * self.sqrt_t)
        return pref * gaussian_derivative(m, s, self.t, self.sqrt_t)

    def decay(self, origin: complex, angle: float, degree: float = 0.0) -> DecayBound:
        """Envelope of ``|s^j K^(m)(s)|``-type integrands along ``origin + r e^{i angle}``.

        ``degree`` accounts for polynomial factors (Hermite polynomials and
        data growth).
        """
        return _gaussian_decay(self.t, origin, angle, degree,
                               1.0 / (2.0 * math.sqrt(math.pi * abs(self.t))))


def _gaussian_decay(t: complex, origin: complex, angle: float, degree: float,
                    amplitude: float) -> DecayBound:
    # Re((a + r u)^2 / 4t) = c r^2 + b r + Re(a^2/4t)
    u = cmath.exp(1j * angle)
    c = (u * u / (4.0 * t)).real
    if c <= 0:
        return DecayBound(amplitude, 0.0, 2.0, degree)
    a = complex(origin)
    b = 2.0 * (a * u / (4.0 * t)).real
    const = (a * a / (4.0 * t)).real
    if b >= 0:
        return DecayBound(amplitude * math.exp(min(-const, 700.0)), c, 2.0, degree)
    # c r^2 + b r >= c r^2 / 2 - b^2 / (2c)
    shift = b * b / (2.0 * c) - const
    return DecayBound(amplitude * math.exp(min(shift, 700.0)), 0.5 * c, 2.0, degree)


class EcalleKernel:
    """``(q T)^(-1) C_{q/p}(s/T)`` with ``T = t^(p/q)`` on a chosen branch.

    Parameters
    ----------
    t : complex
    p, q : int
    arg_t : float, optional
        Determination of ``arg t``; ``T = |t|^(p/q) exp(i p arg_t / q)``.
    spec : EcalleKernelSpec, optional
    decay_model : EcalleDecayModel, optional
    """

    def __init__(self, t: complex, p: int, q: int, arg_t: float | None = None,
                 spec: EcalleKernelSpec | None = None,
                 decay_model: EcalleDecayModel | None = None):
        self.t = complex(t)
        if self.t == 0:
            raise ValueError("t must be nonzero")
        self.p, self.q = int(p), int(q)
        self.alpha = self.q / self.p
        self.spec = spec or EcalleKernelSpec(self.alpha)
        if abs(self.spec.alpha - self.alpha) > 1e-15:
            raise ValueError("kernel spec alpha does not match q/p")
        self.arg_t = cmath.phase(self.t) if arg_t is None else float(arg_t)
        self.T = abs(self.t) ** (self.p / self.q) * cmath.exp(1j * self.p * self.arg_t / self.q)
        self.decay_model = decay_model or EcalleDecayModel()

    def __call__(self, s):
        return ecalle_kernel(self.spec, np.asarray(s, dtype=complex) / self.T) / (self.q * self.T)

    def derivative(self, m: int, s):
        vals = ecalle_kernel(self.spec, np.asarray(s, dtype=complex) / self.T, derivative=m)
        return vals / (self.q * self.T ** (m + 1))

    def decay(self, origin: complex, angle: float, degree: float = 0.0) -> DecayBound:
        a = self.alpha
        beta = a / (a - 1.0)
        c = (a - 1.0) / a ** beta
        rel = math.remainder(angle - cmath.phase(self.T), 2.0 * math.pi)
        cosb = math.cos(beta * rel)
        rate = self.decay_model.rate_fraction * c * cosb / abs(self.T) ** beta
        amp = self.decay_model.amplitude / (self.q * abs(self.T))
        if abs(origin) > 0:
            # |origin + r u|^beta >= (r - |origin|)^beta, absorbed by halving the rate
            # and inflating the amplitude
            rate *= 0.5 ** beta
            amp *= math.exp(min(rate * (2.0 * abs(origin)) ** beta * 2.0 ** beta, 700.0))
        return DecayBound(amp, max(rate, 0.0), beta, degree)

    @property
    def radius_multiplier(self) -> float:
        return self.decay_model.radius_multiplier


def make_kernel(t: complex, p: int, q: int, arg_t: float | None = None,
                prefer_heat: bool = True, spec: EcalleKernelSpec | None = None,
                decay_model: EcalleDecayModel | None = None):
    """Heat kernel for ``(p, q) = (1, 2)`` when ``prefer_heat``, otherwise an Ecalle kernel."""
    if (p, q) == (1, 2) and prefer_heat:
        return HeatKernel(t, arg_t)
    return EcalleKernel(t, p, q, arg_t, spec, decay_model)
