"""Directional (lateral) sums of the formal solution by ray quadrature.

For the heat equation the sum in direction ``theta`` is

    (4 pi t)^(-1/2) int_0^{inf e^{i theta/2}} (phi(z+s) + phi(z-s)) exp(-s^2/4t) ds,

and for ``d_t^p u = d_z^q u`` it is

    (q T)^(-1) int_0^{inf e^{i theta p/q}} sum_l phi(z + w^l s) C_{q/p}(s/T) ds

with ``w = e^{2 pi i/q}`` and ``T = t^(p/q)``. Multivalued data are continued
from ``z`` along straight segments, which places the cut on the singular ray.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

from .data import CauchyDatum, growth_certificate
from .errors import GrowthViolationError, RayHitsSingularityError, SectorError, ValidationError
from .kernels import (EcalleDecayModel, EcalleKernel, EcalleKernelSpec, HeatKernel,
                      unwrap_near)
from .quadrature import (DecayBound, QuadratureResult, QuadratureSettings, Ray, RayDirection,
                         angle_of, integrate_ray, normalize_angle)

DEFAULT_CLEARANCE = 1e-6


@dataclass(frozen=True)
class LateralSumRequest:
    """Inputs of a lateral sum.

    Parameters
    ----------
    datum : CauchyDatum
    theta : RayDirection or float
        Summation direction in the ``t`` plane.
    t, z : complex
    p, q : int
    settings : QuadratureSettings
    eps_tilde : float
        Margin subtracted from the sector opening.
    r : float
        Radius of the working disc for ``t`` and ``z``.
    clearance : float
        Minimal distance between the ray and singular points of the integrand.
    kernel_spec, decay_model :
        Ecalle kernel options for the general case.
    """

    datum: CauchyDatum
    theta: object
    t: complex
    z: complex = 0j
    p: int = 1
    q: int = 2
    settings: QuadratureSettings = field(default_factory=QuadratureSettings)
    eps_tilde: float = 0.05
    r: float = 1.0
    clearance: float = DEFAULT_CLEARANCE
    kernel_spec: EcalleKernelSpec | None = None
    decay_model: EcalleDecayModel | None = None

    def __post_init__(self) -> None:
        if not 1 <= self.p < self.q:
            raise ValidationError("need 1 <= p < q")
        if complex(self.t) == 0:
            raise ValidationError("t must be nonzero")
        if not abs(complex(self.z)) < self.r:
            raise ValidationError(f"|z| must be below the working radius {self.r}")


def sector_check(t: complex, theta, p: int = 1, q: int = 2, eps_tilde: float = 0.05,
                 r: float = 1.0) -> bool:
    """True iff ``|arg t - theta| < (pi (q-p)/p - eps_tilde)/2`` and ``|t| < r``."""
    t = complex(t)
    if t == 0:
        return False
    diff = abs(math.remainder(cmath.phase(t) - angle_of(theta), 2.0 * math.pi))
    return diff < 0.5 * (math.pi * (q - p) / p - eps_tilde) and abs(t) < r


def singular_points(datum: CauchyDatum, z: complex, p: int, q: int) -> list[complex]:
    """Points ``s`` where some rotated copy ``phi(z + w^l s)`` is singular."""
    if datum.z0 is None:
        return []
    a = datum.z0 - complex(z)
    if (p, q) == (1, 2):
        return [a, -a]
    return [a * cmath.exp(-2j * math.pi * l / q) for l in range(q)]


def singular_directions(datum: CauchyDatum, z: complex, p: int = 1, q: int = 2) -> list[RayDirection]:
    """Summation directions whose integration ray meets a rotated singular point."""
    cands = sorted(normalize_angle(q * (cmath.phase(s) + 2.0 * math.pi * j) / p)
                   for s in singular_points(datum, z, p, q) for j in range(p))
    out: list[float] = []
    for a in cands:
        # merge angles equal up to rounding, including across the +-pi seam
        if not any(abs(math.remainder(a - b, 2.0 * math.pi)) < 1e-10 for b in out):
            out.append(a)
    return [RayDirection(a) for a in out]


def _check_sector(req: LateralSumRequest) -> float:
    th = angle_of(req.theta)
    if not sector_check(req.t, th, req.p, req.q, req.eps_tilde, req.r):
        raise SectorError(
            f"t={complex(req.t)} outside the sector around direction {th:.6g} "
            f"for (p, q)=({req.p}, {req.q})")
    order, ok = growth_certificate(req.datum, req.p, req.q)
    if not ok:
        raise GrowthViolationError(f"datum growth order {order} not admissible")
    return unwrap_near(cmath.phase(complex(req.t)), normalize_angle(th))


def _ray_with_clearance(req: LateralSumRequest, angle: float) -> Ray:
    ray = Ray(0j, RayDirection(angle))
    for s in singular_points(req.datum, req.z, req.p, req.q):
        if ray.distance_to(s) < req.clearance:
            raise RayHitsSingularityError(
                f"integration ray at angle {angle:.6g} passes within {req.clearance} of {s}")
    return ray


def _copy_envelopes(req: LateralSumRequest, ray: Ray, rotations) -> tuple[float, float]:
    amp, deg = 0.0, 0.0
    datum = req.datum
    for rot in rotations:
        if datum.z0 is None:
            dist = 1.0
        else:
            dist = ray.distance_to((datum.z0 - complex(req.z)) / rot)
        a, d = datum.envelope(complex(req.z), max(dist, req.clearance))
        amp += a
        deg = max(deg, d)
    return amp, deg


def lateral_sum_heat(req: LateralSumRequest) -> QuadratureResult:
    """Heat-equation lateral sum in direction ``req.theta``."""
    if (req.p, req.q) != (1, 2):
        raise ValidationError("the heat lateral sum needs (p, q) = (1, 2)")
    arg_t = _check_sector(req)
    theta = normalize_angle(angle_of(req.theta))
    kernel = HeatKernel(complex(req.t), arg_t)
    ray = _ray_with_clearance(req, 0.5 * theta)
    z = complex(req.z)
    datum = req.datum

    def f(s):
        return (datum.continued(z + s, z) + datum.continued(z - s, z)) * kernel(s)

    amp, deg = _copy_envelopes(req, ray, (1.0, -1.0))
    kd = kernel.decay(0j, ray.direction.angle, deg)
    decay = DecayBound(kd.amplitude * amp, kd.rate, 2.0, deg)
    return integrate_ray(f, ray, req.settings, decay)


def lateral_sum_general(req: LateralSumRequest) -> QuadratureResult:
    """Lateral sum of ``d_t^p u = d_z^q u`` with the Ecalle kernel ``C_{q/p}``."""
    arg_t = _check_sector(req)
    theta = normalize_angle(angle_of(req.theta))
    kernel = EcalleKernel(complex(req.t), req.p, req.q, arg_t, req.kernel_spec, req.decay_model)
    ray = _ray_with_clearance(req, theta * req.p / req.q)
    z = complex(req.z)
    datum = req.datum
    rots = [cmath.exp(2j * math.pi * l / req.q) for l in range(req.q)]

    def f(s):
        acc = datum.continued(z + s, z)
        for w in rots[1:]:
            acc = acc + datum.continued(z + w * s, z)
        return acc * kernel(s)

    amp, deg = _copy_envelopes(req, ray, rots)
    kd = kernel.decay(0j, ray.direction.angle, deg)
    decay = DecayBound(kd.amplitude * amp, kd.rate, kd.power, deg)
    return integrate_ray(f, ray, req.settings, decay, radius_multiplier=kernel.radius_multiplier)


def lateral_sum(req: LateralSumRequest, prefer_heat: bool = True) -> QuadratureResult:
    """Dispatch to the heat form for ``(1, 2)`` (unless disabled) and the general form otherwise."""
    if (req.p, req.q) == (1, 2) and prefer_heat:
        return lateral_sum_heat(req)
    return lateral_sum_general(req)
