"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class HeatStokesError(Exception):
    """Base class for every error raised by the package."""


class NonFiniteError(HeatStokesError):
    """An integrand or kernel produced NaN or infinity."""


class NoConvergenceError(HeatStokesError):
    """A series or adaptive scheme exhausted its budget above tolerance."""


class TruncationError(HeatStokesError):
    """The tail of a semi-infinite integral could not be bounded."""


class OffRayError(HeatStokesError):
    """A point expected on a ray line is not collinear with it."""


class AtSingularityError(HeatStokesError):
    """Evaluation requested at the singular point of a datum."""


class OutsideDomainError(HeatStokesError):
    """Evaluation requested where a series representation diverges."""


class UnsupportedError(HeatStokesError):
    """Operation not defined for this datum variant."""


class OutsideDiskError(HeatStokesError):
    """Series evaluation requested outside its safe disk of convergence."""


class GrowthViolationError(HeatStokesError):
    """A growth certificate is missing or too weak for the kernel decay."""


class RayHitsSingularityError(HeatStokesError):
    """An integration ray passes too close to a singular point."""


class SectorError(HeatStokesError):
    """A time value lies outside the admissible summation sector."""


class ParseError(HeatStokesError):
    """A scenario file could not be parsed."""


class ValidationError(HeatStokesError):
    """A scenario violates a documented invariant."""
