"""Resummation of divergent heat-equation series and Stokes-jump validation."""

from __future__ import annotations

__version__ = "0.1.0"
