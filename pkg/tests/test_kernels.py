from __future__ import annotations

import cmath
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from heatstokes.errors import NoConvergenceError, OffRayError
from heatstokes.kernels import (EcalleKernel, EcalleKernelSpec, GaussianDerivativeRequest,
                                HeatKernel, ecalle_kernel, gaussian_derivative, heat_kernel,
                                heaviside_ray, is_nonpositive_integer, reciprocal_gamma)
from oracles import ecalle_series_mp, gaussian_derivative_fd


# reciprocal Gamma

def test_reciprocal_gamma_examples():
    assert reciprocal_gamma(1.0) == pytest.approx(1.0, abs=1e-15)
    assert reciprocal_gamma(0.0) == 0.0
    assert reciprocal_gamma(-3.0) == 0.0
    assert abs(reciprocal_gamma(-1.5) - 3 / (4 * math.sqrt(math.pi))) < 1e-14


@given(st.floats(-6, 6).filter(lambda x: abs(x - round(x)) > 1e-3),
       st.floats(-2, 2))
def test_reflection_identity(x, y):
    z = complex(x, y)
    lhs = reciprocal_gamma(z) * reciprocal_gamma(1 - z)
    rhs = cmath.sin(math.pi * z) / math.pi
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(rhs))


@given(st.floats(-20, 20), st.floats(-3, 3))
def test_reciprocal_gamma_vs_mpmath(x, y):
    z = complex(x, y)
    ref = complex(mp.rgamma(mp.mpc(x, y)))
    assert abs(reciprocal_gamma(z) - ref) <= 1e-12 * max(1.0, abs(ref))


def test_integrality_test():
    assert is_nonpositive_integer(-2 + 1e-13)
    assert not is_nonpositive_integer(-2 + 1e-9)
    assert not is_nonpositive_integer(1.0)


# Ecalle kernel

def test_ecalle_examples():
    assert abs(ecalle_kernel(2.0, 0.0) - 1 / math.sqrt(math.pi)) < 1e-15
    assert abs(ecalle_kernel(2.0, 1.0) - math.exp(-0.25) / math.sqrt(math.pi)) < 1e-15
    assert abs(ecalle_kernel(3.0, 0.0) - 1 / math.gamma(2 / 3)) < 1e-15


def test_c2_identity_grid():
    rng = np.random.default_rng(7)
    tau = 5 * np.sqrt(rng.random(100)) * np.exp(2j * np.pi * rng.random(100))
    val = ecalle_kernel(2.0, tau)
    ref = np.exp(-tau * tau / 4) / math.sqrt(math.pi)
    assert np.max(np.abs(val - ref)) <= 1e-10


@pytest.mark.parametrize("alpha", [1.5, 3.0, 4.0, 2.5])
@pytest.mark.parametrize("m", [0, 2])
def test_ecalle_vs_multiprecision(alpha, m):
    beta = alpha / (alpha - 1)
    for r in (0.3, 2.0, 6.0, 12.0):
        for ph in (0.0, 0.3, -0.25 * math.pi / beta):
            tau = r * cmath.exp(1j * ph)
            ref = ecalle_series_mp(alpha, tau, m)
            val = complex(ecalle_kernel(EcalleKernelSpec(alpha), tau, m))
            assert abs(val - ref) <= 1e-11 * max(abs(ref), 1e-3 * math.exp(-abs(tau)))


def test_series_route_raises_beyond_working_radius():
    with pytest.raises(NoConvergenceError):
        ecalle_kernel(EcalleKernelSpec(3.0, method="series"), 25.0)


def test_series_and_contour_routes_agree():
    for tau in (1.5, 3.0 + 1.0j, 4.0):
        a = ecalle_kernel(EcalleKernelSpec(3.0, method="series"), tau)
        b = ecalle_kernel(EcalleKernelSpec(3.0, method="contour"), tau)
        assert abs(a - b) <= 1e-11 * abs(a)
    for tau in (1.5, 3.0 + 1.0j):
        a = ecalle_kernel(EcalleKernelSpec(1.5, method="series"), tau)
        b = ecalle_kernel(EcalleKernelSpec(1.5, method="contour"), tau)
        assert abs(a - b) <= 1e-10 * abs(a)


@pytest.mark.parametrize("tau", [4.0, 6.0 + 1.0j])
def test_contour_vs_multiprecision_series_alpha_three_halves(tau):
    # double-precision series cancels here; the mpmath series does not
    ref = ecalle_series_mp(1.5, tau)
    val = ecalle_kernel(EcalleKernelSpec(1.5, method="contour"), tau)
    assert abs(val - ref) <= 1e-12 * abs(ref)


def test_vanishing_terms_are_exact_zeros():
    # alpha = 3: 1 - (n+1)/3 is a nonpositive integer for n = 2, 5, 8, ...
    for n in (2, 5, 8, 11):
        assert reciprocal_gamma(1 - (n + 1) / 3) == 0.0


def test_spec_validation():
    with pytest.raises(ValueError):
        EcalleKernelSpec(1.0)
    with pytest.raises(ValueError):
        EcalleKernelSpec(2.0, max_terms=0)


# heat kernel and Gaussian derivatives

def test_heat_kernel_examples():
    assert abs(heat_kernel(1 / (4 * math.pi), 0.0) - 1.0) < 1e-15
    assert abs(heat_kernel(0.25, 1.0) - math.exp(-1) / math.sqrt(math.pi)) < 1e-15
    ref = cmath.exp(-0.25j * math.pi) / math.sqrt(math.pi)
    assert abs(heat_kernel(0.25j, 0.0) - ref) < 1e-15


def test_gaussian_derivative_examples():
    assert abs(gaussian_derivative(0, 0.7, 0.3) - math.exp(-0.49 / 1.2)) < 1e-15
    assert abs(gaussian_derivative(1, 0.0, 1.0)) < 1e-15
    assert abs(gaussian_derivative(GaussianDerivativeRequest(2, 0.0, 0.5)) + 1.0) < 1e-14


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 12), st.floats(-4, 4), st.floats(-1, 1),
       st.sampled_from([0.1, 0.5, 1 + 0.3j]))
def test_gaussian_derivative_vs_finite_differences(m, x, y, t):
    s = complex(x, y)
    ref = gaussian_derivative_fd(m, s, t)
    val = gaussian_derivative(m, s, t)
    scale = max(abs(ref), abs(gaussian_derivative_fd(0, s, t)) * 1e-12, 1e-300)
    assert abs(val - ref) <= 1e-6 * scale


def test_gaussian_derivative_large_argument_no_overflow():
    v = gaussian_derivative(40, 30.0, 0.1)
    assert v == 0.0 or math.isfinite(abs(v))


def test_heat_kernel_object_derivative_matches():
    k = HeatKernel(0.2)
    for m in range(6):
        ref = gaussian_derivative(m, 0.8, 0.2) / math.sqrt(4 * math.pi * 0.2)
        assert abs(k.derivative(m, 0.8) - ref) <= 1e-13 * max(1.0, abs(ref))


def test_ecalle_kernel_object_matches_heat_for_alpha_two():
    t = 0.15 * cmath.exp(0.2j)
    hk = HeatKernel(t)
    ek = EcalleKernel(t, 1, 2)
    for s in (0.3, 1.0 + 0.2j, 2.0):
        for m in (0, 1, 3):
            a, b = hk.derivative(m, s), ek.derivative(m, s)
            assert abs(a - b) <= 1e-10 * max(abs(a), 1e-8)


# Heaviside along a ray

def test_heaviside_examples():
    assert heaviside_ray(0.0, 2.0, 1.0) == 1
    assert heaviside_ray(0.0, 0.5, 1.0) == 0
    u = cmath.exp(0.25j * math.pi)
    assert heaviside_ray(math.pi / 4, math.sqrt(2) * u, u) == 1


def test_heaviside_off_ray():
    with pytest.raises(OffRayError):
        heaviside_ray(0.0, 2.0 + 0.1j, 1.0)


def test_auto_falls_back_to_contour_on_cancellation():
    # high derivatives just inside the switch radius cancel in the series
    tau = 3.162
    with pytest.raises(NoConvergenceError):
        ecalle_kernel(EcalleKernelSpec(2.0, method="series"), tau, 24)
    ref = gaussian_derivative_fd(24, tau, 1.0) / math.sqrt(math.pi)
    val = ecalle_kernel(EcalleKernelSpec(2.0), tau, 24)
    assert abs(val - ref) <= 1e-10 * abs(ref)
