from __future__ import annotations

import cmath
import math

import pytest
from hypothesis import given, settings, strategies as st

from heatstokes.data import LaurentTail, LogBranch, Polynomial, PowerBranch
from heatstokes.errors import RayHitsSingularityError, SectorError, ValidationError
from heatstokes.lateral import (LateralSumRequest, lateral_sum, lateral_sum_general,
                                lateral_sum_heat, sector_check, singular_directions)
from heatstokes.series import formal_solution
from oracles import heat_lateral_pole_mp

POLE = LaurentTail(1, (1,))


def heat(datum, theta, t, z=0.0):
    return lateral_sum_heat(LateralSumRequest(datum, theta, t, z)).value


def general(datum, theta, t, z=0.0, p=1, q=2):
    return lateral_sum_general(LateralSumRequest(datum, theta, t, z, p, q)).value


def test_sector_check_examples():
    assert sector_check(0.1, 0.0, 1, 2, 0.1)
    assert not sector_check(0.1 * cmath.exp(1.6j), 0.0, 1, 2, 0.1)
    assert sector_check(0.1, 0.0, 1, 3, 0.1)
    assert not sector_check(1.2, 0.0, 1, 2, 0.1)


def test_heat_examples():
    assert abs(heat(Polynomial((1.0,)), 0.0, 0.1) - 1) < 1e-12
    assert abs(heat(Polynomial((0, 0, 1)), 0.0, 0.1, 0.3) - 0.29) < 1e-12


def test_pole_lateral_difference():
    t = 0.1
    d = heat(POLE, 0.3, t) - heat(POLE, -0.3, t)
    ref = -1j * math.sqrt(math.pi / t) * math.exp(-1 / (4 * t))
    assert abs(d - ref) <= 1e-10 * abs(ref)


@pytest.mark.parametrize("theta,t", [(0.3, 0.1), (-0.5, 0.2 * cmath.exp(-0.3j)),
                                     (1.0, 0.3 * cmath.exp(0.8j)), (math.pi, -0.1)])
def test_heat_pole_vs_multiprecision(theta, t):
    assert abs(heat(POLE, theta, t) - heat_lateral_pole_mp(t, theta)) < 1e-12


def test_general_examples():
    assert abs(general(Polynomial((1.0,)), 0.0, 0.2, 0, 1, 3) - 1) < 1e-10
    assert abs(general(Polynomial((0, 0, 0, 1)), 0.0, 0.1, 0, 1, 3) - 0.6) < 1e-10
    for th in (0.3, -0.4, 0.6):
        a = general(POLE, th, 0.1)
        b = heat(POLE, th, 0.1)
        assert abs(a - b) <= 1e-8 * abs(b)


@pytest.mark.parametrize("pq", [(1, 2), (1, 3), (2, 3), (1, 4), (3, 4)])
@pytest.mark.parametrize("c", [1.0, -2 + 0.5j])
def test_constant_preservation(pq, c):
    p, q = pq
    for t in (0.1, 0.3 * cmath.exp(0.2j)):
        v = lateral_sum(LateralSumRequest(Polynomial((c,)), 0.1, t, 0.1, p, q)).value
        assert abs(v - c) <= 1e-8 * abs(c)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([(1, 2), (1, 3), (2, 3), (1, 4)]),
       st.lists(st.integers(-5, 5), min_size=1, max_size=6),
       st.floats(0.05, 0.4), st.floats(-0.3, 0.3), st.floats(-0.5, 0.5))
def test_polynomial_exactness(pq, coeffs, tmod, targ, x):
    p, q = pq
    d = Polynomial(tuple(coeffs))
    t = tmod * cmath.exp(1j * targ)
    z = complex(x, 0.1)
    v = lateral_sum(LateralSumRequest(d, targ, t, z, p, q)).value
    fs = formal_solution(d, z, 3 * len(coeffs), p, q)
    ref = sum(complex(c) * t ** n for n, c in enumerate(fs.coefficients))
    assert abs(v - ref) <= 1e-8 * max(1.0, abs(ref))


def test_heat_and_general_agree_on_grid():
    for datum in (POLE, LogBranch(1.0), PowerBranch(0.5, 1.0)):
        for t in (0.1, 0.2 * cmath.exp(0.3j), 0.3):
            a = heat(datum, 0.4, t)
            b = general(datum, 0.4, t)
            assert abs(a - b) <= 1e-8 * abs(b)


def test_direction_independence_off_stokes_line():
    for t in (0.1, 0.25):
        assert abs(heat(POLE, 0.2, t) - heat(POLE, 0.4, t)) < 1e-7
        assert abs(heat(POLE, -0.2, t) - heat(POLE, -0.4, t)) < 1e-7
        assert abs(general(POLE, 0.2, t, 0, 1, 3) - general(POLE, 0.4, t, 0, 1, 3)) < 1e-7


@settings(max_examples=15, deadline=None)
@given(st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False),
       st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False))
def test_linearity_in_datum(a, b):
    d1, d2 = LaurentTail(1, (1,)), LaurentTail(1, (0, 1))
    both = LaurentTail(1, (a, b))
    t = 0.15
    lhs = heat(both, 0.3, t)
    rhs = a * heat(d1, 0.3, t) + b * heat(d2, 0.3, t)
    assert abs(lhs - rhs) <= 1e-8 * max(1.0, abs(lhs))


def test_sector_error():
    with pytest.raises(SectorError):
        heat(POLE, 0.0, 0.1 * cmath.exp(1.7j))


def test_ray_hits_singularity():
    with pytest.raises(RayHitsSingularityError):
        heat(POLE, 0.0, 0.1)
    with pytest.raises(RayHitsSingularityError):
        general(POLE, 0.0, 0.1, 0, 1, 3)


def test_request_validation():
    with pytest.raises(ValidationError):
        LateralSumRequest(POLE, 0.3, 0.1, 0, 2, 2)
    with pytest.raises(ValidationError):
        LateralSumRequest(POLE, 0.3, 0.0, 0)
    with pytest.raises(ValidationError):
        LateralSumRequest(POLE, 0.3, 0.1, 1.5)


def test_singular_directions():
    # heat: s = +1 and s = -1 both give theta = 2 arg(s) = 0 mod 2 pi
    assert [d.angle for d in singular_directions(POLE, 0, 1, 2)] == [0.0]
    # (1, 3): rotated copies at angles 0, -2pi/3, -4pi/3, times q/p = 3
    dirs3 = [d.angle for d in singular_directions(POLE, 0, 1, 3)]
    assert len(dirs3) == 1 and abs(dirs3[0]) < 1e-12
    # (2, 3), z0 = i: psi = 3 (pi/2 - 2 pi l/3 + 2 pi j)/2 gives 3pi/4 and -pi/4
    dirs23 = [d.angle for d in singular_directions(LaurentTail(1j, (1,)), 0, 2, 3)]
    assert len(dirs23) == 2
    assert abs(dirs23[0] + math.pi / 4) < 1e-12 and abs(dirs23[1] - 3 * math.pi / 4) < 1e-12
