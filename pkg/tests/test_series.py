from __future__ import annotations

import cmath
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from heatstokes.data import LaurentTail, Polynomial
from heatstokes.errors import AtSingularityError, GrowthViolationError, OutsideDiskError
from heatstokes.lateral import LateralSumRequest, lateral_sum_heat
from heatstokes.series import (FormalSeries, GrowthCertificate, SumParameters, accelerate,
                               classify_gevrey, decelerate, deceleration_factor, formal_solution,
                               sum_series_disk)

POLE = LaurentTail(1, (1,))
CERT0 = GrowthCertificate(0.0)


def test_formal_solution_heat_polynomial():
    fs = formal_solution(Polynomial((0, 0, 1)), Fraction(3, 10), 5)
    assert fs.coefficients[:3] == (Fraction(9, 100), Fraction(2), Fraction(0))
    assert all(c == 0 for c in fs.coefficients[2:])


def test_formal_solution_cubic_p1q3():
    fs = formal_solution(Polynomial((0, 0, 0, 1)), 0, 4, 1, 3)
    assert fs.coefficients == (0, 6, 0, 0, 0)


def test_formal_solution_pole():
    fs = formal_solution(POLE, 0, 12)
    assert fs.is_exact
    for n, c in enumerate(fs.coefficients):
        assert c == Fraction(-math.factorial(2 * n), math.factorial(n))


def test_formal_solution_p2q3_block_structure():
    fs = formal_solution(POLE, 0, 8, 2, 3)
    for n, c in enumerate(fs.coefficients):
        if n % 2:
            assert c == 0
        else:
            assert c == Fraction(-math.factorial(3 * n // 2), math.factorial(n))


def test_formal_solution_at_singularity():
    with pytest.raises(AtSingularityError):
        formal_solution(POLE, 1, 4)


def test_classify_gevrey_examples():
    inv = FormalSeries(tuple(Fraction(1, math.factorial(n)) for n in range(40)))
    assert classify_gevrey(inv, -1)[0]
    heat = formal_solution(POLE, 0, 39)
    holds, _, B = classify_gevrey(heat, 1)
    assert holds and abs(B - 4) < 0.3
    sq = FormalSeries(tuple(float(math.factorial(n)) ** 2 for n in range(40)))
    assert not classify_gevrey(sq, 1)[0]


def test_classify_needs_prefix():
    with pytest.raises(ValueError):
        classify_gevrey(FormalSeries((1, 2, 3)), 0)


def test_deceleration_factors():
    assert deceleration_factor(0, 1) == 1.0
    assert abs(deceleration_factor(2, 1) - 1 / 12) < 1e-16


def test_deceleration_cancellation_exact():
    g = decelerate(formal_solution(POLE, 0, 30), 1)
    assert all(isinstance(c, Fraction) and c == -1 for c in g.coefficients)


@settings(max_examples=40)
@given(st.sampled_from([0.5, 1.0, 2.0, 0.75, 3.0]),
       st.lists(st.floats(-5, 5).filter(lambda x: abs(x) > 1e-3), min_size=2, max_size=40))
def test_decelerate_inverse_identity(k, coeffs):
    g = decelerate(FormalSeries(tuple(coeffs)), k)
    back = [complex(c) * math.exp(math.lgamma(1 + n * (k + 1) / k) - math.lgamma(1 + n))
            for n, c in enumerate(g.coefficients)]
    for a, b in zip(coeffs, back):
        assert abs(a - b) <= 1e-12 * abs(a)


def test_sum_series_disk_examples():
    assert abs(sum_series_disk(FormalSeries((-1.0,) * 60), 0.5) + 2) < 1e-14
    inv = FormalSeries(tuple(1 / math.factorial(n) for n in range(40)))
    assert abs(sum_series_disk(inv, 1.0) - math.e) < 1e-14
    with pytest.raises(OutsideDiskError):
        sum_series_disk(FormalSeries((-1.0,) * 60), 0.95)


def test_sum_parameters_validation():
    from heatstokes.quadrature import RayDirection

    with pytest.raises(ValueError):
        SumParameters(0.0, RayDirection(0.0))
    with pytest.raises(ValueError):
        SumParameters(1.0, RayDirection(0.0), eps_dir=0.0)


@pytest.mark.parametrize("k", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("c", [1.0, -2.5 + 1j])
def test_accelerate_constants(k, c):
    res = accelerate(lambda s: c + 0 * s, k, 0.2, 0.1 * cmath.exp(0.1j), certificate=CERT0)
    assert abs(res.value - c) <= 1e-8 * abs(c)


def test_accelerate_linear_moment():
    # g(s) = s, k = 1: t^(-1/2) int sigma^2 exp(-sigma^2/4t)/sqrt(pi) = 2t
    from scipy import integrate

    t = 0.2
    val = accelerate(lambda s: s, 1.0, 0.0, t, certificate=CERT0).value
    ref = integrate.quad(lambda x: x * x * math.exp(-x * x / (4 * t)) / math.sqrt(math.pi),
                         0, np.inf, epsabs=1e-14)[0] / math.sqrt(t)
    assert abs(val - ref) < 1e-12 and abs(ref - 2 * t) < 1e-12


def test_accelerate_requires_certificate():
    with pytest.raises(GrowthViolationError):
        accelerate(lambda s: s, 1.0, 0.0, 0.1)
    with pytest.raises(GrowthViolationError):
        accelerate(lambda s: s, 1.0, 0.0, 0.1, certificate=GrowthCertificate(2.0))


def test_accelerate_matches_heat_at_theta_pi():
    g = lambda s: -1 / (1 - s)
    a = accelerate(g, 1.0, math.pi, -0.1, certificate=CERT0).value
    b = lateral_sum_heat(LateralSumRequest(POLE, math.pi, -0.1, 0)).value
    assert abs(a - b) <= 1e-10 * abs(b)
