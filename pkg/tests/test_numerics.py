import math

import numpy as np
import pytest

from mcmc_certify.errors import BracketError, IntegrationError
from mcmc_certify.numerics import (Interval, Tolerance, find_root, integrate,
                                   minimize_scalar, normal_cdf, normal_pdf)

TIGHT = Tolerance(abs_tol=1e-13, rel_tol=1e-12)


def test_interval_validation():
    with pytest.raises(ValueError):
        Interval(1.0, 1.0)
    with pytest.raises(ValueError):
        Interval(2.0, 1.0)
    assert Interval(0.0, 1.0).width == 1.0


def test_tolerance_validation():
    with pytest.raises(ValueError):
        Tolerance(abs_tol=-1.0, rel_tol=1e-9)
    with pytest.raises(ValueError):
        Tolerance(abs_tol=1e-9, rel_tol=1e-9, max_iter=0)


# reference values computed with mpmath at 40 digits
NCDF_CASES = [
    (-0.5, 0.3085375387259869),
    (0.0, 0.5),
    (1.0, 0.84134474606854295),
    (-1.96, 0.024997895148220434),
    (2.5, 0.99379033467422386),
]


@pytest.mark.parametrize("z,ref", NCDF_CASES)
def test_normal_cdf_reference(z, ref):
    assert normal_cdf(z) == pytest.approx(ref, rel=1e-14)


def test_normal_cdf_symmetry():
    for z in np.linspace(-6.0, 6.0, 41):
        assert normal_cdf(z) + normal_cdf(-z) == pytest.approx(1.0, abs=1e-14)


def test_normal_pdf_reference():
    assert normal_pdf(0.0) == pytest.approx(0.39894228040143268, rel=1e-15)
    assert normal_pdf(1.0) == pytest.approx(0.24197072451914335, rel=1e-15)


def test_integrate_polynomial():
    v = integrate(lambda x: x * x, Interval(0.0, 1.0), TIGHT)
    assert v == pytest.approx(1.0 / 3.0, rel=1e-12)


def test_integrate_sine():
    v = integrate(math.sin, Interval(0.0, math.pi), TIGHT)
    assert v == pytest.approx(2.0, rel=1e-12)


def test_integrate_narrow_peak():
    # regression: a peak a few panel-widths wide (panel = span/64) must be
    # caught by the seeded panel pass and refined, even though it is
    # invisible to whole-interval probes; anything much narrower than a
    # panel is outside the integrator's contract
    s = 0.5

    def f(x):
        z = (x - 25.3) / s
        return math.exp(-0.5 * z * z) / (s * math.sqrt(2.0 * math.pi))

    v = integrate(f, Interval(0.0, 50.0), TIGHT)
    assert v == pytest.approx(1.0, abs=1e-9)


def test_integrate_budget_exhaustion_carries_partial():
    tol = Tolerance(abs_tol=1e-300, rel_tol=1e-14, max_iter=8)
    with pytest.raises(IntegrationError) as err:
        integrate(lambda x: math.exp(-x * x), Interval(0.0, 20.0), tol)
    assert math.isfinite(err.value.estimate)


def test_find_root_cosine():
    r = find_root(math.cos, Interval(0.0, 2.0), TIGHT)
    assert r == pytest.approx(math.pi / 2.0, abs=1e-12)


def test_find_root_requires_sign_change():
    with pytest.raises(BracketError):
        find_root(lambda x: 1.0 + x * x, Interval(-1.0, 1.0), TIGHT)


def test_minimize_quadratic():
    x, v = minimize_scalar(lambda x: (x - 0.37) ** 2 + 1.0,
                           Interval(0.0, 1.0), TIGHT)
    # golden section converges in value, so position accuracy is only
    # about sqrt(value tolerance)
    assert x == pytest.approx(0.37, abs=1e-6)
    assert v == pytest.approx(1.0, abs=1e-12)


def test_minimize_flat_bottomed():
    # quartic bottoms are hard for curvature-based stops; golden section
    # should still land within the absolute tolerance
    x, _ = minimize_scalar(lambda x: (x - 0.5) ** 4, Interval(0.0, 1.0),
                           Tolerance(abs_tol=1e-6, rel_tol=0.0,
                                     max_iter=10_000))
    assert x == pytest.approx(0.5, abs=1e-3)


def test_minimize_boundary_minimum():
    x, v = minimize_scalar(lambda x: x, Interval(0.0, 1.0), TIGHT)
    assert x == pytest.approx(0.0, abs=1e-6)
    assert v == pytest.approx(0.0, abs=1e-6)
