import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, special

from multitile.bessel import EULER_GAMMA, bessel_k0, k0, quadratic_form_bessel
from multitile.selftest import bessel_quadrature


def test_value_at_one():
    assert bessel_k0(1.0).value == pytest.approx(0.421024, abs=1e-6)


@pytest.mark.parametrize("s", [0.5, 1.0, 2.0, 5.0])
def test_matches_defining_integral(s):
    assert bessel_k0(s).value == pytest.approx(bessel_quadrature(s), abs=1e-6)


def test_small_argument_expansion():
    s = 1e-3
    assert abs(bessel_k0(s).value - (math.log(1 / s) + math.log(2) - EULER_GAMMA)) <= 1e-5
    # the residual shrinks like s^2 log s
    r = [abs(bessel_k0(x).value - (math.log(1 / x) + math.log(2) - EULER_GAMMA)) for x in (1e-2, 1e-3)]
    assert r[1] < r[0] / 50


def test_monotone_and_branches():
    assert bessel_k0(1).value > bessel_k0(2).value > bessel_k0(3).value
    assert bessel_k0(1.0).branch == "series" and bessel_k0(3.0).branch == "integral"
    with pytest.raises(ValueError):
        bessel_k0(0.0)
    with pytest.raises(ValueError):
        bessel_k0(float("nan"))


@pytest.mark.parametrize("s", [0.5, 1.0, 2.0, 5.0])
def test_ode_residual(s):
    h = 1e-4
    f = lambda x: bessel_k0(x).value  # noqa: E731
    d1 = (f(s + h) - f(s - h)) / (2 * h)
    d2 = (f(s + h) - 2 * f(s) + f(s - h)) / h**2
    assert abs(d2 + d1 / s - f(s)) <= 1e-6


@given(st.floats(1e-6, 600.0))
def test_agrees_with_scipy(s):
    assert bessel_k0(s).value == pytest.approx(special.k0(s), rel=1e-12, abs=1e-300)


def test_continuity_at_branch_switch():
    a, b = bessel_k0(2.0 - 1e-12).value, bessel_k0(2.0 + 1e-12).value
    assert abs(a - b) < 1e-12


def test_vectorised_wrapper():
    xs = np.array([0.1, 1.0, 10.0])
    np.testing.assert_allclose(k0(xs), special.k0(xs), rtol=1e-12)
    assert isinstance(k0(1.0), float)


def test_quadratic_form_reduces_to_k0():
    assert quadratic_form_bessel(1, 0, 1, 1, 1, 0) == pytest.approx(bessel_k0(1).value, rel=1e-15)


def test_l_triomino_form():
    eps, s, t = 1e-2, 3, -1
    arg = (2 / math.sqrt(3)) * math.sqrt(eps * (s * s + s * t + t * t))
    assert quadratic_form_bessel(1, -1, 1, eps, s, t) == pytest.approx(bessel_k0(arg).value * 2 / math.sqrt(3), rel=1e-14)


def test_quadratic_form_matches_2d_quadrature():
    """(1/2pi) iint e^{i(sx+ty)} / (eps + a x^2 + b xy + c y^2), integrating y in closed form."""
    a, b, c, eps, s, t = 2.0, 1.0, 3.0, 0.5, 2.0, 1.0
    # complete the square in y: c (y + b x / 2c)^2 + (a - b^2/4c) x^2 + eps; the y-integral is
    # (pi / sqrt(c m)) exp(-|t| sqrt(m / c)) e^{-i t b x / 2c} with m = eps + (a - b^2/4c) x^2
    def integrand(x):
        m = eps + (a - b * b / (4 * c)) * x * x
        return math.pi / math.sqrt(c * m) * math.exp(-abs(t) * math.sqrt(m / c)) * math.cos((s - t * b / (2 * c)) * x)

    val, _ = integrate.quad(integrand, -np.inf, np.inf, limit=400, epsabs=1e-12)
    assert quadratic_form_bessel(a, b, c, eps, s, t) == pytest.approx(val / (2 * math.pi), abs=1e-6)


def test_quadratic_form_validation():
    with pytest.raises(ValueError):
        quadratic_form_bessel(1, 3, 1, 1, 1, 0)
    with pytest.raises(ValueError):
        quadratic_form_bessel(1, 0, 1, 0, 1, 0)
    with pytest.raises(ValueError):
        quadratic_form_bessel(1, 0, 1, 1, 0, 0)
