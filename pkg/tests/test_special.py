from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bbgkz import special

mpmath.mp.dps = 30


def mp_taylor(f, order):
    return np.array([complex(c) for c in mpmath.taylor(f, 0, order)])


@pytest.mark.parametrize("k", range(0, 6))
@pytest.mark.parametrize("z", [0.5, 1.0, 1.5, 2.25, 7.0, 42.0])
def test_polygamma_against_mpmath(k, z):
    ref = float(mpmath.polygamma(k, z))
    assert special.polygamma(k, z) == pytest.approx(ref, rel=1e-13, abs=1e-15)


def test_constants_against_mpmath():
    assert special.EULER_GAMMA == pytest.approx(float(mpmath.euler), rel=1e-16)
    for k, v in special.ZETA.items():
        assert v == pytest.approx(float(mpmath.zeta(k)), rel=1e-15)
    for k, b in enumerate(special.BERNOULLI):
        assert b == Fraction(str(mpmath.bernoulli(k))) or float(b) == pytest.approx(float(mpmath.bernoulli(k)))


@given(st.floats(min_value=0.05, max_value=8.0))
@settings(max_examples=40, deadline=None)
def test_gamma_series_against_mpmath(a):
    order = 6
    got = special.gamma_series(a, order)
    ref = mp_taylor(lambda u: mpmath.gamma(a + u), order)
    assert np.allclose(got, ref, rtol=1e-11, atol=1e-12 * abs(ref).max())


@pytest.mark.parametrize("l", [Fraction(0), Fraction(2), Fraction(-1), Fraction(-3), Fraction(1, 2), Fraction(-5, 3), Fraction(7, 4)])
def test_recip_gamma_taylor_against_mpmath(l):
    order = special.MAX_ORDER
    got = special.recip_gamma_taylor(l, order)
    ref = mp_taylor(lambda u: mpmath.rgamma(1 + mpmath.mpf(l.numerator) / l.denominator + u), order)
    assert np.max(np.abs(got - ref)) <= 1e-12 * max(1.0, np.max(np.abs(ref)))


def test_recip_gamma_examples():
    # 1/Gamma(1+u) = 1 + gamma u + ...
    got = special.recip_gamma_taylor(0, 2)
    assert got[0] == 1.0 and got[1] == pytest.approx(special.EULER_GAMMA, rel=1e-15)
    # 1/Gamma(u) vanishes at 0 with unit slope
    got = special.recip_gamma_taylor(-1, 2)
    assert got[0] == 0.0 and got[1] == pytest.approx(1.0, rel=1e-15)
    # order-2 zero at l = -2
    got = special.recip_gamma_taylor(-2, 3)
    assert got[0] == 0.0 and got[1] == pytest.approx(-1.0, rel=1e-15)


def test_todd_series_exact():
    t = special.todd_series(4)
    assert t == (1, Fraction(1, 2), Fraction(1, 12), 0, Fraction(-1, 720))


@given(st.floats(min_value=0.1, max_value=6.2))
@settings(max_examples=30, deadline=None)
def test_twisted_todd_against_mpmath(theta):
    q = complex(mpmath.exp(1j * theta))
    got = special.twisted_todd_series(q, 5)
    ref = mp_taylor(lambda u: 1 / (1 - q * mpmath.exp(-u)), 5)
    assert np.allclose(got, ref, rtol=1e-11, atol=1e-11)
    with pytest.raises(ZeroDivisionError):
        special.twisted_todd_series(1.0, 3)


@given(st.lists(st.floats(min_value=-2, max_value=2), min_size=5, max_size=5))
@settings(max_examples=40)
def test_series_inverse_and_exp(coeffs):
    a = np.array(coeffs)
    a[0] = 1.0 + abs(a[0])
    inv = special.series_inv(a, 4)
    prod = special.series_mul(a, inv, 4)
    assert np.allclose(prod, [1, 0, 0, 0, 0], atol=1e-9 * (1 + np.abs(inv).max()))
    b = np.array(coeffs)
    b[0] = 0.0
    e1 = special.series_exp(b, 4)
    e2 = special.series_exp(-b, 4)
    assert np.allclose(special.series_mul(e1, e2, 4), [1, 0, 0, 0, 0], atol=1e-9 * (1 + np.abs(e1).max() * np.abs(e2).max()))


def test_order_cap():
    with pytest.raises(ValueError):
        special.recip_gamma_taylor(0, special.MAX_ORDER + 1)
