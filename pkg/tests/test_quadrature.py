import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from peakwave.errors import ConvergenceError, DomainError
from peakwave.quadrature import (
    EllipticModulus,
    QuadResult,
    adaptive_quad,
    elliptic_E,
    elliptic_K,
    integrate_endpoint_singular,
)


@given(st.floats(0.0, 0.999))
def test_elliptic_against_scipy(k):
    # scipy uses the parameter m = k^2
    assert elliptic_K(k) == pytest.approx(special.ellipk(k * k), rel=1e-14)
    assert elliptic_E(k) == pytest.approx(special.ellipe(k * k), rel=1e-14)


@pytest.mark.parametrize("kp", [1e-3, 1e-6, 1e-10, 1e-14])
def test_elliptic_near_unit_modulus_with_complement(kp):
    mpmath.mp.dps = 40
    k = float(mpmath.sqrt(1 - mpmath.mpf(kp) ** 2))
    m = 1 - mpmath.mpf(kp) ** 2
    assert elliptic_K(k, kp) == pytest.approx(float(mpmath.ellipk(m)), rel=1e-14)
    assert elliptic_E(k, kp) == pytest.approx(float(mpmath.ellipe(m)), rel=1e-14)


def test_elliptic_special_values():
    assert elliptic_K(0.0) == pytest.approx(math.pi / 2, abs=1e-16)
    assert elliptic_E(0.0) == pytest.approx(math.pi / 2, abs=1e-16)
    assert elliptic_E(1.0) == 1.0
    with pytest.raises(DomainError):
        elliptic_K(1.0)
    with pytest.raises(DomainError):
        elliptic_E(1.5)
    with pytest.raises(DomainError):
        EllipticModulus(-0.1)


@given(st.floats(0.01, 0.99))
def test_legendre_relation(k):
    kp = math.sqrt(1 - k * k)
    lhs = (elliptic_E(k) * elliptic_K(kp) + elliptic_E(kp) * elliptic_K(k)
           - elliptic_K(k) * elliptic_K(kp))
    assert lhs == pytest.approx(math.pi / 2, rel=1e-13)


def test_adaptive_quad_smooth_and_peaky():
    r = adaptive_quad(np.exp, 0.0, 1.0)
    assert r.value == pytest.approx(math.e - 1, abs=1e-14)
    assert r.abs_error_estimate >= 0 and r.evaluations > 0
    peak = lambda x: 1.0 / (1e-4 + (x - 0.3) ** 2)  # noqa: E731
    ref, _ = integrate.quad(peak, 0, 1, points=[0.3], epsabs=1e-13, limit=200)
    assert adaptive_quad(peak, 0.0, 1.0, tol=1e-10).value == pytest.approx(ref, rel=1e-11)


def test_adaptive_quad_errors():
    with pytest.raises(DomainError):
        adaptive_quad(np.sin, 1.0, 0.0)
    with pytest.raises(ConvergenceError):
        adaptive_quad(lambda x: 1.0 / x, 0.0, 1.0)
    with pytest.raises(ConvergenceError) as info:
        adaptive_quad(lambda x: np.abs(x - 0.3) ** -0.9, 0.0, 1.0, max_evaluations=3000)
    assert info.value.estimate is not None
    with pytest.raises(ValueError):
        QuadResult(1.0, -1.0, 3)


def test_endpoint_singular_both_ends():
    r = integrate_endpoint_singular(lambda x: 1.0 / np.sqrt(1 - x * x), -1.0, 1.0)
    assert r.value == pytest.approx(math.pi, abs=1e-12)
    r = integrate_endpoint_singular(lambda x: np.cos(x), -1.0, 1.0, factored=True)
    assert r.value == pytest.approx(math.pi * special.j0(1.0), abs=1e-13)


@pytest.mark.parametrize("left", [True, False])
def test_endpoint_singular_one_end(left):
    # int_0^1 e^x / sqrt(x) dx = sqrt(pi) erfi(1); the mirror image for the right end
    ends = (True, False) if left else (False, True)
    # the factored form divides only by the square root at the flagged end
    if left:
        f, h = (lambda x: np.exp(x) / np.sqrt(x)), np.exp
    else:
        f, h = (lambda x: np.exp(1 - x) / np.sqrt(1 - x)), (lambda x: np.exp(1 - x))
    ref = math.sqrt(math.pi) * float(special.erfi(1.0))
    assert integrate_endpoint_singular(f, 0.0, 1.0, ends).value == pytest.approx(ref, rel=1e-11)
    assert integrate_endpoint_singular(h, 0.0, 1.0, ends, factored=True).value == pytest.approx(ref, rel=1e-12)


@settings(max_examples=30)
@given(st.floats(-3, 3), st.floats(0.1, 4))
def test_endpoint_singular_against_scipy_weight(a, width):
    b = a + width
    f = lambda x: np.cos(x) ** 2 + x  # noqa: E731
    ref, _ = integrate.quad(f, a, b, weight="alg", wvar=(-0.5, -0.5), epsabs=1e-14)
    got = integrate_endpoint_singular(f, a, b, factored=True).value
    assert got == pytest.approx(ref, rel=1e-11, abs=1e-12)
