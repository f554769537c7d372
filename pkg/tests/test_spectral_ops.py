import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from peakwave.errors import DomainError
from peakwave.spectral_ops import (
    K,
    SymbolOperator,
    T_inv,
    apply_symbol,
    babenko_residual,
    coth,
    hilbert,
    ilw_K,
    linear_frequency,
    momentum_flux_integrand,
    nonlocal_lhs_operator,
    scaled_linear_frequency,
    tilde_K,
    tilde_T_inv,
    x_coth_x_minus_one,
)

N = 64
U = 2 * math.pi * np.arange(N) / N


def trig(coef):
    n = np.arange(1, coef.size + 1)
    return np.cos(np.outer(U, n)) @ coef + np.sin(np.outer(U, n)) @ coef[::-1]


def ip(f, g):
    return float(f @ g) * 2 * math.pi / N


@given(st.floats(1e-8, 30.0))
def test_coth_against_mpmath(x):
    mpmath.mp.dps = 50  # the oracle for x coth x - 1 must not cancel itself
    assert coth(x) == pytest.approx(float(mpmath.coth(x)), rel=1e-14)
    assert coth(-x) == pytest.approx(-float(mpmath.coth(x)), rel=1e-14)
    assert x_coth_x_minus_one(x) == pytest.approx(float(x * mpmath.coth(x) - 1), rel=1e-12, abs=1e-300)


def test_coth_overflow_free():
    with np.errstate(over="raise", invalid="raise", divide="raise"):
        assert coth(1e4) == 1.0
        assert coth(-800.0) == -1.0
    assert x_coth_x_minus_one(1e-9) == pytest.approx(1e-18 / 3, rel=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.05, 10.0), st.integers(0, 2 ** 31))
def test_adjointness(h, seed):
    rng = np.random.default_rng(seed)
    f, g = trig(rng.standard_normal(8)), trig(rng.standard_normal(8))
    for op in (K(h), tilde_K(h), ilw_K(h)):
        assert ip(apply_symbol(op, f), g) == pytest.approx(ip(f, apply_symbol(op, g)), abs=1e-11)
        assert ip(apply_symbol(op, f), f) >= -1e-12
    for op in (T_inv(h), tilde_T_inv(h), hilbert()):
        assert abs(ip(apply_symbol(op, f), g) + ip(f, apply_symbol(op, g))) < 1e-11


def test_symbols_on_single_modes():
    h = 0.8
    for n in (1, 3, 5):
        c, s = np.cos(n * U), np.sin(n * U)
        assert np.allclose(apply_symbol(K(h), c), n / math.tanh(h * n) * c, atol=1e-13)
        # K = T^{-1} d/du
        assert np.allclose(apply_symbol(T_inv(h), -n * s), apply_symbol(K(h), c), atol=1e-13)
    assert np.allclose(apply_symbol(hilbert(), np.cos(U)), -np.sin(U), atol=1e-14)
    assert ilw_K(h)(0)[0] == pytest.approx(1 / h)
    assert K(h)(0)[0] == 0


def test_deep_limit():
    n = np.array([-3.0, 1.0, 4.0])
    assert np.allclose(K(math.inf)(n), np.abs(n))
    assert np.allclose(T_inv(math.inf)(n), -1j * np.sign(n))
    assert np.allclose(K(50.0)(n), np.abs(n), atol=1e-12)


def test_depth_validation_and_scaling():
    with pytest.raises(DomainError):
        K(0.0)
    with pytest.raises(DomainError):
        tilde_K(math.inf)
    op = nonlocal_lhs_operator(1.5, 1.0)
    assert isinstance(op, SymbolOperator)
    assert np.allclose(op(np.array([2.0])), 3.0 * T_inv(1.0)(np.array([2.0])))
    assert not op.on_grid(16).flags.writeable


@pytest.mark.parametrize("h", [0.1, 0.01, 0.001])
def test_tilde_K_shallow_limit(h):
    n = np.arange(1.0, 6.0)
    rel = tilde_K(h)(n).real / (h * n * n / 3) - 1
    assert np.allclose(rel, -(h * n) ** 2 / 15, rtol=0.05, atol=1e-14)


def test_babenko_linearization_about_zero():
    h, c, eps = 1.0, 1.1, 1e-6
    f = np.cos(2 * U)
    lin = (c * c * apply_symbol(K(h), f) - f)
    assert np.allclose(babenko_residual(eps * f, c, h) / eps, lin, atol=1e-5)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.2, 5.0), st.floats(0.5, 2.0), st.integers(0, 2 ** 31))
def test_momentum_flux_integrates_to_zero(h, c, seed):
    f = 0.1 * trig(np.random.default_rng(seed).standard_normal(6))
    assert abs(np.sum(momentum_flux_integrand(f, c, h)) * 2 * math.pi / N) < 1e-12


def test_linear_frequency_and_scaling():
    # zero frequency where c^2 symbol(K~) = 1
    h = 1.0
    n = 2.0
    c = 1 / math.sqrt(tilde_K(h)(n)[0].real)
    assert linear_frequency(n, c, h)[0] == pytest.approx(0.0, abs=1e-14)
    ct, nt = 1.3, np.array([0.5, 1.0, 2.0])
    limit = -(ct ** 2 * nt ** 2 - 1) / (2 * ct * nt)
    errs = [np.max(np.abs(scaled_linear_frequency(nt, ct, hh) - limit)) for hh in (1e-2, 1e-3, 1e-4)]
    assert errs[0] > 50 * errs[1] > 2500 * errs[2]


def test_deep_T_inverse_matches_minus_hilbert():
    n = np.arange(-5.0, 6.0)
    assert np.max(np.abs(T_inv(50.0)(n) + hilbert()(n))) < 1e-12
