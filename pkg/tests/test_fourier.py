import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from peakwave.fourier import (
    differentiation_matrix,
    periodic_mean_integral,
    spectral_derivative,
    wavenumbers,
)


def grid(n):
    return -math.pi + 2 * math.pi * np.arange(n) / n


def test_wavenumbers_order():
    assert list(wavenumbers(6)) == [0, 1, 2, -3, -2, -1]


@given(st.integers(8, 64), st.integers(1, 3))
def test_spectral_derivative_exact_for_trig(n, k):
    u = grid(n)
    if k >= n // 2:
        return
    assert np.allclose(spectral_derivative(np.sin(k * u)), k * np.cos(k * u), atol=1e-11)
    assert np.allclose(spectral_derivative(np.sin(k * u), 2), -k * k * np.sin(k * u), atol=1e-10)


@pytest.mark.parametrize("n", [16, 17, 32, 33])
def test_matrix_matches_fft_and_is_skew(n):
    D = differentiation_matrix(n)
    f = np.exp(np.sin(grid(n)))
    assert np.allclose(D, -D.T, atol=1e-13)
    assert np.allclose(D @ f, spectral_derivative(f), atol=1e-11)


def test_periodic_mean_integral():
    u = grid(32)
    assert periodic_mean_integral(np.cos(u) ** 2) == pytest.approx(math.pi, abs=1e-14)
