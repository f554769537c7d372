"""Small Fourier helpers for 2 pi periodic grid functions on [-pi, pi)."""

from __future__ import annotations

import numpy as np


def wavenumbers(n: int) -> np.ndarray:
    """Integer wavenumbers in numpy FFT order."""
    return np.fft.fftfreq(n, 1.0 / n)


def spectral_derivative(f, order: int = 1) -> np.ndarray:
    """Derivative of a real periodic sample vector; odd orders drop the Nyquist mode."""
    f = np.asarray(f, dtype=float)
    k = wavenumbers(f.size)
    if order % 2 == 1 and f.size % 2 == 0:
        k[f.size // 2] = 0.0
    return np.fft.ifft((1j * k) ** order * np.fft.fft(f)).real


def periodic_mean_integral(f) -> float:
    """Integral over one period by the trapezoid rule (spectrally exact for band-limited data)."""
    f = np.asarray(f, dtype=float)
    return float(2.0 * np.pi * f.mean())


def differentiation_matrix(n: int) -> np.ndarray:
    """Fourier collocation first-derivative matrix on n equispaced points of a 2 pi period.

    For even n the Nyquist mode is treated as in ``spectral_derivative`` (its
    derivative is dropped), which keeps the matrix skew-symmetric.
    """
    h = 2.0 * np.pi / n
    j = np.arange(1, n)
    col = np.zeros(n)
    if n % 2 == 0:
        col[1:] = 0.5 * (-1.0) ** j / np.tan(0.5 * j * h)
    else:
        col[1:] = 0.5 * (-1.0) ** j / np.sin(0.5 * j * h)
    idx = np.arange(n)
    return col[(idx[:, None] - idx[None, :]) % n]
