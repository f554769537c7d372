"""Fourier multipliers of the finite-depth nonlocal model and the Babenko residual.

Symbols at integer (or real) wavenumber n, depth h > 0 or h = inf:

    T_h^{-1}:  -i coth(h n)                 (0 at n = 0)
    K_h:        n coth(h n)                 (0 at n = 0), K_h = T_h^{-1} d/du
    Hilbert:    i sgn(n)
    K~_h:       n coth(h n) - 1/h           (0 at n = 0)
    T~_h^{-1}: -i (coth(h n) - 1/(h n))     (0 at n = 0)
    ILW K_h:    n coth(h n), with 1/h at n = 0
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError
from .fourier import wavenumbers

__all__ = [
    "SymbolOperator",
    "coth",
    "x_coth_x_minus_one",
    "T_inv",
    "K",
    "hilbert",
    "tilde_K",
    "tilde_T_inv",
    "ilw_K",
    "apply_symbol",
    "babenko_residual",
    "nonlocal_rhs",
    "nonlocal_lhs_operator",
    "momentum_flux_integrand",
    "linear_frequency",
    "scaled_linear_frequency",
]

COTH_SERIES_SWITCH = 1e-2
_COTH_EXP_SWITCH = 20.0
_XCOTH_SWITCH = 0.05


def coth(x):
    """Hyperbolic cotangent, overflow-free for large |x| and series-based for small |x|."""
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    out = np.empty_like(x)
    small = ax < COTH_SERIES_SWITCH
    xs = ax[small]
    out[small] = 1.0 / xs + xs / 3.0 - xs ** 3 / 45.0
    mid = ~small & (ax <= _COTH_EXP_SWITCH)
    out[mid] = 1.0 + 2.0 / np.expm1(2.0 * ax[mid])
    big = ax > _COTH_EXP_SWITCH
    e = np.exp(-2.0 * ax[big])
    out[big] = 1.0 + 2.0 * e / (1.0 - e)
    out = np.sign(x) * out
    return out if out.ndim else float(out)


def x_coth_x_minus_one(x):
    """x coth(x) - 1 without cancellation near x = 0 (even in x)."""
    x = np.abs(np.asarray(x, dtype=float))
    out = np.empty_like(x)
    small = x < _XCOTH_SWITCH
    z = x[small] ** 2
    out[small] = z * (1.0 / 3.0 + z * (-1.0 / 45.0 + z * (2.0 / 945.0
                                                        + z * (-1.0 / 4725.0 + z * 2.0 / 93555.0))))
    out[~small] = x[~small] * coth(x[~small]) - 1.0
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class SymbolOperator:
    """Immutable Fourier multiplier: ``scale`` times the named base symbol at depth ``h``."""

    name: str
    h: float
    key: str
    scale: float = 1.0

    def __call__(self, n):
        """Symbol values at (integer or real) wavenumbers n."""
        return self.scale * _SYMBOLS[self.key](np.atleast_1d(np.asarray(n, dtype=float)), self.h)

    def scaled(self, factor: float, name: str | None = None) -> "SymbolOperator":
        return SymbolOperator(name or f"{factor:g}*{self.name}", self.h, self.key,
                              self.scale * factor)

    def on_grid(self, N: int) -> np.ndarray:
        """Symbol in numpy FFT order for an N-point grid (cached per (h, N))."""
        base = _cached_symbol(self.key, self.h, N)
        if self.scale == 1.0:
            return base
        out = self.scale * base
        out.setflags(write=False)
        return out


def _check_depth(h):
    if not (h > 0):
        raise DomainError(f"depth must be positive or inf, got {h!r}")


def _sym_T_inv(n, h):
    out = np.zeros(n.shape, dtype=complex)
    nz = n != 0
    out[nz] = -1j * (np.sign(n[nz]) if math.isinf(h) else coth(h * n[nz]))
    return out


def _sym_K(n, h):
    out = np.zeros(n.shape, dtype=complex)
    nz = n != 0
    out[nz] = np.abs(n[nz]) if math.isinf(h) else n[nz] * coth(h * n[nz])
    return out


def _sym_hilbert(n, h):
    return 1j * np.sign(n).astype(complex)


def _sym_tilde_K(n, h):
    out = np.zeros(n.shape, dtype=complex)
    nz = n != 0
    out[nz] = x_coth_x_minus_one(h * n[nz]) / h
    return out


def _sym_tilde_T_inv(n, h):
    out = np.zeros(n.shape, dtype=complex)
    nz = n != 0
    x = h * n[nz]
    out[nz] = -1j * x_coth_x_minus_one(x) / x
    return out


def _sym_ilw_K(n, h):
    out = _sym_K(n, h)
    out[n == 0] = 1.0 / h
    return out


_SYMBOLS = {
    "T_inv": _sym_T_inv,
    "K": _sym_K,
    "hilbert": _sym_hilbert,
    "tilde_K": _sym_tilde_K,
    "tilde_T_inv": _sym_tilde_T_inv,
    "ilw_K": _sym_ilw_K,
}


@lru_cache(maxsize=256)
def _cached_symbol(name: str, h: float, N: int) -> np.ndarray:
    sym = _SYMBOLS[name](wavenumbers(N), h)
    if N % 2 == 0:
        # a lone Nyquist coefficient has no conjugate partner; keep the real part
        sym[N // 2] = sym[N // 2].real
    sym.setflags(write=False)
    return sym


def _make(name, h):
    _check_depth(h)
    return SymbolOperator(name, float(h), name)


def T_inv(h: float) -> SymbolOperator:
    return _make("T_inv", h)


def K(h: float) -> SymbolOperator:
    return _make("K", h)


def hilbert() -> SymbolOperator:
    return SymbolOperator("hilbert", math.inf, "hilbert")


def tilde_K(h: float) -> SymbolOperator:
    """K_h with the constant 1/h removed from every nonzero mode."""
    if math.isinf(h):
        raise DomainError("tilde_K requires finite depth")
    return _make("tilde_K", h)


def tilde_T_inv(h: float) -> SymbolOperator:
    if math.isinf(h):
        raise DomainError("tilde_T_inv requires finite depth")
    return _make("tilde_T_inv", h)


def ilw_K(h: float) -> SymbolOperator:
    """Operator of the intermediate long-wave equation; unlike K_h it is 1/h on the mean."""
    if math.isinf(h):
        raise DomainError("ilw_K requires finite depth")
    return _make("ilw_K", h)


def apply_symbol(op: SymbolOperator, f) -> np.ndarray:
    """Apply a multiplier to a real periodic grid function by FFT."""
    f = np.asarray(f, dtype=float)
    out = np.fft.ifft(op.on_grid(f.size) * np.fft.fft(f))
    return out.real


def babenko_residual(eta, c: float, h: float) -> np.ndarray:
    """(c^2 K_h - 1) eta - K_h(eta^2) / 2 - eta K_h eta."""
    eta = np.asarray(eta, dtype=float)
    k = K(h)
    Keta = apply_symbol(k, eta)
    return c * c * Keta - eta - 0.5 * apply_symbol(k, eta * eta) - eta * Keta


def nonlocal_rhs(eta, c: float, h: float) -> np.ndarray:
    """Right side of 2c T_h^{-1} eta_t = (c^2 K_h - 1) eta - eta K_h eta - K_h(eta^2) / 2."""
    return babenko_residual(eta, c, h)


def nonlocal_lhs_operator(c: float, h: float) -> SymbolOperator:
    """The operator 2c T_h^{-1} acting on eta_t."""
    return T_inv(h).scaled(2.0 * c, "2c*T_inv")


def momentum_flux_integrand(eta, c: float, h: float) -> np.ndarray:
    """Integrand of c d/dt int eta K_h eta du for the nonlocal model.

        c^2 eta K eta_u - eta eta_u - eta eta_u K eta - eta^2 K eta_u - eta (K eta) eta_u

    Its integral over a period vanishes for any smooth eta by self-adjointness of K_h.
    """
    eta = np.asarray(eta, dtype=float)
    n = wavenumbers(eta.size)
    if eta.size % 2 == 0:
        n[eta.size // 2] = 0.0
    eta_u = np.fft.ifft(1j * n * np.fft.fft(eta)).real
    k = K(h)
    Keta = apply_symbol(k, eta)
    Keta_u = apply_symbol(k, eta_u)
    return (c * c * eta * Keta_u - eta * eta_u - eta * eta_u * Keta
            - eta * eta * Keta_u - eta * Keta * eta_u)


def linear_frequency(n, c: float, h: float, tilde: bool = True):
    """omega(n) of eta = exp(i(n u - omega t)) for the linearization about eta = 0.

    From 2c S_T(n) (-i omega) = c^2 S_K(n) - 1 with S_T, S_K the symbols of
    T^{-1} and K (tilde variants by default).
    """
    n = np.asarray(n, dtype=float)
    opT, opK = (tilde_T_inv(h), tilde_K(h)) if tilde else (T_inv(h), K(h))
    return ((c * c * opK(n) - 1.0) / (2.0 * c * opT(n) * (-1j))).real


def scaled_linear_frequency(n_tilde, c_tilde: float, h: float):
    """Linear frequency in the long-wave variables u = u~/sqrt(3), t = sqrt(h/3) t~, c = c~/sqrt(h).

    As h -> 0 this tends to -(c~^2 n~^2 - 1) / (2 c~ n~), the frequency of
    the local model linearized about zero.
    """
    n = math.sqrt(3.0) * np.asarray(n_tilde, dtype=float)
    c = c_tilde / math.sqrt(h)
    return linear_frequency(n, c, h) * math.sqrt(h) / math.sqrt(3.0)
