"""Conserved quantities of the local model and the mass along the smooth family.

For a 2 pi periodic profile eta(u):

    M = int eta du,   Q = int (eta')^2 du,   H = int [eta^2 + 2 eta (eta')^2] du,

and the zero-mean constraint is int [eta + (eta')^2] du = M + Q = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .fourier import spectral_derivative
from .phase_plane import (
    C_STAR,
    LevelEnergy,
    WaveProfile,
    dT_dE,
    solve_level_for_speed,
)
from .quadrature import adaptive_quad, elliptic_E, elliptic_K, integrate_endpoint_singular

__all__ = [
    "FunctionalLedger",
    "evaluate_functionals",
    "level_set_functionals",
    "mass_closed_form",
    "mass_quadrature",
    "mass_along_family",
    "mass_derivative",
    "delta_indicator",
    "delta_moments",
    "delta_decomposition",
]

QUAD_TOL = 1e-13


@dataclass(frozen=True)
class FunctionalLedger:
    M: float
    Q: float
    H: float
    zero_mean_residual: float

    @classmethod
    def from_parts(cls, M, Q, H):
        return cls(float(M), float(Q), float(H), float(M + Q))


def _grid_functionals(eta, eta_u):
    w = 2.0 * math.pi / eta.size
    M = w * math.fsum(eta)
    Q = w * math.fsum(eta_u ** 2)
    H = w * math.fsum(eta ** 2 + 2.0 * eta * eta_u ** 2)
    return FunctionalLedger.from_parts(M, Q, H)


def _piecewise_exact(p: WaveProfile, breaks, order=8):
    """Gauss-Legendre on each smooth piece; exact for piecewise polynomials of degree < 2 order."""
    x, w = np.polynomial.legendre.leggauss(order)
    M = Q = H = 0.0
    for a, b in zip(breaks[:-1], breaks[1:]):
        u = 0.5 * (a + b) + 0.5 * (b - a) * x
        ww = 0.5 * (b - a) * w
        e = p.eta_at(u)
        d = p.slope_at(u)
        M += ww @ e
        Q += ww @ d ** 2
        H += ww @ (e ** 2 + 2.0 * e * d ** 2)
    return FunctionalLedger.from_parts(M, Q, H)


def _midpoint_kinked(eta):
    """Midpoint rule on grid cells with one-sided slopes; never differentiates across a kink."""
    n = eta.size
    h = 2.0 * math.pi / n
    nxt = np.roll(eta, -1)
    mid = 0.5 * (eta + nxt)
    slope = (nxt - eta) / h
    return FunctionalLedger.from_parts(h * mid.sum(), h * (slope ** 2).sum(),
                                       h * (mid ** 2 + 2.0 * mid * slope ** 2).sum())


def level_set_functionals(L: LevelEnergy, tol: float = QUAD_TOL) -> FunctionalLedger:
    """M, Q, H of the 2 pi periodic wave on level L by quadrature along the orbit.

    On the orbit eta = s cos(phi), du = g dphi and eta' = -s sin(phi) / g, so
    each functional is twice an integral over the phase interval of the upper
    half orbit.  For singular levels the crest phase phi0 is resolved with
    phi = phi0 + tau^2, which removes the 1/g singularity there.
    """
    s = L.amplitude
    b = 2.0 * s
    c2 = L.c * L.c
    if L.E < L.E_c:
        def integrand(phi, which):
            g = np.sqrt(c2 - b * np.cos(phi))
            eta = s * np.cos(phi)
            q = (s * np.sin(phi)) ** 2 / g
            if which == 0:
                return eta * g
            if which == 1:
                return q
            return eta * eta * g + 2.0 * eta * q

        vals = [2.0 * adaptive_quad(lambda p, k=k: integrand(p, k), 0.0, math.pi, tol=tol).value
                for k in range(3)]
        return FunctionalLedger.from_parts(*vals)
    phi0 = math.acos(min(c2 / b, 1.0))
    tau_max = math.sqrt(math.pi - phi0)

    def integrand_tau(t, which):
        half = 0.5 * t * t
        phi = phi0 + t * t
        # g / t, regular at t = 0 since sin(t^2/2) / t^2 -> 1/2
        g_over_t = np.sqrt(2.0 * b * np.sin(phi0 + half) * 0.5 * np.sinc(half / math.pi))
        eta = s * np.cos(phi)
        q = (s * np.sin(phi)) ** 2 / g_over_t * 2.0
        m = eta * g_over_t * t * t * 2.0
        if which == 0:
            return m
        if which == 1:
            return q
        return eta * m + 2.0 * eta * q

    vals = [2.0 * adaptive_quad(lambda t, k=k: integrand_tau(t, k), 0.0, tau_max, tol=tol).value
            for k in range(3)]
    return FunctionalLedger.from_parts(*vals)


def evaluate_functionals(p: WaveProfile) -> FunctionalLedger:
    """M, Q, H and the zero-mean residual of a sampled profile.

    smooth   trapezoid rule with spectral derivatives on the grid
    peaked   Gauss-Legendre on the smooth pieces between crest and trough
             (exact for the explicit quadratic profile); sampled peaked data
             without an evaluator falls back to a kink-avoiding midpoint rule
    cusped   quadrature along the orbit, since the slope is unbounded at the crest
    """
    eta = p.eta
    if p.kind == "trivial" or not np.any(eta):
        return FunctionalLedger(0.0, 0.0, 0.0, 0.0)
    if p.kind == "smooth":
        return _grid_functionals(eta, spectral_derivative(eta))
    if p.kind == "peaked":
        if p._evaluator is not None and p._slope_evaluator is not None:
            return _piecewise_exact(p, [-math.pi, 0.0, math.pi])
        return _midpoint_kinked(eta)
    if p.kind == "cusped":
        return level_set_functionals(p.level)
    raise DomainError(f"functionals are defined for periodic profiles, not {p.kind!r}")


# ------------------------------------------------------------------ mass

def mass_closed_form(L: LevelEnergy) -> float:
    """M(E, c) = -(2/3) sqrt(c^2 + 2s) [c^2 E(k) - (c^2 - 2s) K(k)], k^2 = 4s / (c^2 + 2s)."""
    if not 0.0 < L.E < L.E_c:
        raise DomainError("mass_closed_form requires 0 < E < E_c")
    s, c2 = L.amplitude, L.c * L.c
    k = math.sqrt(4.0 * s / (c2 + 2.0 * s))
    kp = math.sqrt((c2 - 2.0 * s) / (c2 + 2.0 * s))
    return -(2.0 / 3.0) * math.sqrt(c2 + 2.0 * s) * (c2 * elliptic_E(k, kp)
                                                     - (c2 - 2.0 * s) * elliptic_K(k, kp))


def mass_quadrature(L: LevelEnergy, form: str = "by_parts", tol: float = QUAD_TOL) -> float:
    """Mass by endpoint-singular quadrature of either of two equivalent integrals.

    ``direct``:   2 int eta sqrt(c^2 - 2 eta) / sqrt(2E - eta^2) d eta
    ``by_parts``: -2 int sqrt(2E - eta^2) / sqrt(c^2 - 2 eta) d eta
    """
    if not 0.0 < L.E < L.E_c:
        raise DomainError("mass_quadrature requires 0 < E < E_c")
    s, c2 = L.amplitude, L.c * L.c
    if form == "direct":
        def h(x):
            return x * np.sqrt(c2 - 2.0 * s * x)
        scale = 2.0 * s
    elif form == "by_parts":
        def h(x):
            return (1.0 - x) * (1.0 + x) / np.sqrt(c2 - 2.0 * s * x)
        scale = -2.0 * s * s
    else:
        raise DomainError(f"unknown mass integral form {form!r}")
    r = integrate_endpoint_singular(h, -1.0, 1.0, (True, True), tol=tol, factored=True)
    return scale * r.value


def mass_along_family(c: float) -> float:
    """Mass of the smooth 2 pi periodic wave of speed c in (1, c_*)."""
    return mass_closed_form(solve_level_for_speed(c, "smooth", tol=0.0))


def mass_derivative(c: float, step: float = 1e-5) -> float:
    """dM/dc along the smooth family: central differences with one Richardson step."""
    if not 1.0 < c - step and c + step < C_STAR:
        raise DomainError("mass_derivative needs c - step > 1 and c + step < c_*")

    def central(h):
        return (mass_along_family(c + h) - mass_along_family(c - h)) / (2.0 * h)

    d1 = central(step)
    d2 = central(0.5 * step)
    return (4.0 * d2 - d1) / 3.0


# ----------------------------------------------------------------- Delta

def delta_moments(L: LevelEnergy, tol: float = 1e-12):
    """(I0, I1, I2, J) with I_m = int eta^m d eta / (sqrt(2E - eta^2) sqrt(c^2 - 2 eta))
    and J = int eta (c^2 - 3 eta) d eta / (same weight)."""
    if not 0.0 < L.E < L.E_c:
        raise DomainError("Delta moments are defined for 0 < E < E_c")
    s, c2 = L.amplitude, L.c * L.c

    def quad(poly):
        def h(x):
            return poly(x) / np.sqrt(c2 - 2.0 * s * x)
        return integrate_endpoint_singular(h, -1.0, 1.0, (True, True), tol=tol, factored=True).value

    I0 = quad(lambda x: np.ones_like(x))
    I1 = quad(lambda x: s * x)
    I2 = quad(lambda x: (s * x) ** 2)
    J = quad(lambda x: s * x * (c2 - 3.0 * s * x))
    return I0, I1, I2, J


def delta_indicator(L: LevelEnergy, tol: float = 1e-12) -> float:
    """Delta(E, c) = I1^2 + I0 J; its sign is the sign of M'(c) along the smooth family."""
    I0, I1, _, J = delta_moments(L, tol)
    return I1 * I1 + I0 * J


def delta_decomposition(L: LevelEnergy, nodes: int = 400) -> dict:
    """Split Delta into a mass term and a variance term, the latter also as a double integral.

    Delta = I0 * M(E, c) / 2 + (I1^2 - I0 I2), and

        I1^2 - I0 I2 = -1/2 iint (eta1 - eta2)^2 w(eta1) w(eta2) d eta1 d eta2,

    evaluated independently by a product Gauss-Chebyshev rule.
    """
    I0, I1, I2, _ = delta_moments(L)
    s, c2 = L.amplitude, L.c * L.c
    x = np.cos((2.0 * np.arange(1, nodes + 1) - 1.0) * math.pi / (2.0 * nodes))
    w = (math.pi / nodes) / np.sqrt(c2 - 2.0 * s * x)
    eta = s * x
    double = -0.5 * float(w @ ((eta[:, None] - eta[None, :]) ** 2) @ w)
    mass_term = 0.5 * I0 * mass_closed_form(L)
    return {
        "mass_term": mass_term,
        "variance_term": I1 * I1 - I0 * I2,
        "variance_double_integral": double,
        "delta": mass_term + I1 * I1 - I0 * I2,
    }


def mass_derivative_from_delta(c: float) -> float:
    """M'(c) = 2c Delta / (E |dT/dE|) evaluated on the smooth root E(c)."""
    L = solve_level_for_speed(c, "smooth", tol=0.0)
    return 2.0 * c * delta_indicator(L) / (L.E * abs(dT_dE(L)))


__all__.append("mass_derivative_from_delta")
