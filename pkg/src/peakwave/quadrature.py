"""Complete elliptic integrals and quadrature for endpoint-singular integrands.

Elliptic integrals take the *modulus* ``k`` (not the parameter ``m = k**2``),
matching the convention of the period and mass closed forms:

    K(k) = int_0^{pi/2} dt / sqrt(1 - k^2 sin^2 t)
    E(k) = int_0^{pi/2} sqrt(1 - k^2 sin^2 t) dt
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError

__all__ = [
    "QuadResult",
    "EllipticModulus",
    "elliptic_K",
    "elliptic_E",
    "adaptive_quad",
    "integrate_endpoint_singular",
]

DEFAULT_TOL = 1e-12
MAX_DEPTH = 40
MAX_EVALUATIONS = 300_000


@dataclass(frozen=True)
class QuadResult:
    value: float
    abs_error_estimate: float
    evaluations: int

    def __post_init__(self):
        if not self.abs_error_estimate >= 0.0:
            raise ValueError("abs_error_estimate must be non-negative")
        if self.evaluations <= 0:
            raise ValueError("evaluations must be positive")

    def __float__(self):
        return float(self.value)


@dataclass(frozen=True)
class EllipticModulus:
    """Modulus k in [0, 1), optionally with an accurate complement k' = sqrt(1 - k^2).

    Supplying ``kprime`` directly avoids the cancellation in ``1 - k**2`` when
    k is within a few ulps of 1.  With a positive ``kprime`` the stored k may
    have rounded to exactly 1.0.
    """

    k: float
    kprime: float | None = None

    def __post_init__(self):
        ok = 0.0 <= self.k < 1.0 or (self.k == 1.0 and self.kprime is not None and self.kprime > 0.0)
        if not ok:
            raise DomainError(f"elliptic modulus must lie in [0, 1), got {self.k!r}")

    @property
    def complement(self) -> float:
        if self.kprime is not None:
            return float(self.kprime)
        return math.sqrt((1.0 - self.k) * (1.0 + self.k))


def _agm_sequence(k: float, kprime: float):
    # c_{n+1} = c_n^2 / (4 a_{n+1}) avoids forming the difference a_n - b_n
    a, b, c = 1.0, kprime, k
    cs = [c]
    for _ in range(64):
        a, b = 0.5 * (a + b), math.sqrt(a * b)
        c = c * c / (4.0 * a)
        cs.append(c)
        if c <= 1e-18 * a:
            break
    return a, cs


def elliptic_K(k, kprime: float | None = None) -> float:
    """Complete elliptic integral of the first kind via the AGM iteration."""
    mod = k if isinstance(k, EllipticModulus) else EllipticModulus(float(k), kprime)
    kp = mod.complement
    if kp == 0.0:
        raise DomainError("K(k) diverges at k = 1")
    a, _ = _agm_sequence(mod.k, kp)
    return math.pi / (2.0 * a)


def elliptic_E(k, kprime: float | None = None) -> float:
    """Complete elliptic integral of the second kind, defined on the closed interval [0, 1]."""
    if isinstance(k, EllipticModulus):
        kval, kp = k.k, k.complement
    else:
        kval = float(k)
        if not 0.0 <= kval <= 1.0:
            raise DomainError(f"E(k) requires 0 <= k <= 1, got {kval!r}")
        kp = kprime if kprime is not None else math.sqrt((1.0 - kval) * (1.0 + kval))
    if kp == 0.0:
        return 1.0
    a, cs = _agm_sequence(kval, kp)
    s = sum(2.0 ** (n - 1) * cn * cn for n, cn in enumerate(cs))
    return math.pi / (2.0 * a) * (1.0 - s)


# Gauss-Kronrod 7/15 nodes and weights on [-1, 1].
_XK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XK[:-1], _XK[::-1]])
_KW = np.concatenate([_WK[:-1], _WK[::-1]])
# Gauss nodes are the odd-indexed Kronrod nodes.
_GW = np.zeros(15)
_GW[1:14:2] = np.concatenate([_WG[:-1], _WG[::-1]])


def _gk15(f, a, b):
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    y = np.asarray(f(mid + half * _NODES), dtype=float)
    if y.shape != _NODES.shape:
        y = np.broadcast_to(y, _NODES.shape)
    kron = half * float(_KW @ y)
    gauss = half * float(_GW @ y)
    return kron, abs(kron - gauss)


def adaptive_quad(f, a: float, b: float, tol: float = DEFAULT_TOL,
                  max_depth: int = MAX_DEPTH, max_evaluations: int = MAX_EVALUATIONS) -> QuadResult:
    """Globally adaptive Gauss-Kronrod (7/15) quadrature of a vectorized integrand.

    Panels are bisected worst-first until the summed error estimate drops
    below ``tol`` (absolute). Panels at ``max_depth`` are frozen; if the
    tolerance is then still unmet, or the integrand has been evaluated more
    than ``max_evaluations`` times, a ConvergenceError carrying the best
    estimate is raised.
    """
    if not b > a:
        raise DomainError("adaptive_quad requires a < b")
    value, err = _gk15(f, a, b)
    evals = 15
    heap = [(-err, a, b, value, err, 0)]
    total, total_err = value, err
    frozen_err = 0.0
    while heap and total_err > tol:
        if evals >= max_evaluations:
            break
        _, lo, hi, v, e, depth = heapq.heappop(heap)
        if depth >= max_depth:
            frozen_err += e
            if not heap:
                break
            continue
        mid = 0.5 * (lo + hi)
        v1, e1 = _gk15(f, lo, mid)
        v2, e2 = _gk15(f, mid, hi)
        evals += 30
        total += v1 + v2 - v
        total_err += e1 + e2 - e
        heapq.heappush(heap, (-e1, lo, mid, v1, e1, depth + 1))
        heapq.heappush(heap, (-e2, mid, hi, v2, e2, depth + 1))
    # re-sum to shed accumulated cancellation from the running totals
    value = math.fsum(item[3] for item in heap)
    err = math.fsum(item[4] for item in heap) + frozen_err
    if not (math.isfinite(value) and math.isfinite(err)):
        raise ConvergenceError("integrand produced non-finite values", estimate=value, error=err)
    if err > tol and evals >= max_evaluations:
        raise ConvergenceError(
            f"evaluation budget {max_evaluations} exhausted: error {err:.3e} > tol {tol:.1e}",
            estimate=value, error=err)
    if err > tol and frozen_err > 0.0:
        raise ConvergenceError(
            f"quadrature stalled at depth {max_depth}: error {err:.3e} > tol {tol:.1e}",
            estimate=value, error=err)
    return QuadResult(value, err, evals)


def integrate_endpoint_singular(f, a: float, b: float, singular_ends=(True, True),
                                tol: float = DEFAULT_TOL, max_depth: int = MAX_DEPTH,
                                factored: bool = False) -> QuadResult:
    """Integrate over [a, b] an integrand with (x-a)^(-1/2) or (b-x)^(-1/2) behavior.

    Flagged ends are removed by a trigonometric substitution before adaptive
    quadrature: both ends use x = m + r sin(t); a single flagged end uses a
    one-sided cosine map whose Jacobian vanishes like the square root of the
    distance to that end.

    With ``factored=True`` the caller passes only the regular factor h and the
    integrand is h(x) / sqrt(x - a) / sqrt(b - x) (flagged ends only).  The
    weight is then cancelled against the Jacobian analytically, which avoids
    evaluating the distance to an endpoint in floating point.
    """
    if not b > a:
        raise DomainError("integrate_endpoint_singular requires a < b")
    left, right = (bool(s) for s in singular_ends)
    span = b - a
    if left and right:
        m, r = 0.5 * (a + b), 0.5 * span
        lo, hi = -0.5 * math.pi, 0.5 * math.pi
        if factored:
            def g(t):
                return f(m + r * np.sin(t))
        else:
            def g(t):
                return f(m + r * np.sin(t)) * (r * np.cos(t))
    elif left or right:
        lo, hi = 0.0, 0.5 * math.pi
        sign = 1.0 if left else -1.0
        end = a if left else b
        if factored:
            scale = math.sqrt(2.0 * span)

            def g(t):
                return f(end + sign * span * (1.0 - np.cos(t))) * (scale * np.cos(0.5 * t))
        else:
            def g(t):
                return f(end + sign * span * (1.0 - np.cos(t))) * (span * np.sin(t))
    else:
        if factored:
            raise DomainError("factored form needs at least one flagged end")
        g, lo, hi = f, a, b
    return adaptive_quad(g, lo, hi, tol=tol, max_depth=max_depth)
