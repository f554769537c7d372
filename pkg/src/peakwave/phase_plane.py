"""Phase-plane analysis of the traveling-wave ODE

    (c^2 - 2 eta) eta'' - (eta')^2 + eta = 0,

whose first integral is E = (c^2 - 2 eta)(eta')^2 / 2 + eta^2 / 2.  Closed orbits
with E < E_c = c^4 / 8 give smooth periodic waves; for E >= E_c the orbit is cut
by the singular line eta = c^2 / 2 and the wave has a peaked (E = E_c) or cusped
(E > E_c) crest.

Throughout, s = sqrt(2E) is the amplitude of the orbit and the phase angle phi
parameterizes the level set by eta = s cos(phi).  Along the orbit

    du = g(phi) dphi,   g(phi) = sqrt(c^2 - 2 s cos(phi)),

so the half period is the integral of g, and c^2 - 2 eta = g^2.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import ConvergenceError, DomainError, NoRootError, PreconditionError
from .quadrature import elliptic_E, elliptic_K, integrate_endpoint_singular

__all__ = [
    "C_STAR",
    "LevelEnergy",
    "PeriodEvaluation",
    "WaveProfile",
    "first_integral",
    "period",
    "period_smooth",
    "period_singular",
    "period_elliptic",
    "dT_dE",
    "period_minimizer",
    "solve_level_for_speed",
    "critical_speeds",
    "peaked_profile",
    "parabola_profile",
    "reconstruct_profile",
    "singular_amplitude",
    "bifurcation_diagram",
    "uniform_grid",
    "trivial_profile",
]

TWO_PI = 2.0 * math.pi
C_STAR = math.pi / (2.0 * math.sqrt(2.0))
BRACKET_EPS = 1e-10
ROOT_TOL = 1e-12
PERIOD_TOL = 1e-10
BRANCHES = ("smooth", "singular_lower", "singular_upper")


@dataclass(frozen=True)
class LevelEnergy:
    """Level E of the first integral at wave speed c."""

    E: float
    c: float

    def __post_init__(self):
        if not (self.E > 0.0 and math.isfinite(self.E)):
            raise DomainError(f"energy level must be positive and finite, got {self.E!r}")
        if not (self.c > 0.0 and math.isfinite(self.c)):
            raise DomainError(f"wave speed must be positive, got {self.c!r}")

    @property
    def E_c(self) -> float:
        return self.c ** 4 / 8.0

    @property
    def amplitude(self) -> float:
        """s = sqrt(2E), the turning point of the orbit on the eta axis."""
        return math.sqrt(2.0 * self.E)

    @property
    def regime(self) -> str:
        if self.E < self.E_c:
            return "smooth"
        if self.E == self.E_c:
            return "critical"
        return "singular"


@dataclass(frozen=True)
class PeriodEvaluation:
    T: float
    method: str
    error: float

    def __post_init__(self):
        if not self.T > 0.0:
            raise ValueError("period must be positive")
        if self.method not in ("quadrature", "elliptic"):
            raise ValueError(f"unknown method tag {self.method!r}")
        if not self.error >= 0.0:
            raise ValueError("error estimate must be non-negative")

    def __float__(self):
        return self.T


def uniform_grid(n: int) -> np.ndarray:
    """n uniform samples of [-pi, pi); index n // 2 is u = 0."""
    return -math.pi + TWO_PI * np.arange(n) / n


@dataclass
class WaveProfile:
    """Sampled single-lobe profile eta(u) on a uniform grid of [-pi, pi).

    ``eta_u`` holds the exact slope when it is known in closed form (it is
    NaN at the crest of peaked and cusped waves).  ``level`` is None for the
    trivial profile; the diagnostic parabola carries the critical level E_c.
    """

    u: np.ndarray
    eta: np.ndarray
    c: float
    level: LevelEnergy | None
    kind: str
    eta_u: np.ndarray | None = None
    _evaluator: object = field(default=None, repr=False, compare=False)
    _slope_evaluator: object = field(default=None, repr=False, compare=False)

    KINDS = ("smooth", "peaked", "cusped", "parabola", "trivial")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown profile kind {self.kind!r}")
        self.u = np.asarray(self.u, dtype=float)
        self.eta = np.asarray(self.eta, dtype=float)

    @property
    def N(self) -> int:
        return self.u.size

    @property
    def E(self) -> float | None:
        return None if self.level is None else self.level.E

    def eta_at(self, u):
        """Evaluate the profile at arbitrary points (2 pi periodic, even)."""
        if self._evaluator is None:
            raise NotImplementedError(f"no continuous evaluator for a {self.kind} profile")
        return self._evaluator(np.asarray(u, dtype=float))

    def slope_at(self, u):
        """Exact derivative at arbitrary points, where a closed form is available."""
        if self._slope_evaluator is None:
            raise NotImplementedError(f"no slope evaluator for a {self.kind} profile")
        return self._slope_evaluator(np.asarray(u, dtype=float))


def first_integral(eta, eta_prime, c):
    """E = (c^2 - 2 eta) eta'^2 / 2 + eta^2 / 2; works elementwise on arrays."""
    eta = np.asarray(eta, dtype=float)
    eta_prime = np.asarray(eta_prime, dtype=float)
    out = 0.5 * (c * c - 2.0 * eta) * eta_prime ** 2 + 0.5 * eta ** 2
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------- periods

def period_smooth(L: LevelEnergy, tol: float = 1e-13) -> PeriodEvaluation:
    """Period of a closed orbit below the singular line, by endpoint-singular quadrature.

    With eta = s x the period is 2 int_{-1}^{1} sqrt(c^2 - 2 s x) / sqrt(1 - x^2) dx,
    whose inverse square-root end behavior is removed by x = sin(theta).
    """
    if not 0.0 < L.E < L.E_c:
        raise DomainError("period_smooth requires 0 < E < E_c")
    s, c2 = L.amplitude, L.c * L.c

    def h(x):
        return np.sqrt(np.maximum(c2 - 2.0 * s * x, 0.0))

    r = integrate_endpoint_singular(h, -1.0, 1.0, (True, True), tol=tol, factored=True)
    return PeriodEvaluation(2.0 * r.value, "quadrature", 2.0 * r.abs_error_estimate)


def period_singular(L: LevelEnergy, tol: float = 1e-13) -> PeriodEvaluation:
    """Period of the orbit truncated at the singular line eta = c^2 / 2 (E >= E_c).

    In x = eta / s the range is [-1, x_top] with x_top = c^2 / (2s), and
    sqrt(c^2 - 2sx) = sqrt(2s) sqrt(x_top - x); both ends then carry an inverse
    square-root weight with regular factor sqrt(2s) (x_top - x) / sqrt(1 - x).
    """
    if L.E < L.E_c:
        raise DomainError("period_singular requires E >= E_c")
    s = L.amplitude
    top = min(L.c * L.c / (2.0 * s), 1.0)
    root2s = math.sqrt(2.0 * s)

    def h(x):
        d = np.maximum(top - x, 0.0)
        return root2s * d / np.sqrt(np.maximum(1.0 - x, d))

    r = integrate_endpoint_singular(h, -1.0, top, (True, True), tol=tol, factored=True)
    return PeriodEvaluation(2.0 * r.value, "quadrature", 2.0 * r.abs_error_estimate)


def period_elliptic(L: LevelEnergy) -> PeriodEvaluation:
    """Closed forms of the period in complete elliptic integrals (modulus convention).

    Smooth (E < E_c):    T = 4 sqrt(c^2 + 2s) E(k),  k^2 = 4s / (c^2 + 2s)
    Singular (E > E_c):  T = 4 (2E)^(1/4) [2 E(k) + (c^2 / (2s) - 1) K(k)],
                         k^2 = (c^2 + 2s) / (4s)
    Complementary moduli are formed directly to keep accuracy near E_c.
    """
    c2 = L.c * L.c
    s = L.amplitude
    if L.E < L.E_c:
        k = math.sqrt(4.0 * s / (c2 + 2.0 * s))
        kp = math.sqrt((c2 - 2.0 * s) / (c2 + 2.0 * s))
        T = 4.0 * math.sqrt(c2 + 2.0 * s) * elliptic_E(k, kp)
    elif L.E > L.E_c:
        k = math.sqrt((c2 + 2.0 * s) / (4.0 * s))
        kp = math.sqrt((2.0 * s - c2) / (4.0 * s))
        T = 4.0 * math.sqrt(s) * (2.0 * elliptic_E(k, kp)
                                  + (c2 / (2.0 * s) - 1.0) * elliptic_K(k, kp))
    else:
        raise DomainError("closed forms degenerate at E = E_c; the limit value is 4 sqrt(2) c")
    return PeriodEvaluation(T, "elliptic", 64.0 * np.finfo(float).eps * T)


def period(E: float, c: float) -> float:
    """T(E, c) on the whole range E > 0 via the closed forms (junction value at E_c)."""
    L = LevelEnergy(E, c)
    if L.E == L.E_c:
        return 4.0 * math.sqrt(2.0) * c
    return period_elliptic(L).T


def dT_dE(L: LevelEnergy, tol: float = 1e-13) -> float:
    """Derivative of the smooth period function in E.

    The derivative integral -(2/s) int_{-1}^{1} x dx / (sqrt(1-x^2) sqrt(c^2-2sx))
    is folded onto [0, 1]; pairing x with -x removes the cancellation, leaving

        -8 int_0^1 x^2 dx / (sqrt(1-x^2) sqrt(A) sqrt(B) (sqrt(A) + sqrt(B))),

    with A = c^2 - 2sx and B = c^2 + 2sx.  This stays accurate as E -> 0,
    where the limit is -pi / c^3.
    """
    if not 0.0 < L.E < L.E_c:
        raise DomainError("dT_dE is defined on the smooth regime 0 < E < E_c")
    s, c2 = L.amplitude, L.c * L.c

    def h(x):
        ra = np.sqrt(c2 - 2.0 * s * x)
        rb = np.sqrt(c2 + 2.0 * s * x)
        return x * x / (np.sqrt(1.0 + x) * ra * rb * (ra + rb))

    r = integrate_endpoint_singular(h, 0.0, 1.0, (False, True), tol=tol, factored=True)
    return -8.0 * r.value


# ------------------------------------------------------------ root finding

def _bisect(f, lo, hi, flo, fhi, tol):
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0.0:
        raise NoRootError("interval does not bracket a root")
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if hi - lo <= tol or mid in (lo, hi):
            break
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm < 0.0) == (flo < 0.0):
            lo, flo = mid, fm
        else:
            hi, fhi = mid, fm
    return lo if abs(flo) < abs(fhi) else hi


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_min(f, a, b, rtol=1e-10):
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while abs(b - a) > rtol * (abs(c) + abs(d)):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return (c, fc) if fc < fd else (d, fd)


@lru_cache(maxsize=4096)
def period_minimizer(c: float) -> tuple[float, float]:
    """(E_*, T(E_*, c)): minimizer of the period over the singular range E >= E_c.

    Found by golden-section search on [E_c, 10 E_c]; the period decreases and
    then increases there, with a single interior turning point.
    """
    Ec = c ** 4 / 8.0
    return _golden_min(lambda E: period(E, c), Ec, 10.0 * Ec)


def solve_level_for_speed(c: float, branch: str = "smooth", tol: float = ROOT_TOL) -> LevelEnergy:
    """Energy level E with T(E, c) = 2 pi on the requested branch, by bisection.

    smooth          0 < E < E_c,    exists for 1 < c < c_*
    singular_lower  E_c <= E <= E_*, exists for c_* <= c < c_inf (cusped waves)
    singular_upper  E >= E_*,        exists for 0 < c < c_inf
    """
    if branch not in BRANCHES:
        raise DomainError(f"unknown branch {branch!r}; expected one of {BRANCHES}")
    if not c > 0.0:
        raise DomainError("wave speed must be positive")
    Ec = c ** 4 / 8.0

    def F(E):
        return period(E, c) - TWO_PI

    if branch == "smooth":
        lo, hi = BRACKET_EPS * Ec, (1.0 - BRACKET_EPS) * Ec
    else:
        Estar, Tmin = period_minimizer(c)
        if Tmin > TWO_PI:
            raise NoRootError(f"no singular wave at c = {c}: min period {Tmin:.12g} > 2 pi")
        if branch == "singular_lower":
            lo, hi = Ec, Estar
        else:
            lo, hi = Estar, 2.0 * Estar
            while F(hi) < 0.0:
                hi *= 2.0
                if hi > 1e300:
                    raise NoRootError("period does not exceed 2 pi on the upper branch")
    flo, fhi = F(lo), F(hi)
    if branch == "smooth" and flo > 0.0 and fhi > 0.0:
        # just below c_* the root lies within BRACKET_EPS of E_c; T is continuous
        # there with T(E_c) = 4 sqrt(2) c
        hi, fhi = Ec, F(Ec)
    if flo * fhi > 0.0:
        raise NoRootError(f"no {branch} root at c = {c}: T - 2pi = {flo:.3e}, {fhi:.3e} "
                          "at the bracket ends")
    E = _bisect(F, lo, hi, flo, fhi, tol * max(1.0, Ec))
    return LevelEnergy(E, c)


@lru_cache(maxsize=1)
def _c_infinity(tol: float) -> float:
    def g(c):
        return period_minimizer(c)[1] - TWO_PI

    lo, hi = C_STAR, 2.0
    return _bisect(g, lo, hi, g(lo), g(hi), tol)


def critical_speeds(tol: float = 1e-8) -> tuple[float, float]:
    """(c_*, c_inf): end of the smooth branch and end of the singular branches.

    c_inf is where the minimum of T(., c) over E >= E_c crosses 2 pi, located
    by bisection in c with a golden-section minimization inside.
    """
    return C_STAR, _c_infinity(tol)


# --------------------------------------------------------------- profiles

def peaked_profile(grid_size: int = 512) -> WaveProfile:
    """The explicit peaked wave at c = c_*: eta = (pi^2 - 4 pi |u| + 2 u^2) / 16."""
    if grid_size < 4:
        raise DomainError("grid_size must be at least 4")
    u = uniform_grid(grid_size)

    def ev(x):
        a = np.abs(np.mod(x + math.pi, TWO_PI) - math.pi)
        return (math.pi ** 2 - 4.0 * math.pi * a + 2.0 * a * a) / 16.0

    def dev(x):
        w = np.mod(x + math.pi, TWO_PI) - math.pi
        return -np.sign(w) * (math.pi - np.abs(w)) / 4.0

    slope = dev(u)
    slope[u == 0.0] = np.nan
    slope[u == -math.pi] = 0.0
    level = LevelEnergy(math.pi ** 4 / 512.0, C_STAR)
    return WaveProfile(u, ev(u), C_STAR, level, "peaked", slope, ev, dev)


def trivial_profile(c: float, grid_size: int = 512) -> WaveProfile:
    """The constant solution eta = 0 at speed c (center of the phase plane)."""
    u = uniform_grid(grid_size)
    zero = np.zeros_like(u)
    return WaveProfile(u, zero, c, None, "trivial", zero.copy(),
                       lambda x: np.zeros_like(x), lambda x: np.zeros_like(x))


def parabola_profile(c: float, u0: float, grid) -> WaveProfile:
    """Non-periodic parabola eta = -c^2/2 + (u - u0)^2 / 8 on the singular level E_c."""
    u = np.asarray(grid, dtype=float)

    def ev(x):
        return -0.5 * c * c + (x - u0) ** 2 / 8.0

    level = LevelEnergy(c ** 4 / 8.0, c) if c > 0 else None
    return WaveProfile(u, ev(u), c, level, "parabola", (u - u0) / 4.0, ev,
                       lambda x: (x - u0) / 4.0)


class _SmoothInversion:
    """u(phi) = g0 phi + sum_k (g_k / k) sin(k phi) from the cosine series of g."""

    def __init__(self, L: LevelEnergy):
        self.s = L.amplitude
        self.b = 2.0 * self.s
        self.c2 = L.c * L.c
        m = 1024
        while True:
            phi = TWO_PI * np.arange(m) / m
            coef = np.fft.rfft(self._g(phi)).real / m
            if abs(coef[-2]) < 1e-17 or m >= 2 ** 22:
                break
            m *= 2
        self.g0 = coef[0]
        ak = 2.0 * coef[1:-1]
        keep = np.nonzero(np.abs(ak) > 1e-19)[0]
        n = keep[-1] + 1 if keep.size else 0
        self.k = np.arange(1, n + 1, dtype=float)
        self.ak = ak[:n]

    def _g(self, phi):
        return np.sqrt(self.c2 - self.b * np.cos(phi))

    def u_of_phi(self, phi):
        return self.g0 * phi + np.sin(np.multiply.outer(phi, self.k)) @ (self.ak / self.k)

    def phi_of_u(self, u):
        ua = np.abs(u)
        phi = ua / self.g0
        for _ in range(50):
            step = (self.u_of_phi(phi) - ua) / self._g(phi)
            phi = phi - step
            if np.max(np.abs(step), initial=0.0) < 1e-15:
                return phi
        raise ConvergenceError("profile inversion did not converge", estimate=phi)

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        w = np.mod(u + math.pi, TWO_PI) - math.pi
        return self.s * np.cos(self.phi_of_u(w))

    def slope(self, u):
        w = np.mod(np.asarray(u, dtype=float) + math.pi, TWO_PI) - math.pi
        phi = self.phi_of_u(w)
        return np.sign(w) * (-self.s * np.sin(phi) / self._g(phi))


_GL_X, _GL_W = np.polynomial.legendre.leggauss(64)


class _CuspInversion:
    """Crest-resolving inversion for cusped waves.

    With phi = phi0 + tau^2 (eta = c^2/2 at phi0) the arclength map becomes
    U(tau) = int_0^tau 2t sqrt(2b sin(phi0 + t^2/2) sin(t^2/2)) dt, which is
    analytic in tau and behaves like kappa tau^3 at the crest.
    """

    def __init__(self, L: LevelEnergy):
        self.s = L.amplitude
        self.b = 2.0 * self.s
        self.c2 = L.c * L.c
        self.phi0 = math.acos(self.c2 / self.b)
        self.kappa = (2.0 / 3.0) * math.sqrt(self.b * math.sin(self.phi0))
        self.tau_max = math.sqrt(math.pi - self.phi0)

    def _dU(self, t):
        return 2.0 * t * np.sqrt(2.0 * self.b * np.sin(self.phi0 + 0.5 * t * t)
                                 * np.sin(0.5 * t * t))

    def U(self, tau):
        tau = np.asarray(tau, dtype=float)
        t = 0.5 * tau[..., None] * (_GL_X + 1.0)
        return 0.5 * tau * (self._dU(t) @ _GL_W)

    def tau_of_u(self, u):
        ua = np.abs(np.asarray(u, dtype=float))
        tau = np.minimum(np.cbrt(ua / self.kappa), self.tau_max)
        lo = np.zeros_like(ua)
        hi = np.full_like(ua, self.tau_max)
        for _ in range(100):
            F = self.U(tau) - ua
            lo = np.where(F < 0.0, tau, lo)
            hi = np.where(F > 0.0, tau, hi)
            d = self._dU(tau)
            with np.errstate(divide="ignore", invalid="ignore"):
                new = tau - F / d
            bad = ~np.isfinite(new) | (new <= lo) | (new >= hi)
            new = np.where(bad, 0.5 * (lo + hi), new)
            done = np.abs(new - tau) <= 1e-15 * np.maximum(tau, 1e-300)
            tau = new
            if np.all(done | (ua == 0.0)):
                return np.where(ua == 0.0, 0.0, tau)
        raise ConvergenceError("cusp inversion did not converge", estimate=tau)

    def depth(self, tau):
        """c^2/2 - eta written without cancellation."""
        return 2.0 * self.s * np.sin(self.phi0 + 0.5 * tau * tau) * np.sin(0.5 * tau * tau)

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        w = np.mod(u + math.pi, TWO_PI) - math.pi
        return 0.5 * self.c2 - self.depth(self.tau_of_u(w))

    def slope(self, u):
        """Exact slope; infinite in magnitude at the crest."""
        w = np.mod(np.asarray(u, dtype=float) + math.pi, TWO_PI) - math.pi
        tau = self.tau_of_u(w)
        phi = self.phi0 + tau * tau
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.sign(w) * (-self.s * np.sin(phi) / self._dU(tau) * 2.0 * tau)
        return np.where(w == 0.0, np.nan, out)


def reconstruct_profile(L: LevelEnergy, grid_size: int = 512,
                        period_tol: float = PERIOD_TOL) -> WaveProfile:
    """Sample the 2 pi periodic wave on the orbit of level L on a uniform grid.

    The implicit relation between u and eta is inverted by Newton iteration on
    the phase angle: for smooth waves u(phi) is a Fourier series, for cusped
    waves a crest-adapted variable tau = sqrt(phi - phi0) is used.
    """
    if grid_size < 16:
        raise DomainError("grid_size must be at least 16")
    T = period(L.E, L.c)
    if abs(T - TWO_PI) > period_tol:
        raise PreconditionError(f"T(E, c) - 2 pi = {T - TWO_PI:.3e}; the orbit is not 2 pi periodic")
    u = uniform_grid(grid_size)
    if L.E == L.E_c:
        return peaked_profile(grid_size)
    s = L.amplitude
    if L.E < L.E_c:
        inv = _SmoothInversion(L)
        phi = inv.phi_of_u(u)
        eta = s * np.cos(phi)
        g = inv._g(phi)
        slope = np.sign(u) * (-s * np.sin(phi) / g)
        return WaveProfile(u, eta, L.c, L, "smooth", slope, inv, inv.slope)
    inv = _CuspInversion(L)
    tau = inv.tau_of_u(u)
    eta = 0.5 * L.c ** 2 - inv.depth(tau)
    phi = inv.phi0 + tau * tau
    with np.errstate(divide="ignore", invalid="ignore"):
        slope = np.sign(u) * (-s * np.sin(phi) / np.sqrt(L.c ** 2 - 2.0 * eta))
    slope[u == 0.0] = np.nan
    slope[u == -math.pi] = 0.0
    return WaveProfile(u, eta, L.c, L, "cusped", slope, inv, inv.slope)


def singular_amplitude(L: LevelEnergy) -> float:
    """Coefficient A of the crest expansion eta = c^2/2 - A |u|^(2/3) + ..."""
    if L.E < L.E_c:
        raise DomainError("singular amplitude requires E >= E_c")
    return (1.5) ** (2.0 / 3.0) * (L.E - L.E_c) ** (1.0 / 3.0)


# ------------------------------------------------------------- bifurcation

def _roots_at_speed(c: float) -> list[tuple[float, str, float, float]]:
    rows = []
    for branch in BRANCHES:
        try:
            L = solve_level_for_speed(c, branch)
        except NoRootError:
            continue
        sup = L.amplitude if branch == "smooth" else 0.5 * c * c
        rows.append((c, branch, L.E, sup))
    return rows


def bifurcation_diagram(c_min: float, c_max: float, n_points: int,
                        workers: int = 1) -> list[tuple[float, str, float, float]]:
    """Rows (c, branch, E, sup-norm) for every branch root at n_points equispaced speeds.

    The sup-norm is sqrt(2E) on the smooth branch and the crest height c^2/2
    on singular branches.  With ``workers > 1`` speeds are solved in a
    process pool; the row order does not depend on the worker count.
    """
    if n_points < 2:
        raise DomainError("n_points must be at least 2")
    if not c_max > c_min > 0.0:
        raise DomainError("need 0 < c_min < c_max")
    speeds = [float(x) for x in np.linspace(c_min, c_max, n_points)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            chunks = list(ex.map(_roots_at_speed, speeds))
    else:
        chunks = [_roots_at_speed(c) for c in speeds]
    return [row for chunk in chunks for row in chunk]
