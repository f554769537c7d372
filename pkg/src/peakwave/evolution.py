"""Pseudospectral time integration of the local model and of its linearization.

Nonlinear model in the frame moving with speed c:

    2c eta_t = (c^2 - 2 eta) eta_u + P0 d_u^{-1} P0 [(eta_u)^2 + eta]

Linearization about a traveling wave eta of speed c:

    2c w_t = -P0 d_u^{-1} P0 L w,   L = -d_u (c^2 - 2 eta) d_u - 1 + 2 eta''

P0 removes the mean and d_u^{-1} acts by 1/(i n) on n != 0.  States are
stored as real-FFT coefficients (``numpy.fft.rfft``) of grid values on a
uniform N-point grid of [-pi, pi).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BlowUpError, DomainError, PreconditionError
from .functionals import FunctionalLedger
from .phase_plane import WaveProfile, uniform_grid

__all__ = [
    "EvolutionState",
    "OrbitalTrack",
    "NonlinearModel",
    "LinearizedModel",
    "rhs_nonlinear",
    "rhs_linearized",
    "step_rk4",
    "integrate",
    "track_orbit",
    "random_admissible_perturbation",
    "h1_norm",
    "default_time_step",
    "no_growth_test",
]

BLOWUP_FACTOR = 10.0
TAIL_FRACTION = 2.0 / 3.0


def _k(N):
    return np.arange(N // 2 + 1, dtype=float)


def _inv_derivative_symbol(N):
    k = _k(N)
    out = np.zeros(k.size, dtype=complex)
    out[1:] = 1.0 / (1j * k[1:])
    if N % 2 == 0:
        out[-1] = 0.0
    return out


def _derivative_symbol(N):
    k = 1j * _k(N)
    if N % 2 == 0:
        k[-1] = 0.0
    return k


def h1_norm(coeffs, N: int) -> float:
    """Discrete H^1 norm: ||f||^2 = 2 pi sum_n (1 + n^2) |f_n|^2 over all n in Z."""
    fn = np.asarray(coeffs) / N
    k = _k(N)
    w = np.full(k.size, 2.0)
    w[0] = 1.0
    if N % 2 == 0:
        w[-1] = 1.0
    return math.sqrt(2.0 * math.pi * float(np.sum(w * (1.0 + k * k) * np.abs(fn) ** 2)))


def _ledger_from_values(eta, eta_u):
    h = 2.0 * math.pi / eta.size
    M = h * math.fsum(eta)
    Q = h * math.fsum(eta_u * eta_u)
    H = h * math.fsum(eta * eta + 2.0 * eta * eta_u * eta_u)
    return FunctionalLedger.from_parts(M, Q, H)


@dataclass
class EvolutionState:
    t: float
    coeffs: np.ndarray
    c: float
    ledger: FunctionalLedger | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def N(self) -> int:
        return 2 * (self.coeffs.size - 1)

    def values(self) -> np.ndarray:
        return np.fft.irfft(self.coeffs, self.N)


class NonlinearModel:
    """Right side of the nonlinear model with 2/3-rule dealiasing.

    Only modes with |n| < N/3 are carried, so every quadratic product is
    exactly projected back onto the retained band.
    """

    linear = False

    def __init__(self, N: int, c: float, dealias: bool = True):
        if N % 2 or N < 8:
            raise DomainError("N must be even and at least 8")
        if not c > 0:
            raise DomainError("speed must be positive")
        self.N, self.c = N, float(c)
        self.dk = _derivative_symbol(N)
        self.jinv = _inv_derivative_symbol(N)
        self.mask = (_k(N) < N / 3.0) if dealias else np.ones(N // 2 + 1, dtype=bool)
        self.u = uniform_grid(N)

    def coefficients(self, values) -> np.ndarray:
        return np.fft.rfft(np.asarray(values, dtype=float)) * self.mask

    def slope(self, a):
        return np.fft.irfft(self.dk * a, self.N)

    def __call__(self, a):
        N, c = self.N, self.c
        eta = np.fft.irfft(a, N)
        eta_u = np.fft.irfft(self.dk * a, N)
        transport = np.fft.rfft((c * c - 2.0 * eta) * eta_u)
        source = np.fft.rfft(eta_u * eta_u + eta)
        return self.mask * (transport + self.jinv * source) / (2.0 * c)

    def ledger(self, a) -> FunctionalLedger:
        return _ledger_from_values(np.fft.irfft(a, self.N), self.slope(a))

    def invariants(self, a) -> dict:
        """Fraction of the retained H^1 energy in the top third of the band.

        Spectral ringing from a kink or an incipient front shows up here long
        before it is visible in the conserved quantities.
        """
        k = _k(self.N)
        e = (1.0 + k * k) * np.abs(a * self.mask) ** 2
        kmax = float(np.max(k[self.mask]))
        total = float(np.sum(e))
        tail = float(np.sum(e[k > TAIL_FRACTION * kmax]))
        return {"tail_energy": tail / total if total > 0.0 else 0.0}


class LinearizedModel:
    """Linearized flow about a smooth traveling wave sampled on the same grid.

    L is applied matrix-free by collocation (first derivatives drop the
    Nyquist mode), which keeps L symmetric and d_u^{-1} P0 skew in the
    trapezoid inner product, so <L w, w> and the constraints are invariants
    of the semi-discrete flow.
    """

    linear = True

    def __init__(self, background: WaveProfile):
        if background.kind not in ("smooth", "trivial"):
            raise DomainError("linearization requires a smooth traveling wave")
        N = background.N
        if N % 2:
            raise DomainError("grid size must be even")
        self.N, self.c = N, float(background.c)
        self.background = background
        self.dk = _derivative_symbol(N)
        self.jinv = _inv_derivative_symbol(N)
        self.mask = np.ones(N // 2 + 1, dtype=bool)
        self.u = background.u
        eh = np.fft.rfft(background.eta)
        self.eta = background.eta
        self.eta_u = np.fft.irfft(self.dk * eh, N)
        self.eta_uu = np.fft.irfft(-(_k(N) ** 2) * eh, N)
        self.flux = self.c ** 2 - 2.0 * self.eta
        self.h = 2.0 * math.pi / N

    def coefficients(self, values) -> np.ndarray:
        return np.fft.rfft(np.asarray(values, dtype=float))

    def slope(self, a):
        return np.fft.irfft(self.dk * a, self.N)

    def apply_L(self, w):
        """L w for grid values w."""
        wa = np.fft.rfft(w)
        wu = np.fft.irfft(self.dk * wa, self.N)
        stiff = np.fft.irfft(self.dk * np.fft.rfft(self.flux * wu), self.N)
        return -stiff - w + 2.0 * self.eta_uu * w

    def __call__(self, a):
        w = np.fft.irfft(a, self.N)
        Lw = np.fft.rfft(self.apply_L(w))
        return -self.jinv * Lw / (2.0 * self.c)

    def inner(self, f, g) -> float:
        return self.h * float(np.dot(f, g))

    def ledger(self, a) -> FunctionalLedger:
        w = np.fft.irfft(a, self.N)
        return _ledger_from_values(w, self.slope(a))

    def invariants(self, a) -> dict:
        w = np.fft.irfft(a, self.N)
        return {
            "mean_constraint": self.inner(np.ones_like(w), w),
            "curvature_constraint": self.inner(self.eta_uu, w),
            "energy": self.inner(self.apply_L(w), w),
        }


def rhs_nonlinear(s: EvolutionState, dealias: bool = True) -> np.ndarray:
    """Time derivative of the coefficients under the nonlinear model."""
    return NonlinearModel(s.N, s.c, dealias)(s.coeffs)


def rhs_linearized(s: EvolutionState, background: WaveProfile) -> np.ndarray:
    """Time derivative of the coefficients of a perturbation under the linearized model."""
    model = LinearizedModel(background)
    if s.N != model.N:
        raise DomainError("state and background grids differ")
    return model(s.coeffs)


def _rk4(model, a, dt):
    k1 = model(a)
    k2 = model(a + 0.5 * dt * k1)
    k3 = model(a + 0.5 * dt * k2)
    k4 = model(a + dt * k3)
    return a + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _make_state(model, t, a):
    diag = model.invariants(a) if hasattr(model, "invariants") else {}
    return EvolutionState(t, a, model.c, model.ledger(a), diag)


def step_rk4(s: EvolutionState, dt: float, model) -> EvolutionState:
    """One classical Runge-Kutta step (dt may be negative for reversibility checks)."""
    if dt == 0:
        raise DomainError("dt must be nonzero")
    return _make_state(model, s.t + dt, _rk4(model, s.coeffs, dt))


def default_time_step(eta, c: float) -> float:
    """min(1e-3, advective step bound 0.5 du / (max|c^2 - 2 eta| / (2c)))."""
    eta = np.asarray(eta, dtype=float)
    du = 2.0 * math.pi / eta.size
    speed = np.max(np.abs(c * c - 2.0 * eta)) / (2.0 * c)
    return min(1e-3, 0.5 * du / speed)


def integrate(state: EvolutionState, model, dt: float, t_final: float,
              record_every: float | None = None) -> list[EvolutionState]:
    """Advance with RK4 from state.t to t_final, returning recorded states.

    The nonlinear flow aborts with BlowUpError once max |eta_u| exceeds ten
    times its initial value.
    """
    if not dt > 0:
        raise DomainError("dt must be positive")
    nsteps = int(round((t_final - state.t) / dt))
    if nsteps < 0 or not math.isclose(state.t + nsteps * dt, t_final, rel_tol=1e-9, abs_tol=1e-12):
        raise DomainError("t_final - t must be a non-negative multiple of dt")
    every = nsteps if record_every is None else max(1, int(round(record_every / dt)))
    a = state.coeffs.copy()
    guard = None
    if not getattr(model, "linear", False):
        guard = BLOWUP_FACTOR * max(np.max(np.abs(model.slope(a))), 1e-300)
    out = [_make_state(model, state.t, a)]
    for i in range(1, nsteps + 1):
        a = _rk4(model, a, dt)
        t = state.t + i * dt
        if guard is not None:
            smax = np.max(np.abs(model.slope(a)))
            if not (smax <= guard):
                raise BlowUpError(f"max |eta_u| = {smax:.3e} exceeded the breaking guard "
                                  f"{guard:.3e} at t = {t:.6g}", t=t)
        if i % every == 0 or i == nsteps:
            out.append(_make_state(model, t, a))
    return out


def random_admissible_perturbation(model: LinearizedModel, seed: int, modes: int = 16,
                                   amplitude: float = 1e-2) -> np.ndarray:
    """Seeded smooth perturbation orthogonal to 1 and eta'' (grid values).

    Fourier modes 1..modes get normal random coefficients decaying like 1/n^2,
    then the two constraint directions are removed by an orthogonal projection.
    """
    rng = np.random.default_rng(seed)
    n = np.arange(1, modes + 1)
    ca = rng.standard_normal(modes) / n ** 2
    sa = rng.standard_normal(modes) / n ** 2
    u = model.u
    w = np.cos(np.outer(u, n)) @ ca + np.sin(np.outer(u, n)) @ sa
    basis = np.column_stack([np.ones_like(u), model.eta_uu])
    q, _ = np.linalg.qr(basis)
    w = w - q @ (q.T @ w)
    return amplitude * w / math.sqrt(model.inner(w, w))


@dataclass
class OrbitalTrack:
    t: np.ndarray
    a: np.ndarray
    a_dot: np.ndarray
    residual_norm: np.ndarray
    initial_norm: float

    @property
    def sup_residual_ratio(self) -> float:
        return float(np.max(self.residual_norm) / self.initial_norm)

    @property
    def sup_a_dot_ratio(self) -> float:
        return float(np.max(np.abs(self.a_dot)) / self.initial_norm)

    def growth(self) -> dict:
        return no_growth_test(self.t, self.residual_norm / self.initial_norm)


def no_growth_test(t, r) -> dict:
    """Fit r(t) linearly; the trend counts as growth only if it exceeds the noise.

    Passes when |slope| * (t_end - t_0) <= max(3 std(detrended r), 0.05 mean(r)).
    """
    t = np.asarray(t, dtype=float)
    r = np.asarray(r, dtype=float)
    slope, icpt = np.polyfit(t, r, 1)
    resid = r - (slope * t + icpt)
    trend = abs(slope) * (t[-1] - t[0])
    bound = max(3.0 * float(np.std(resid)), 0.05 * float(np.mean(r)))
    return {"slope": float(slope), "trend": float(trend), "bound": bound, "passed": trend <= bound}


def track_orbit(run, model: LinearizedModel, constraint_tol: float = 1e-10) -> OrbitalTrack:
    """Split each perturbation as a(t) eta' + remainder by L^2 projection onto eta'.

    a'(t) is obtained from the right side of the flow, not by differencing.
    """
    run = list(run)
    first = np.fft.irfft(run[0].coeffs, model.N)
    scale = math.sqrt(model.inner(first, first)) or 1.0
    cons = max(abs(model.inner(np.ones_like(first), first)),
               abs(model.inner(model.eta_uu, first))) / scale
    if cons > constraint_tol:
        raise PreconditionError(f"initial perturbation violates the constraints ({cons:.3e})")
    ep = model.eta_u
    epn = model.inner(ep, ep)
    ts, a, adot, res = [], [], [], []
    for s in run:
        w = np.fft.irfft(s.coeffs, model.N)
        ai = model.inner(w, ep) / epn
        wdot = np.fft.irfft(model(s.coeffs), model.N)
        ts.append(s.t)
        a.append(ai)
        adot.append(model.inner(wdot, ep) / epn)
        res.append(h1_norm(np.fft.rfft(w - ai * ep), model.N))
    return OrbitalTrack(np.array(ts), np.array(a), np.array(adot), np.array(res),
                        h1_norm(run[0].coeffs, model.N))
