"""Linearized operator about a smooth traveling wave and its spectral data.

    L = -d/du (c^2 - 2 eta) d/du - 1 + 2 eta''

The operator is discretized by Fourier collocation in the phase angle of the
orbit rather than on a uniform u-grid.  With eta = s cos(phi) and
du = g(phi) dphi, g = sqrt(c^2 - 2 eta), the profile is an entire function of
phi with far faster Fourier decay than in u, and

    L f = -(1/g) D_phi (g D_phi f) - f + 2 eta'' f.

Grid functions are carried in the weighted form v = sqrt(g dphi) f, so the
Euclidean inner product of vectors equals the L^2(du) inner product and the
matrix of L is symmetric.  An odd number of nodes is used so that no
unpaired Nyquist mode enters the spectrum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import AmbiguityError, ConvergenceError, DomainError
from .fourier import differentiation_matrix
from .phase_plane import LevelEnergy, WaveProfile, reconstruct_profile, solve_level_for_speed

__all__ = [
    "OperatorMatrix",
    "SpectrumReport",
    "ConstraintMatrixA",
    "build_L",
    "build_L_for_level",
    "build_L_trivial",
    "inertia",
    "constrained_inertia",
    "constraint_matrix",
    "spectral_stability",
    "zero_mean_projector",
    "speed_derivative_check",
    "DEFAULT_ZERO_TOL_FACTOR",
]

DEFAULT_ZERO_TOL_FACTOR = 1e-6


@dataclass
class OperatorMatrix:
    """Symmetric matrix of L in the weighted collocation basis, plus grid data.

    ``weights`` maps nodal values f to basis coefficients v = weights * f.
    ``jacobian`` is du/dphi at the nodes (1 on a uniform u-grid).
    """

    entries: np.ndarray
    nodes: np.ndarray
    u: np.ndarray
    weights: np.ndarray
    jacobian: np.ndarray
    D: np.ndarray
    eta: np.ndarray
    eta_u: np.ndarray
    eta_uu: np.ndarray
    c: float
    level: LevelEnergy | None = None

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def norm2(self) -> float:
        return float(np.max(np.abs(np.linalg.eigvalsh(self.entries))))

    def to_basis(self, f):
        return self.weights * np.asarray(f, dtype=float)

    def from_basis(self, v):
        return np.asarray(v) / self.weights

    def apply(self, f):
        """L applied to nodal values f, returned as nodal values."""
        return self.from_basis(self.entries @ self.to_basis(f))

    def d_du(self, f):
        """Collocation derivative in u of nodal values."""
        return (self.D @ np.asarray(f, dtype=float)) / self.jacobian

    def inner(self, f, g) -> float:
        """L^2 inner product of nodal functions."""
        return float(self.to_basis(f) @ self.to_basis(g))


@dataclass
class SpectrumReport:
    eigenvalues: np.ndarray
    n_neg: int
    n_zero: int
    n_pos: int
    zero_tol: float
    eigenvectors: np.ndarray | None = None

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    @property
    def max_abs_real(self) -> float:
        return float(np.max(np.abs(np.real(self.eigenvalues))))

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.eigenvalues)))


@dataclass(frozen=True)
class ConstraintMatrixA:
    """A = [[<L^-1 1, 1>, <L^-1 1, eta''>], [<L^-1 eta'', 1>, <L^-1 eta'', eta''>]]."""

    matrix: np.ndarray

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.matrix))

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix))

    @property
    def asymmetry(self) -> float:
        return float(abs(self.matrix[0, 1] - self.matrix[1, 0]))


def _assemble(nodes, jac, flux, eta, eta_u, eta_uu, c, u, level):
    m = nodes.size
    D = differentiation_matrix(m)
    rj = 1.0 / np.sqrt(jac)
    stiff = (rj[:, None] * D) @ (flux[:, None] * D) * rj[None, :]
    Lt = -stiff - np.eye(m) + np.diag(2.0 * eta_uu)
    Lt = 0.5 * (Lt + Lt.T)
    w = np.sqrt(jac * 2.0 * math.pi / m)
    return OperatorMatrix(Lt, nodes, u, w, jac, D, eta, eta_u, eta_uu, c, level)


def _phase_nodes(n):
    # n - 1 (odd) equispaced angles of [-pi, pi) containing phi = 0
    m = n - 1 if n % 2 == 0 else n
    return -math.pi + math.pi / m + 2.0 * math.pi * np.arange(m) / m


def build_L_for_level(L: LevelEnergy, N: int = 256) -> OperatorMatrix:
    """Operator about the smooth wave on level L using phase-angle collocation."""
    if not 0.0 < L.E < L.E_c:
        raise DomainError("the linearized operator needs a smooth wave (E < E_c)")
    if N < 8:
        raise DomainError("N must be at least 8")
    phi = _phase_nodes(N)
    s, c2 = L.amplitude, L.c * L.c
    g = np.sqrt(c2 - 2.0 * s * np.cos(phi))
    eta = s * np.cos(phi)
    eta_u = -s * np.sin(phi) / g
    # eta'' from the traveling-wave ODE, exact on the orbit
    eta_uu = (eta_u ** 2 - eta) / g ** 2
    # u(phi): trapezoid-free spectral antiderivative of g
    m = phi.size
    k = np.fft.fftfreq(m, 1.0 / m)
    gh = np.fft.fft(g)
    ih = np.zeros_like(gh)
    nz = k != 0
    ih[nz] = gh[nz] / (1j * k[nz])
    u = np.fft.ifft(ih).real
    u = u - u[m // 2] + (gh[0].real / m) * phi
    return _assemble(phi, g, g, eta, eta_u, eta_uu, L.c, u, L)


def build_L_trivial(c: float, N: int = 256) -> OperatorMatrix:
    """Operator about eta = 0 on a uniform u-grid: symbol c^2 n^2 - 1."""
    u = _phase_nodes(N)
    one = np.ones_like(u)
    zero = np.zeros_like(u)
    return _assemble(u, one, c * c * one, zero, zero, zero, c, u, None)


def build_L(p: WaveProfile, N: int | None = None) -> OperatorMatrix:
    """Discretize L about a smooth (or trivial) profile; N defaults to the profile's grid size."""
    N = p.N if N is None else N
    if N % 2 or N < 64:
        raise DomainError("grid size N must be even and at least 64")
    if p.kind == "trivial":
        return build_L_trivial(p.c, N)
    if p.kind != "smooth":
        raise DomainError(f"L is only defined here for smooth profiles, not {p.kind!r}")
    return build_L_for_level(p.level, N)


def _counts(vals, zero_tol, guard=True):
    mags = np.abs(vals)
    if guard:
        amb = (mags >= 0.5 * zero_tol) & (mags <= 2.0 * zero_tol)
        if np.any(amb):
            raise AmbiguityError(
                f"eigenvalue(s) {vals[amb]} within the guard band of zero_tol = {zero_tol:.3e}")
    zero = mags < zero_tol
    return int(np.sum((vals < 0) & ~zero)), int(np.sum(zero)), int(np.sum((vals > 0) & ~zero))


def inertia(Lm, zero_tol: float | None = None, guard: bool = True) -> SpectrumReport:
    """Inertia (n_neg, n_zero, n_pos) of a symmetric operator matrix.

    ``zero_tol`` defaults to 1e-6 times the spectral norm; eigenvalues whose
    magnitude falls in [zero_tol / 2, 2 zero_tol] raise AmbiguityError.
    """
    A = Lm.entries if isinstance(Lm, OperatorMatrix) else np.asarray(Lm, dtype=float)
    vals = np.linalg.eigvalsh(A)
    if zero_tol is None:
        zero_tol = DEFAULT_ZERO_TOL_FACTOR * float(np.max(np.abs(vals)))
    return SpectrumReport(vals, *_counts(vals, zero_tol, guard), zero_tol)


def _constraint_basis(Lm: OperatorMatrix, include_kernel: bool):
    rows = [Lm.weights, Lm.to_basis(Lm.eta_uu)]
    if include_kernel:
        rows.append(Lm.to_basis(Lm.eta_u))
    return sla.null_space(np.vstack(rows))


def constrained_inertia(Lm: OperatorMatrix, zero_tol: float | None = None,
                        project_kernel: bool = False, guard: bool = True) -> SpectrumReport:
    """Inertia of L restricted to functions orthogonal to 1 and eta''.

    With ``project_kernel`` the translation mode eta' is projected out too, and
    the smallest eigenvalue measures coercivity.  The default zero tolerance
    is taken relative to the norm of the unconstrained matrix.
    """
    Q = _constraint_basis(Lm, project_kernel)
    vals = np.linalg.eigvalsh(Q.T @ Lm.entries @ Q)
    if zero_tol is None:
        zero_tol = DEFAULT_ZERO_TOL_FACTOR * Lm.norm2
    return SpectrumReport(vals, *_counts(vals, zero_tol, guard), zero_tol)


def constraint_matrix(Lm: OperatorMatrix, zero_tol: float | None = None) -> ConstraintMatrixA:
    """Assemble A by solving L x = 1 and L x = eta'' orthogonally to the kernel eta'."""
    k = Lm.to_basis(Lm.eta_u)
    Qk = sla.null_space(k[None, :])
    Lk = Qk.T @ Lm.entries @ Qk
    vals = np.linalg.eigvalsh(Lk)
    if zero_tol is None:
        zero_tol = DEFAULT_ZERO_TOL_FACTOR * Lm.norm2
    if np.min(np.abs(vals)) < zero_tol:
        raise ConvergenceError("deflated operator is singular: the kernel is not one-dimensional")
    F = np.column_stack([Lm.weights, Lm.to_basis(Lm.eta_uu)])
    X = Qk @ np.linalg.solve(Lk, Qk.T @ F)
    return ConstraintMatrixA(F.T @ X)


def zero_mean_projector(Lm: OperatorMatrix) -> np.ndarray:
    """Orthogonal projector onto mean-zero functions in the weighted basis."""
    w = Lm.weights
    return np.eye(w.size) - np.outer(w, w) / (w @ w)


def spectral_stability(Lm: OperatorMatrix, vectors: bool = False,
                       zero_tol: float | None = None) -> SpectrumReport:
    """Eigenvalues of d/du^{-1} L on mean-zero functions.

    Solved as the pencil (P L P) v = lambda (P d/du P) v on the orthogonal
    complement of the constants, where d/du is skew-symmetric in the weighted
    basis.  Eigenvectors, when requested, are returned as nodal values.
    """
    rj = 1.0 / np.sqrt(Lm.jacobian)
    S = rj[:, None] * Lm.D * rj[None, :]
    Q0 = sla.null_space(Lm.weights[None, :])
    Sq = Q0.T @ S @ Q0
    Lq = Q0.T @ Lm.entries @ Q0
    if vectors:
        vals, vecs = sla.eig(np.linalg.solve(Sq, Lq))
        vecs = (Q0 @ vecs) / Lm.weights[:, None]
    else:
        vals = sla.eigvals(np.linalg.solve(Sq, Lq))
        vecs = None
    if zero_tol is None:
        zero_tol = DEFAULT_ZERO_TOL_FACTOR * float(np.max(np.abs(vals)))
    re = np.real(vals)
    counts = _counts(re, zero_tol, guard=False)
    return SpectrumReport(vals, *counts, zero_tol, vecs)


def speed_derivative_check(c: float, N: int = 256, step: float = 1e-5) -> dict:
    """Residuals of the identities satisfied by d eta / dc along the smooth family.

    d eta / dc is formed by centered differences of the reconstructed
    profiles at c +/- step, sampled at the collocation points of the wave at
    c.  Reported: the residual of L (d eta/dc) = 2c eta'' relative to |2c eta''|,
    and the mass derivative <d eta / dc, 1>.
    """
    L = solve_level_for_speed(c, "smooth", tol=0.0)
    Lm = build_L_for_level(L, N)
    plus = reconstruct_profile(solve_level_for_speed(c + step, "smooth", tol=0.0), 16)
    minus = reconstruct_profile(solve_level_for_speed(c - step, "smooth", tol=0.0), 16)
    dc = (plus.eta_at(Lm.u) - minus.eta_at(Lm.u)) / (2.0 * step)
    rhs = 2.0 * c * Lm.eta_uu
    res = Lm.apply(dc) - rhs
    return {
        "relative_residual": math.sqrt(Lm.inner(res, res) / Lm.inner(rhs, rhs)),
        "dc_mass": Lm.inner(dc, np.ones_like(dc)),
        "dc_eta": dc,
        "operator": Lm,
    }
