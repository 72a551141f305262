"""Minimizing the overlap of two ellipsoids over the orthogonal group.

Objective, for ellipsoids in standard position with radii ``r`` (E) and
``rho`` (F) and a decreasing profile ``f``::

    J(U) = int I_E(U x) f(|x|_F^2) dmu_n(x),   |x|_F^2 = sum_i x_i^2 / rho_i^2

Substituting ``y = U x`` moves the rotation onto the smooth factor,
``J(U) = int_E f(|U^T y|_F^2) dmu_n(y)``, so every quadrature rule places its
nodes inside the fixed ellipsoid E and J is a smooth function of U.  The
derivative of ``J(U V_ij(a))`` at ``a = 0`` is

    2 (rho_i^-2 - rho_j^-2) int x_i x_j I_E(U x) f'(|x|_F^2) dmu_n(x),

evaluated on the same nodes, so it is the exact derivative of the discrete
objective.
"""
from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import special

from .bodies import OrthogonalMatrix
from .errors import ContractViolation, DimensionCapError
from .randomness import Stream, derive_stream, haar_matrix

GOLDEN = (math.sqrt(5) - 1) / 2
TIE_EPS = 1e-6


@dataclass(frozen=True)
class SmoothProfile:
    """Decreasing profile f with f(0) = 1 standing in for the indicator of F."""

    f: Callable
    f_prime: Callable
    beta: Optional[float] = None
    name: str = "custom"

    @classmethod
    def exponential(cls, beta: float = 1.0) -> "SmoothProfile":
        if not beta > 0:
            raise ContractViolation("beta must be positive")
        return cls(lambda t: np.exp(-beta * t), lambda t: -beta * np.exp(-beta * t), beta, f"exp(-{beta} t)")

    @classmethod
    def flat(cls) -> "SmoothProfile":
        """f = 1: the degenerate limit, not strictly decreasing (objective = mu(E))."""
        return cls(lambda t: np.ones_like(t), lambda t: np.zeros_like(t), 0.0, "flat")

    def is_valid(self, grid=None) -> bool:
        grid = np.linspace(1e-3, 50, 500) if grid is None else np.asarray(grid)
        return bool(abs(float(self.f(np.array([0.0]))[0]) - 1) < 1e-12 and np.all(self.f_prime(grid) < 0)
                    and float(self.f(np.array([1e4]))[0]) < 1e-6)


@dataclass(frozen=True)
class QuadratureSpec:
    """How the objective integral is discretized.

    ``polar``  product rule in ellipsoidal coordinates y = t diag(r) w (default)
    ``gh``     tensor Gauss-Hermite restricted to E, L points per axis (n <= 4)
    ``mc``     frozen Monte Carlo sample of size ``level``
    """

    kind: str = "polar"
    level: int = 40
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("polar", "gh", "mc"):
            raise ContractViolation(f"unknown quadrature kind {self.kind!r}")
        if self.level < 1:
            raise ContractViolation("quadrature level must be >= 1")

    @classmethod
    def parse(cls, text: str, seed: int = 0) -> "QuadratureSpec":
        kind, _, level = text.partition(":")
        try:
            return cls(kind, int(level) if level else cls.level, seed)
        except ValueError:
            raise ContractViolation(f"bad quadrature spec {text!r}; expected gh:L, polar:L or mc:N") from None

    @classmethod
    def default(cls, n: int) -> "QuadratureSpec":
        if n <= 2:
            return cls("polar", 40)
        if n == 3:
            return cls("polar", 28)
        if n == 4:
            return cls("polar", 14)
        return cls("mc", 200_000)

    def __str__(self):
        return f"{self.kind}:{self.level}"


def _sphere_rule(n: int, L: int):
    """Nodes and weights for surface measure on S^{n-1}."""
    if n == 1:
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    if n == 2:
        m = 2 * L
        phi = 2 * np.pi * np.arange(m) / m
        return np.column_stack([np.cos(phi), np.sin(phi)]), np.full(m, 2 * np.pi / m)
    a = (n - 3) / 2.0
    u, wu = special.roots_jacobi(L, a, a)
    sub, wsub = _sphere_rule(n - 1, L)
    s = np.sqrt(1 - u**2)
    pts = np.concatenate([u[:, None, None] * np.ones((1, len(wsub), 1)),
                          s[:, None, None] * sub[None, :, :]], axis=2).reshape(-1, n)
    return pts, np.outer(wu, wsub).ravel()


@functools.lru_cache(maxsize=32)
def _nodes_cached(radii: tuple, kind: str, level: int, seed: int):
    r = np.asarray(radii)
    n = r.size
    if kind == "gh":
        if n > 4:
            raise DimensionCapError("tensor Gauss-Hermite quadrature is limited to n <= 4")
        x, w = special.roots_hermitenorm(level)
        w = w / math.sqrt(2 * math.pi)
        Y = np.array(list(itertools.product(x, repeat=n)))
        W = np.prod(np.array(list(itertools.product(w, repeat=n))), axis=1)
        keep = np.sum((Y / r) ** 2, axis=1) <= 1.0
        return Y[keep], W[keep]
    if kind == "polar":
        if n > 6:
            raise DimensionCapError("polar product quadrature is limited to n <= 6; use mc")
        t, wt = special.roots_legendre(level)
        t, wt = 0.5 * (t + 1), 0.5 * wt
        omega, wo = _sphere_rule(n, level)
        Y = (t[:, None, None] * (omega * r)[None, :, :]).reshape(-1, n)
        dens = np.exp(-0.5 * np.sum(Y**2, axis=1)) / (2 * math.pi) ** (n / 2)
        W = (np.outer(wt * t ** (n - 1), wo).ravel()) * float(np.prod(r)) * dens
        return Y, W
    gen = derive_stream(Stream(seed), "rotopt_quadrature").generator
    Y = gen.standard_normal((level, n))
    keep = np.sum((Y / r) ** 2, axis=1) <= 1.0
    return Y[keep], np.full(int(keep.sum()), 1.0 / level)


def quadrature_nodes(r, quad: QuadratureSpec):
    """Nodes y inside E and weights for int_E h(y) dmu_n(y)."""
    return _nodes_cached(tuple(float(v) for v in r), quad.kind, quad.level, quad.seed)


def _matrix(U) -> np.ndarray:
    return U.entries if isinstance(U, OrthogonalMatrix) else np.asarray(U, dtype=float)


def f_norm_sq(x, rho) -> float:
    x = np.asarray(x, dtype=float)
    rho = np.asarray(rho, dtype=float)
    if x.shape[-1] != rho.shape[0]:
        raise ContractViolation("dimension mismatch between point and radii")
    if np.any(rho <= 0):
        raise ContractViolation("radii must be positive")
    return np.sum((x / rho) ** 2, axis=-1)


def givens(n: int, i: int, j: int, alpha: float) -> OrthogonalMatrix:
    """Rotation by alpha in the (e_i, e_j) plane: x_i -> x_i cos a - x_j sin a, x_j -> x_i sin a + x_j cos a."""
    if i == j:
        raise ContractViolation("givens needs distinct indices")
    return OrthogonalMatrix(_givens_array(n, i, j, alpha))


def _givens_array(n, i, j, alpha):
    V = np.eye(n)
    c, s = math.cos(alpha), math.sin(alpha)
    V[i, i], V[i, j], V[j, i], V[j, j] = c, -s, s, c
    return V


def _check_radii(r, rho, quad):
    r = np.asarray(r, dtype=float)
    rho = np.asarray(rho, dtype=float)
    if r.shape != rho.shape or r.ndim != 1:
        raise ContractViolation("E and F radii must be vectors of equal length")
    if np.any(r <= 0) or np.any(rho <= 0):
        raise ContractViolation("radii must be positive")
    if quad.kind == "gh" and r.size > 4:
        raise DimensionCapError("tensor Gauss-Hermite quadrature is limited to n <= 4")
    return r, rho


def smoothed_objective(U, r, profile: SmoothProfile, rho, quad: Optional[QuadratureSpec] = None) -> float:
    r, rho = _check_radii(r, rho, quad or QuadratureSpec.default(len(r)))
    quad = quad or QuadratureSpec.default(r.size)
    Y, W = quadrature_nodes(r, quad)
    X = Y @ _matrix(U)
    return float(W @ profile.f(np.sum((X / rho) ** 2, axis=1)))


def objective_gradient(U, r, profile: SmoothProfile, rho, quad: Optional[QuadratureSpec] = None) -> np.ndarray:
    """Antisymmetric matrix G, G[i, j] = d/da J(U V_ij(a)) at a = 0."""
    r, rho = _check_radii(r, rho, quad or QuadratureSpec.default(len(r)))
    quad = quad or QuadratureSpec.default(r.size)
    Y, W = quadrature_nodes(r, quad)
    X = Y @ _matrix(U)
    weighted = X * (W * profile.f_prime(np.sum((X / rho) ** 2, axis=1)))[:, None]
    moments = weighted.T @ X
    inv = rho**-2.0
    G = 2.0 * (inv[:, None] - inv[None, :]) * moments
    np.fill_diagonal(G, 0.0)
    return G


def diagonality_diagnostic(U, r) -> float:
    """Frobenius norm of the off-diagonal part of U^T diag(r^-2) U."""
    U = _matrix(U)
    M = U.T @ (U * (np.asarray(r, dtype=float) ** -2.0)[:, None])
    off = M - np.diag(np.diag(M))
    return float(np.sqrt(np.sum(off**2)))


def permutation_matrix(perm) -> np.ndarray:
    n = len(perm)
    P = np.zeros((n, n))
    P[np.arange(n), list(perm)] = 1.0
    return P


def permutation_scan(r, rho, profile: SmoothProfile, quad: Optional[QuadratureSpec] = None) -> dict:
    """Objective at every axis pairing (n! permutation matrices)."""
    r = np.asarray(r, dtype=float)
    n = r.size
    if n > 6:
        raise DimensionCapError("permutation scan enumerates n!; limited to n <= 6")
    quad = quad or QuadratureSpec.default(n)
    table = [(perm, smoothed_objective(permutation_matrix(perm), r, profile, rho, quad))
             for perm in itertools.permutations(range(n))]
    best = min(table, key=lambda kv: kv[1])
    return {"best_permutation": best[0], "best_value": best[1], "table": table}


def perturb_ties(radii, eps: float = TIE_EPS):
    """Add k*eps to the k-th repeat of a radius; returns (new radii, list of (index, shift))."""
    radii = np.array(radii, dtype=float)
    out = radii.copy()
    shifts = []
    seen: dict = {}
    for idx, v in enumerate(radii):
        k = seen.get(v, 0)
        if k:
            out[idx] = v + k * eps
            shifts.append((idx, k * eps))
        seen[v] = k + 1
    return out, shifts


@dataclass
class RotOptConfig:
    max_iter: int = 500
    grad_tol: float = 1e-8
    coarse_points: int = 48
    line_tol: float = 1e-10
    reorthonormalize_every: int = 25


@dataclass
class RotOptResult:
    U_star: OrthogonalMatrix
    value: float
    diagnostic: float
    trace: list
    permutation_gap: Optional[float] = None
    converged: bool = False
    iterations: int = 0
    grad_norm: float = 0.0
    best_permutation: Optional[tuple] = None
    perturbation: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "U_star": self.U_star.entries.tolist(),
            "value": self.value,
            "diagnostic": self.diagnostic,
            "trace": [list(t) for t in self.trace],
            "permutation_gap": self.permutation_gap,
            "best_permutation": None if self.best_permutation is None else list(self.best_permutation),
            "converged": self.converged,
            "iterations": self.iterations,
            "grad_norm": self.grad_norm,
            "perturbation": self.perturbation,
            "config": self.config,
        }


def _golden(phi, a, b, tol):
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = phi(c), phi(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = phi(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = phi(d)
    return (c, fc) if fc <= fd else (d, fd)


def line_search(phi, coarse_points=48, tol=1e-10):
    """Minimize a pi-periodic phi over (-pi/2, pi/2]: coarse scan, then golden section."""
    h = math.pi / coarse_points
    grid = [-math.pi / 2 + h * (k + 1) for k in range(coarse_points)]
    vals = [phi(a) for a in grid]
    k = int(np.argmin(vals))
    a, fa = _golden(phi, grid[k] - h, grid[k] + h, tol)
    if vals[k] < fa:
        a, fa = grid[k], vals[k]
    return a, fa


def minimize_over_rotations(r, rho, profile: Optional[SmoothProfile] = None, quad: Optional[QuadratureSpec] = None,
                            cfg: Optional[RotOptConfig] = None, U0=None, stream: Optional[Stream] = None,
                            scan_permutations: bool = True) -> RotOptResult:
    """Coordinate descent over Givens pairs, steepest pair first."""
    profile = profile or SmoothProfile.exponential()
    cfg = cfg or RotOptConfig()
    r0, rho0 = np.asarray(r, dtype=float), np.asarray(rho, dtype=float)
    r, shift_r = perturb_ties(r0)
    rho, shift_rho = perturb_ties(rho0)
    r, rho = _check_radii(r, rho, quad or QuadratureSpec.default(r0.size))
    n = r.size
    quad = quad or QuadratureSpec.default(n)
    if U0 is not None:
        U = _matrix(U0).copy()
    elif stream is not None:
        U = haar_matrix(derive_stream(stream, "rotopt_start").generator, n)
    else:
        U = np.eye(n)

    def J(M):
        return smoothed_objective(M, r, profile, rho, quad)

    value = J(U)
    trace = [(0, value, diagonality_diagnostic(U, r))]
    converged = False
    gmax = 0.0
    it = 0
    while it < cfg.max_iter:
        G = objective_gradient(U, r, profile, rho, quad)
        iu, ju = np.triu_indices(n, 1)
        g = np.abs(G[iu, ju])
        gmax = float(g.max()) if g.size else 0.0
        if gmax <= cfg.grad_tol:
            converged = True
            break
        k = int(np.argmax(g))
        i, j = int(iu[k]), int(ju[k])
        alpha, fa = line_search(lambda a: J(U @ _givens_array(n, i, j, a)), cfg.coarse_points, cfg.line_tol)
        if not fa < value:
            # the steepest pair admits no decrease at line-search resolution
            break
        it += 1
        U = U @ _givens_array(n, i, j, alpha)
        if it % cfg.reorthonormalize_every == 0:
            U = OrthogonalMatrix.nearest(U).entries
        value = J(U)
        trace.append((it, value, diagonality_diagnostic(U, r)))
    U_star = OrthogonalMatrix.nearest(U) if it else OrthogonalMatrix(U)
    result = RotOptResult(
        U_star, value, diagonality_diagnostic(U_star, r), trace, converged=converged, iterations=it,
        grad_norm=gmax,
        perturbation={"e_radii": [list(s) for s in shift_r], "f_radii": [list(s) for s in shift_rho], "eps": TIE_EPS},
        config={"quad": str(quad), "profile": profile.name, "max_iter": cfg.max_iter, "grad_tol": cfg.grad_tol,
                "e_radii": r.tolist(), "f_radii": rho.tolist()})
    if scan_permutations and n <= 6:
        scan = permutation_scan(r, rho, profile, quad)
        result.permutation_gap = value - scan["best_value"]
        result.best_permutation = tuple(scan["best_permutation"])
    return result
