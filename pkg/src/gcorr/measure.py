"""Gaussian measures, Lebesgue volumes and the constants they need.

Monte Carlo estimators split the sample into fixed-size chunks.  Chunk ``c``
draws from ``derive_stream(stream, label, c)`` and returns integer hit counts
(or float partial sums), which are reduced in chunk order.  Results therefore
depend on the seed and the chunk size but never on the number of workers.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate, special

from .bodies import AxisBox, Ball, Body, Ellipsoid, Scaled
from .errors import AccuracyError, ContractViolation, DimensionMismatch
from .randomness import DEFAULT_CHUNK, Stream, chunk_sizes, derive_stream, uniform_sphere

METHODS = ("exact", "mc", "quadrature")


@dataclass(frozen=True)
class Estimate:
    value: float
    std_error: float = 0.0
    samples: int = 0
    method: str = "exact"

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.std_error < 0:
            raise ValueError("standard error must be nonnegative")
        if self.method == "exact" and self.std_error != 0:
            raise ValueError("exact estimates carry zero standard error")

    def to_json(self) -> dict:
        return {"value": self.value, "se": self.std_error, "n": self.samples, "method": self.method}

    @classmethod
    def from_json(cls, obj) -> "Estimate":
        return cls(float(obj["value"]), float(obj["se"]), int(obj["n"]), obj["method"])


def exact(value: float) -> Estimate:
    return Estimate(float(value), 0.0, 0, "exact")


# ----------------------------------------------------------------------------
# measures


@dataclass(frozen=True, eq=False)
class GaussianSpec:
    """Standard Gaussian on R^n, or the law of T z for a square nonsingular T."""

    n: int
    factor: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.n < 1:
            raise ContractViolation("dimension must be >= 1")
        if self.factor is not None:
            T = np.array(self.factor, dtype=float)
            if T.shape != (self.n, self.n):
                raise DimensionMismatch(f"factor must be {self.n}x{self.n}, got {T.shape}")
            if abs(np.linalg.det(T)) < 1e-12:
                raise ContractViolation("factor matrix must be nonsingular")
            T.setflags(write=False)
            object.__setattr__(self, "factor", T)

    @classmethod
    def standard(cls, n: int) -> "GaussianSpec":
        return cls(n)

    @classmethod
    def shaped(cls, T) -> "GaussianSpec":
        T = np.asarray(T, dtype=float)
        return cls(T.shape[0], T)

    @property
    def dim(self) -> int:
        return self.n

    @property
    def is_standard(self) -> bool:
        return self.factor is None

    @property
    def covariance(self) -> np.ndarray:
        return np.eye(self.n) if self.factor is None else self.factor @ self.factor.T

    def sample(self, gen: np.random.Generator, m: int) -> np.ndarray:
        z = gen.standard_normal((m, self.n))
        return z if self.factor is None else z @ self.factor.T

    def to_json(self) -> dict:
        return {"kind": "gaussian", "n": self.n,
                "factor": None if self.factor is None else self.factor.tolist()}


@dataclass(frozen=True, eq=False)
class RadialMeasure:
    """Rotation-invariant probability: radius ~ ``radial_cdf``, direction uniform on the sphere."""

    n: int
    radial_cdf: Callable[[np.ndarray], np.ndarray]
    radial_sampler: Callable[[np.random.Generator, int], np.ndarray]
    name: str = "radial"

    @property
    def dim(self) -> int:
        return self.n

    @classmethod
    def gaussian(cls, n: int) -> "RadialMeasure":
        return cls(n, lambda r: special.gammainc(n / 2, np.square(r) / 2),
                   lambda gen, m: np.sqrt(gen.chisquare(n, m)), "gaussian")

    @classmethod
    def uniform_ball(cls, n: int, radius: float = 1.0) -> "RadialMeasure":
        return cls(n, lambda r: np.clip(np.asarray(r) / radius, 0, 1) ** n,
                   lambda gen, m: radius * gen.random(m) ** (1.0 / n), f"uniform_ball({radius})")

    @classmethod
    def exponential(cls, n: int, scale: float = 1.0) -> "RadialMeasure":
        return cls(n, lambda r: 1 - np.exp(-np.asarray(r) / scale),
                   lambda gen, m: gen.exponential(scale, m), f"exponential({scale})")

    def cdf_is_valid(self, grid=None) -> bool:
        grid = np.linspace(0, 50, 501) if grid is None else np.asarray(grid)
        vals = np.asarray(self.radial_cdf(grid), dtype=float)
        tail = abs(self.radial_cdf(np.array([1e6]))[0] - 1)
        return bool(vals[0] >= 0 and np.all(np.diff(vals) >= -1e-15) and tail < 1e-9)

    def sample(self, gen: np.random.Generator, m: int) -> np.ndarray:
        theta = uniform_sphere(gen, m, self.n)
        return theta * np.asarray(self.radial_sampler(gen, m))[:, None]

    def to_json(self) -> dict:
        return {"kind": "radial", "n": self.n, "name": self.name}


def as_spec(spec_or_n) -> GaussianSpec:
    return spec_or_n if hasattr(spec_or_n, "sample") else GaussianSpec.standard(int(spec_or_n))


# ----------------------------------------------------------------------------
# chunked common-random-number engine


def crn_reduce(stream: Stream, label: str, N: int, sampler: Callable, reducer: Callable,
               chunk_size: int = DEFAULT_CHUNK, workers: int = 1):
    """Map ``reducer(sampler(gen, m))`` over chunks and sum the results in chunk order."""
    if N < 1:
        raise ContractViolation("sample count must be >= 1")
    sizes = chunk_sizes(N, chunk_size)

    def run(c):
        gen = derive_stream(stream, label, c).generator
        return reducer(sampler(gen, sizes[c]))

    if workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, range(len(sizes))))
    else:
        parts = [run(c) for c in range(len(sizes))]
    total = parts[0]
    for p in parts[1:]:
        total = total + p
    return total


def _cocount_reducer(indicators: Sequence[Callable]):
    def reduce(X):
        B = np.column_stack([np.asarray(f(X), dtype=float) for f in indicators])
        return np.rint(B.T @ B).astype(np.int64)
    return reduce


@dataclass(frozen=True, eq=False)
class IndicatorMoments:
    """Co-hit counts of K indicators on one shared sample of size N."""

    N: int
    counts: np.ndarray

    @property
    def means(self) -> np.ndarray:
        return np.diag(self.counts) / self.N

    @property
    def cov(self) -> np.ndarray:
        p = self.means
        return self.counts / self.N - np.outer(p, p)

    def estimate(self, k: int) -> Estimate:
        p = self.means[k]
        return Estimate(float(p), math.sqrt(max(p * (1 - p), 0.0) / self.N), self.N, "mc")

    def delta_se(self, grad) -> float:
        """Delta-method standard error of a smooth function of the means with gradient ``grad``."""
        g = np.asarray(grad, dtype=float)
        var = float(g @ self.cov @ g) / self.N
        return math.sqrt(max(var, 0.0))


def crn_indicators(indicators: Sequence[Callable], sampler, N: int, stream: Stream, label: str,
                   chunk_size: int = DEFAULT_CHUNK, workers: int = 1) -> IndicatorMoments:
    counts = crn_reduce(stream, label, N, sampler.sample if hasattr(sampler, "sample") else sampler,
                        _cocount_reducer(indicators), chunk_size, workers)
    return IndicatorMoments(N, counts)


# ----------------------------------------------------------------------------
# exact values


def gauss_1d_interval(s: float) -> Estimate:
    """mu_1([-s, s])."""
    if s < 0:
        raise ContractViolation(f"halfwidth must be nonnegative, got {s}")
    if math.isinf(s):
        return exact(1.0)
    return exact(math.erf(s / math.sqrt(2.0)))


def box_measure(halfwidths, spec: Optional[GaussianSpec] = None) -> Estimate:
    w = np.asarray(halfwidths, dtype=float)
    if spec is not None and not spec.is_standard:
        raise ContractViolation("box_measure needs the standard Gaussian")
    if np.any(w < 0):
        raise ContractViolation("halfwidths must be nonnegative")
    value = 1.0
    for wi in w:
        value *= gauss_1d_interval(float(wi)).value
    return exact(value)


def ball_measure(n: int, r: float) -> Estimate:
    """P(chi^2_n <= r^2) through the regularized lower incomplete gamma function."""
    if r < 0:
        raise ContractViolation("radius must be nonnegative")
    if n < 1:
        raise ContractViolation("dimension must be >= 1")
    return exact(float(special.gammainc(n / 2.0, r * r / 2.0)))


def ball_volume(n: int, r: float) -> float:
    if r < 0:
        raise ContractViolation("radius must be nonnegative")
    if r == 0:
        return 0.0
    return math.exp(0.5 * n * math.log(math.pi) + n * math.log(r) - math.lgamma(1 + n / 2.0))


def rho_n(n: int) -> float:
    """Radius with m(2 rho_n B) = (2 pi)^{n/2}; equals Gamma(1 + n/2)^{1/n} / sqrt 2."""
    if n < 1:
        raise ContractViolation("dimension must be >= 1")
    return math.exp(math.lgamma(1 + n / 2.0) / n) / math.sqrt(2.0)


def quadratic_form_cdf(weights, x: float = 1.0, tol: float = 1e-8) -> tuple[float, float]:
    """P(sum_i w_i z_i^2 <= x) for positive weights, by inverting the characteristic function.

    Returns ``(value, error_bound)``.  The integral
    ``1/2 - (1/pi) int_0^inf sin(theta(u)) / (u rho(u)) du`` is split at a point
    ``a``: ``[0, a]`` by adaptive quadrature, the oscillatory tail by QAWF after
    expanding ``sin(c(u) - x u / 2)``.
    """
    lam = np.asarray(weights, dtype=float)
    if np.any(lam <= 0):
        raise ContractViolation("quadratic form weights must be positive")
    if x <= 0:
        return 0.0, 0.0

    def phase(u):
        return 0.5 * float(np.sum(np.arctan(lam * u)))

    def amp(u):
        return u * float(np.prod((1.0 + (lam * u) ** 2) ** 0.25))

    def head(u):
        if u == 0.0:
            return 0.5 * (float(lam.sum()) - x)
        return math.sin(phase(u) - 0.5 * x * u) / amp(u)

    omega = 0.5 * x
    a = 8.0 * math.pi / x
    i1, e1 = integrate.quad(head, 0.0, a, limit=500, epsabs=1e-14, epsrel=1e-13)
    i2, e2 = integrate.quad(lambda u: math.sin(phase(u)) / amp(u), a, np.inf,
                            weight="cos", wvar=omega, limlst=200, epsabs=1e-14)
    i3, e3 = integrate.quad(lambda u: math.cos(phase(u)) / amp(u), a, np.inf,
                            weight="sin", wvar=omega, limlst=200, epsabs=1e-14)
    value = 0.5 - (i1 + i2 - i3) / math.pi
    err = (e1 + e2 + e3) / math.pi
    value = min(max(value, 0.0), 1.0)
    if err > tol:
        raise AccuracyError(f"quadratic-form CDF error bound {err:.2e} exceeds {tol:.1e}", best=value)
    return value, err


def ellipsoid_measure(radii, tol: float = 1e-8) -> Estimate:
    """mu_n of the ellipsoid with the given semi-axes (orientation is irrelevant)."""
    r = np.asarray(radii, dtype=float)
    if r.ndim != 1 or np.any(r <= 0):
        raise ContractViolation("radii must be a positive vector")
    value, err = quadratic_form_cdf(1.0 / r**2, 1.0, tol)
    return Estimate(value, err, 0, "quadrature")


# ----------------------------------------------------------------------------
# Monte Carlo


def _dims(body: Body, spec) -> int:
    n = spec.dim
    if body.dim is not None and body.dim != n:
        raise DimensionMismatch(f"{body.kind} has dimension {body.dim}, measure has dimension {n}")
    return n


def mc_measure(body: Body, spec, N: int, stream: Stream, chunk_size: int = DEFAULT_CHUNK,
               workers: int = 1) -> Estimate:
    spec = as_spec(spec)
    _dims(body, spec)
    mom = crn_indicators([body.indicator], spec, N, stream, "mc_measure", chunk_size, workers)
    return mom.estimate(0)


@dataclass(frozen=True, eq=False)
class JointEstimate:
    """mu(A), mu(B), mu(A n B) from one common sample."""

    pA: Estimate
    pB: Estimate
    pAB: Estimate
    cov_terms: np.ndarray = field(repr=False)

    @property
    def slack(self) -> float:
        return self.pAB.value - self.pA.value * self.pB.value

    @property
    def slack_se(self) -> float:
        """Delta-method SE of pAB - pA pB, gradient (-pB, -pA, 1)."""
        g = np.array([-self.pB.value, -self.pA.value, 1.0])
        var = float(g @ self.cov_terms @ g) / max(self.pAB.samples, 1)
        return math.sqrt(max(var, 0.0))


def mc_joint(a: Body, b: Body, spec, N: int, stream: Stream, chunk_size: int = DEFAULT_CHUNK,
             workers: int = 1) -> JointEstimate:
    spec = as_spec(spec)
    _dims(a, spec), _dims(b, spec)

    def both(X):
        return a.indicator(X) & b.indicator(X)

    # evaluating a and b twice is cheaper to reason about than caching across closures
    mom = crn_indicators([a.indicator, b.indicator, both], spec, N, stream, "mc_joint", chunk_size, workers)
    return JointEstimate(mom.estimate(0), mom.estimate(1), mom.estimate(2), mom.cov)


def _exact_volume(body: Body, n: int) -> Optional[float]:
    if isinstance(body, Ball):
        return ball_volume(n, body.radius)
    if isinstance(body, AxisBox):
        return float(np.prod(2.0 * body.halfwidths))
    if isinstance(body, Ellipsoid):
        return ball_volume(n, 1.0) * float(np.prod(body.radii))
    if isinstance(body, Scaled):
        inner = _exact_volume(body.inner, n)
        return None if inner is None else body.factor**n * inner
    return None


def lebesgue_volume(body: Body, N: int, stream: Stream, n: Optional[int] = None,
                    chunk_size: int = DEFAULT_CHUNK, workers: int = 1) -> Estimate:
    n = body.dim if n is None else n
    if n is None:
        raise ContractViolation("dimension-free body needs an explicit dimension")
    if body.dim is not None and body.dim != n:
        raise DimensionMismatch(f"body dimension {body.dim} != {n}")
    closed = _exact_volume(body, n)
    if closed is not None:
        return exact(closed)
    R = body.bounding_radius()
    if not math.isfinite(R):
        raise ContractViolation(f"{body.kind} is unbounded; no finite Lebesgue volume")

    def sampler(gen, m):
        return uniform_sphere(gen, m, n) * (R * gen.random(m) ** (1.0 / n))[:, None]

    mom = crn_indicators([body.indicator], sampler, N, stream, "lebesgue_volume", chunk_size, workers)
    p = mom.estimate(0)
    V = ball_volume(n, R)
    return Estimate(V * p.value, V * p.std_error, N, "mc")


def marginal_profile(body: Body, axis: int, grid, spec, N: int, stream: Stream,
                     chunk_size: int = DEFAULT_CHUNK, workers: int = 1) -> list[Estimate]:
    """Slice function t -> mu_{n-1}{y : (t, y) in body} on a grid, one shared y-sample."""
    spec = as_spec(spec)
    if not spec.is_standard:
        raise ContractViolation("marginal_profile conditions on a coordinate of the standard Gaussian")
    n = _dims(body, spec)
    if not 0 <= axis < n:
        raise ContractViolation(f"axis {axis} out of range for dimension {n}")
    grid = np.asarray(grid, dtype=float)
    if np.any(np.diff(grid) < 0):
        raise ContractViolation("grid must be sorted")

    def sampler(gen, m):
        return gen.standard_normal((m, n - 1))

    def reducer(Y):
        X = np.insert(Y, axis, 0.0, axis=1)
        out = np.zeros(len(grid), dtype=np.int64)
        for k, t in enumerate(grid):
            X[:, axis] = t
            out[k] = np.count_nonzero(body.indicator(X))
        return out

    if n == 1:
        return [exact(1.0 if body.indicator(np.array([[t]]))[0] else 0.0) for t in grid]
    hits = crn_reduce(stream, "marginal_profile", N, sampler, reducer, chunk_size, workers)
    out = []
    for h in hits:
        p = h / N
        out.append(Estimate(float(p), math.sqrt(p * (1 - p) / N), N, "mc"))
    return out
