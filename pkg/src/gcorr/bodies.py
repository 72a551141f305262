"""Centered symmetric convex bodies.

Every body answers batched membership (:meth:`Body.indicator` on an ``(m, n)``
array) and, where a closed form exists, its support function.  Bodies are
immutable; derived bodies hold references to their inner bodies.

Sets are closed: boundary points are inside.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import BodyParseError, ContractViolation, DimensionMismatch, NoClosedFormSupport

ORTHO_TOL = 1e-12


def _frozen(a, ndim=None) -> np.ndarray:
    arr = np.array(a, dtype=float)
    if ndim is not None and arr.ndim != ndim:
        raise ContractViolation(f"expected a {ndim}-d array, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


class OrthogonalMatrix:
    """An n-by-n matrix with U^T U = I to within ``ORTHO_TOL`` per entry."""

    __slots__ = ("entries",)

    def __init__(self, entries, tol: float = ORTHO_TOL):
        a = np.array(entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ContractViolation(f"orthogonal matrix must be square, got shape {a.shape}")
        err = np.max(np.abs(a.T @ a - np.eye(a.shape[0])), initial=0.0)
        if err > tol:
            raise ContractViolation(f"matrix is not orthogonal (max |U^T U - I| = {err:.3g})")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    def __setattr__(self, key, value):
        raise AttributeError("OrthogonalMatrix is immutable")

    @classmethod
    def identity(cls, n: int) -> "OrthogonalMatrix":
        return cls(np.eye(n))

    @classmethod
    def nearest(cls, a) -> "OrthogonalMatrix":
        """Re-orthonormalize (polar factor), used after long chains of Givens updates."""
        u, _, vt = np.linalg.svd(np.asarray(a, dtype=float))
        return cls(u @ vt)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def T(self) -> "OrthogonalMatrix":
        return OrthogonalMatrix(self.entries.T)

    def __matmul__(self, other):
        if isinstance(other, OrthogonalMatrix):
            prod = self.entries @ other.entries
            try:
                return OrthogonalMatrix(prod)
            except ContractViolation:
                return OrthogonalMatrix.nearest(prod)
        return self.entries @ np.asarray(other)

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)

    def __repr__(self):
        return f"OrthogonalMatrix({self.entries.tolist()!r})"


def as_orthogonal(u) -> OrthogonalMatrix:
    return u if isinstance(u, OrthogonalMatrix) else OrthogonalMatrix(u)


class Body:
    """Base class; subclasses are the variants listed in ``KINDS``."""

    kind = "body"

    @property
    def dim(self) -> Optional[int]:
        return None

    def indicator(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def contains(self, x) -> bool:
        return contains(self, x)

    def support(self, u) -> float:
        raise NoClosedFormSupport(f"{self.kind} has no closed-form support function")

    def support_many(self, U: np.ndarray) -> np.ndarray:
        """Support function evaluated at each row of ``U``."""
        return np.array([self.support(u) for u in U])

    def bounding_radius(self) -> float:
        return math.inf

    def scaled(self, c: float) -> "Body":
        return Scaled(c, self)

    def rotated(self, U: np.ndarray) -> "Body":
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError

    def _check_points(self, X):
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        d = self.dim
        if d is not None and X.shape[1] != d:
            raise DimensionMismatch(f"{self.kind} has dimension {d}, points have dimension {X.shape[1]}")
        return X


@dataclass(frozen=True, eq=False)
class Slab(Body):
    """{x : |<x, u>| <= s} with u a unit vector."""

    direction: np.ndarray
    halfwidth: float
    kind = "slab"

    def __post_init__(self):
        d = _frozen(self.direction, 1)
        norm = np.linalg.norm(d)
        if norm == 0:
            raise ContractViolation("slab direction must be nonzero")
        if abs(norm - 1.0) > 1e-12:
            d = _frozen(d / norm)
        object.__setattr__(self, "direction", d)
        if not self.halfwidth > 0:
            raise ContractViolation("slab halfwidth must be positive")

    @property
    def dim(self):
        return self.direction.shape[0]

    def indicator(self, X):
        X = self._check_points(X)
        return np.abs(X @ self.direction) <= self.halfwidth

    def support(self, u):
        u = np.asarray(u, dtype=float)
        c = abs(float(u @ self.direction))
        if self.dim == 1 or abs(c - 1.0) <= 1e-12:
            return self.halfwidth * c
        return math.inf

    def support_many(self, U):
        c = np.abs(U @ self.direction)
        if self.dim == 1:
            return self.halfwidth * c
        return np.where(np.abs(c - 1.0) <= 1e-12, self.halfwidth * c, math.inf)

    def bounding_radius(self):
        return self.halfwidth if self.dim == 1 else math.inf

    def scaled(self, c):
        return Slab(self.direction, self.halfwidth * c)

    def rotated(self, U):
        return Slab(U @ self.direction, self.halfwidth)

    def to_json(self):
        return {"kind": self.kind, "direction": self.direction.tolist(), "halfwidth": self.halfwidth}


@dataclass(frozen=True, eq=False)
class AxisBox(Body):
    halfwidths: np.ndarray
    kind = "axis_box"

    def __post_init__(self):
        w = _frozen(self.halfwidths, 1)
        if not np.all(w > 0):
            raise ContractViolation("box halfwidths must be positive")
        object.__setattr__(self, "halfwidths", w)

    @property
    def dim(self):
        return self.halfwidths.shape[0]

    def indicator(self, X):
        X = self._check_points(X)
        return np.all(np.abs(X) <= self.halfwidths, axis=1)

    def support(self, u):
        return float(np.abs(np.asarray(u, dtype=float)) @ self.halfwidths)

    def support_many(self, U):
        return np.abs(U) @ self.halfwidths

    def bounding_radius(self):
        return float(np.linalg.norm(self.halfwidths))

    def scaled(self, c):
        return AxisBox(self.halfwidths * c)

    def rotated(self, U):
        # |(U^T x)_i| <= w_i  <=>  |<U e_i, x>| / w_i <= 1
        return SymPolytope((U / self.halfwidths).T)

    def to_json(self):
        return {"kind": self.kind, "halfwidths": self.halfwidths.tolist()}


@dataclass(frozen=True, eq=False)
class Ball(Body):
    """Euclidean ball; dimension-agnostic."""

    radius: float
    kind = "ball"

    def __post_init__(self):
        if not self.radius > 0:
            raise ContractViolation("ball radius must be positive")

    def indicator(self, X):
        X = self._check_points(X)
        return np.einsum("ij,ij->i", X, X) <= self.radius**2

    def support(self, u):
        return self.radius * float(np.linalg.norm(u))

    def support_many(self, U):
        return self.radius * np.linalg.norm(U, axis=1)

    def bounding_radius(self):
        return float(self.radius)

    def scaled(self, c):
        return Ball(self.radius * c)

    def rotated(self, U):
        return self

    def to_json(self):
        return {"kind": self.kind, "radius": self.radius}


@dataclass(frozen=True, eq=False)
class Ellipsoid(Body):
    """{x : sum_i <row_i, x>^2 / r_i^2 <= 1}, rows taken from ``orientation``."""

    radii: np.ndarray
    orientation: OrthogonalMatrix = None

    kind = "ellipsoid"

    def __post_init__(self):
        r = _frozen(self.radii, 1)
        if not np.all(r > 0):
            raise ContractViolation("ellipsoid radii must be positive")
        object.__setattr__(self, "radii", r)
        o = self.orientation
        o = OrthogonalMatrix.identity(r.shape[0]) if o is None else as_orthogonal(o)
        if o.n != r.shape[0]:
            raise DimensionMismatch(f"orientation is {o.n}x{o.n} but there are {r.shape[0]} radii")
        object.__setattr__(self, "orientation", o)

    @classmethod
    def from_shape(cls, S) -> "Ellipsoid":
        """Ellipsoid {x : x^T S^{-1} x <= 1} for a positive-definite shape matrix S.

        Radii come out in descending order; each orientation row has its first
        nonzero component positive, so the representation is reproducible.
        """
        S = np.asarray(S, dtype=float)
        if S.ndim != 2 or S.shape[0] != S.shape[1] or not np.allclose(S, S.T, atol=1e-12):
            raise ContractViolation("shape matrix must be symmetric")
        vals, vecs = np.linalg.eigh(S)
        if vals.min() <= 0:
            raise ContractViolation("shape matrix must be positive definite")
        order = np.argsort(-vals, kind="stable")
        vals, rows = vals[order], vecs[:, order].T.copy()
        for row in rows:
            nz = np.flatnonzero(np.abs(row) > 1e-14)
            if nz.size and row[nz[0]] < 0:
                row *= -1
        return cls(np.sqrt(vals), OrthogonalMatrix.nearest(rows))

    @property
    def dim(self):
        return self.radii.shape[0]

    def gauge_sq(self, X):
        Y = X @ self.orientation.entries.T
        return np.sum((Y / self.radii) ** 2, axis=1)

    def indicator(self, X):
        X = self._check_points(X)
        return self.gauge_sq(X) <= 1.0

    def support(self, u):
        proj = self.orientation.entries @ np.asarray(u, dtype=float)
        return float(np.sqrt(np.sum((self.radii * proj) ** 2)))

    def support_many(self, U):
        proj = U @ self.orientation.entries.T
        return np.sqrt(np.sum((proj * self.radii) ** 2, axis=1))

    def bounding_radius(self):
        return float(self.radii.max())

    def scaled(self, c):
        return Ellipsoid(self.radii * c, self.orientation)

    def rotated(self, U):
        return Ellipsoid(self.radii, self.orientation @ as_orthogonal(U).T)

    def to_json(self):
        return {"kind": self.kind, "radii": self.radii.tolist(),
                "orientation": self.orientation.entries.tolist()}


@dataclass(frozen=True, eq=False)
class SymPolytope(Body):
    """{x : |<a_i, x>| <= 1 for every row a_i}."""

    rows: np.ndarray
    kind = "sym_polytope"

    def __post_init__(self):
        a = _frozen(self.rows, 2)
        if a.shape[0] == 0:
            raise ContractViolation("polytope needs at least one row")
        object.__setattr__(self, "rows", a)

    @property
    def dim(self):
        return self.rows.shape[1]

    def indicator(self, X):
        X = self._check_points(X)
        return np.all(np.abs(X @ self.rows.T) <= 1.0, axis=1)

    def bounding_radius(self):
        a = self.rows
        if np.linalg.matrix_rank(a) < a.shape[1]:
            return math.inf
        gram = a @ a.T
        if a.shape[0] == a.shape[1] and np.allclose(gram - np.diag(np.diag(gram)), 0.0, atol=1e-12):
            # orthogonal rows: the polytope is a rotated box with halfwidths 1/|a_i|
            return float(np.sqrt(np.sum(1.0 / np.diag(gram))))
        # x = A^+ (A x) with |A x|_inf <= 1
        return float(np.linalg.norm(np.linalg.pinv(a), 2) * math.sqrt(a.shape[0]))

    def scaled(self, c):
        return SymPolytope(self.rows / c)

    def rotated(self, U):
        return SymPolytope(self.rows @ np.asarray(U).T)

    def to_json(self):
        return {"kind": self.kind, "rows": self.rows.tolist()}


@dataclass(frozen=True, eq=False)
class Intersection(Body):
    parts: tuple
    kind = "intersection"

    def __post_init__(self):
        parts = tuple(self.parts)
        if not parts:
            raise ContractViolation("intersection needs at least one part")
        dims = {p.dim for p in parts if p.dim is not None}
        if len(dims) > 1:
            raise DimensionMismatch(f"intersection parts have dimensions {sorted(dims)}")
        object.__setattr__(self, "parts", parts)

    @property
    def dim(self):
        for p in self.parts:
            if p.dim is not None:
                return p.dim
        return None

    def indicator(self, X):
        X = self._check_points(X)
        out = self.parts[0].indicator(X)
        for p in self.parts[1:]:
            out &= p.indicator(X)
        return out

    def bounding_radius(self):
        return min(p.bounding_radius() for p in self.parts)

    def scaled(self, c):
        return Intersection(tuple(p.scaled(c) for p in self.parts))

    def rotated(self, U):
        return Intersection(tuple(p.rotated(U) for p in self.parts))

    def to_json(self):
        return {"kind": self.kind, "parts": [p.to_json() for p in self.parts]}


@dataclass(frozen=True, eq=False)
class Scaled(Body):
    factor: float
    inner: Body
    kind = "scaled"

    def __post_init__(self):
        if not self.factor > 0:
            raise ContractViolation("scale factor must be positive")

    @property
    def dim(self):
        return self.inner.dim

    def indicator(self, X):
        X = self._check_points(X)
        return self.inner.indicator(X / self.factor)

    def support(self, u):
        return self.factor * self.inner.support(u)

    def support_many(self, U):
        return self.factor * self.inner.support_many(U)

    def bounding_radius(self):
        return self.factor * self.inner.bounding_radius()

    def scaled(self, c):
        return Scaled(self.factor * c, self.inner)

    def rotated(self, U):
        return Scaled(self.factor, self.inner.rotated(U))

    def to_json(self):
        return {"kind": self.kind, "factor": self.factor, "inner": self.inner.to_json()}


@dataclass(frozen=True, eq=False)
class MinkowskiSum(Body):
    """A + B, with membership decided through support functions.

    Batched membership tests |<x,u>| <= h_A(u) + h_B(u) over ``directions``
    plus the per-point radial direction x/|x| and the coordinate axes.  That
    is an outer approximation: a rejection is certified, an acceptance is exact
    for Ball+Ball and AxisBox+AxisBox and may be spurious otherwise.
    Ball+AxisBox is decided exactly as dist(x, box) <= radius.
    """

    a: Body
    b: Body
    directions: Optional[np.ndarray] = None
    kind = "minkowski_sum"

    def __post_init__(self):
        if self.a.dim is not None and self.b.dim is not None and self.a.dim != self.b.dim:
            raise DimensionMismatch(f"summands have dimensions {self.a.dim} and {self.b.dim}")
        if self.directions is not None:
            d = np.array(self.directions, dtype=float)
            d /= np.linalg.norm(d, axis=1, keepdims=True)
            d.setflags(write=False)
            object.__setattr__(self, "directions", d)

    @property
    def dim(self):
        return self.a.dim if self.a.dim is not None else self.b.dim

    def support(self, u):
        return self.a.support(u) + self.b.support(u)

    def support_many(self, U):
        return self.a.support_many(U) + self.b.support_many(U)

    def bounding_radius(self):
        return self.a.bounding_radius() + self.b.bounding_radius()

    def direction_set(self, n: int) -> np.ndarray:
        dirs = [np.eye(n)]
        if self.directions is not None:
            dirs.append(self.directions)
        return np.vstack(dirs)

    def indicator(self, X):
        X = self._check_points(X)
        pair = (self.a, self.b) if isinstance(self.a, Ball) else (self.b, self.a)
        if isinstance(pair[0], Ball) and isinstance(pair[1], AxisBox):
            gap = np.maximum(np.abs(X) - pair[1].halfwidths, 0.0)
            return np.sum(gap**2, axis=1) <= pair[0].radius**2
        n = X.shape[1]
        dirs = self.direction_set(n)
        out = np.all(np.abs(X @ dirs.T) <= self.support_many(dirs), axis=1)
        norms = np.linalg.norm(X, axis=1)
        nz = norms > 0
        if np.any(nz):
            out[nz] &= norms[nz] <= self.support_many(X[nz] / norms[nz, None])
        return out

    def rotated(self, U):
        dirs = None if self.directions is None else self.directions @ np.asarray(U).T
        return MinkowskiSum(self.a.rotated(U), self.b.rotated(U), dirs)

    def to_json(self):
        out = {"kind": self.kind, "a": self.a.to_json(), "b": self.b.to_json()}
        if self.directions is not None:
            out["directions"] = self.directions.tolist()
        return out


KINDS = {cls.kind: cls for cls in (Slab, AxisBox, Ball, Ellipsoid, SymPolytope, Intersection, Scaled, MinkowskiSum)}


# ----------------------------------------------------------------------------
# functional surface


def contains(body: Body, x) -> bool:
    if isinstance(body, MinkowskiSum):
        raise ContractViolation("use minkowski_contains for Minkowski sums")
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ContractViolation("contains expects a single point")
    return bool(body.indicator(x[None, :])[0])


def scale(body: Body, c: float) -> Body:
    if not c > 0:
        raise ContractViolation(f"scale factor must be positive, got {c}")
    return body.scaled(float(c))


def rotate(body: Body, U) -> Body:
    U = as_orthogonal(U)
    if body.dim is not None and body.dim != U.n:
        raise DimensionMismatch(f"body has dimension {body.dim}, rotation is {U.n}x{U.n}")
    return body.rotated(U.entries)


def intersect(*parts: Body) -> Body:
    if len(parts) == 1:
        return parts[0]
    if all(isinstance(p, Ball) for p in parts):
        return Ball(min(p.radius for p in parts))
    if all(isinstance(p, AxisBox) for p in parts):
        return AxisBox(np.minimum.reduce([p.halfwidths for p in parts]))
    return Intersection(tuple(parts))


def minkowski_sum(a: Body, b: Body, directions=None) -> MinkowskiSum:
    return MinkowskiSum(a, b, directions)


def support(body: Body, u) -> float:
    u = np.asarray(u, dtype=float)
    if body.dim is not None and u.shape != (body.dim,):
        raise DimensionMismatch(f"direction has shape {u.shape}, body dimension {body.dim}")
    return body.support(u)


def minkowski_contains(total: MinkowskiSum, x, directions: Sequence) -> bool:
    """True iff <x,u> <= h_A(u) + h_B(u) for every supplied direction.

    Outer approximation: ``False`` is certified, ``True`` is exact only when the
    directions include every active normal (axes for box+box, x/|x| for
    ball+ball).
    """
    dirs = np.atleast_2d(np.asarray(directions, dtype=float))
    if dirs.size == 0:
        raise ContractViolation("need at least one direction")
    x = np.asarray(x, dtype=float)
    return all(float(x @ u) <= total.a.support(u) + total.b.support(u) for u in dirs)


def bounding_radius(body: Body) -> float:
    return body.bounding_radius()


def is_unconditional(body: Body) -> bool:
    """Structural test for invariance under coordinate sign flips."""
    if isinstance(body, (Ball, AxisBox)):
        return True
    if isinstance(body, Ellipsoid):
        o = body.orientation.entries
        return bool(np.all(np.sum(np.abs(o) > 1e-12, axis=1) == 1))
    if isinstance(body, Scaled):
        return is_unconditional(body.inner)
    if isinstance(body, Intersection):
        return all(is_unconditional(p) for p in body.parts)
    return False


# ----------------------------------------------------------------------------
# JSON


def _need(obj, key, kind):
    if key not in obj:
        raise BodyParseError(f"missing key {key!r} in {kind} body")
    return obj[key]


def _num(value, key):
    try:
        return float(value)
    except (TypeError, ValueError):
        raise BodyParseError(f"key {key!r} must be a number, got {value!r}") from None


def _arr(value, key, ndim):
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError):
        raise BodyParseError(f"key {key!r} must be a numeric array") from None
    if arr.ndim != ndim:
        raise BodyParseError(f"key {key!r} must be a {ndim}-d array, got shape {arr.shape}")
    return arr


def body_from_json(obj) -> Body:
    if not isinstance(obj, dict):
        raise BodyParseError(f"body must be a JSON object, got {type(obj).__name__}")
    kind = obj.get("kind")
    if kind is None:
        raise BodyParseError("missing key 'kind'")
    try:
        if kind == "slab":
            return Slab(_arr(_need(obj, "direction", kind), "direction", 1),
                        _num(_need(obj, "halfwidth", kind), "halfwidth"))
        if kind == "axis_box":
            return AxisBox(_arr(_need(obj, "halfwidths", kind), "halfwidths", 1))
        if kind == "ball":
            return Ball(_num(_need(obj, "radius", kind), "radius"))
        if kind == "ellipsoid":
            radii = _arr(_need(obj, "radii", kind), "radii", 1)
            orient = obj.get("orientation")
            return Ellipsoid(radii, None if orient is None else _arr(orient, "orientation", 2))
        if kind == "sym_polytope":
            return SymPolytope(_arr(_need(obj, "rows", kind), "rows", 2))
        if kind == "intersection":
            parts = _need(obj, "parts", kind)
            if not isinstance(parts, list):
                raise BodyParseError("key 'parts' must be a list")
            return Intersection(tuple(body_from_json(p) for p in parts))
        if kind == "scaled":
            return Scaled(_num(_need(obj, "factor", kind), "factor"), body_from_json(_need(obj, "inner", kind)))
        if kind == "minkowski_sum":
            dirs = obj.get("directions")
            return MinkowskiSum(body_from_json(_need(obj, "a", kind)), body_from_json(_need(obj, "b", kind)),
                                None if dirs is None else _arr(dirs, "directions", 2))
    except ContractViolation as exc:
        raise BodyParseError(f"invalid {kind} body: {exc}") from exc
    raise BodyParseError(f"unknown body kind {kind!r} under key 'kind'")
