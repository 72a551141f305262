"""Statistical checkers for Gaussian correlation inequalities.

Each checker returns a :class:`CheckReport`.  ``slack`` is oriented so that a
true inequality has ``slack >= 0``; the verdict is three-tier:

    pass          slack >= -3 se
    inconclusive  -5 se <= slack < -3 se
    fail          slack < -5 se

Identity checks (``sense == "eq"``) apply the same rule to ``-|slack|``.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import stats

from . import __version__
from .bodies import AxisBox, Ball, Body, MinkowskiSum, Scaled, intersect, is_unconditional, rotate, scale
from .errors import ContainmentError, ContractViolation, DimensionCapError, DimensionMismatch
from .measure import (
    Estimate, GaussianSpec, IndicatorMoments, RadialMeasure, as_spec, ball_measure, box_measure,
    crn_indicators, crn_reduce, exact, gauss_1d_interval, lebesgue_volume, mc_joint, rho_n,
)
from .randomness import DEFAULT_CHUNK, NORMAL_METHOD, RNG_METHOD, Stream, derive_stream, haar_matrix

PASS, INCONCLUSIVE, FAIL = "pass", "inconclusive", "fail"
PASS_SIGMA, FAIL_SIGMA = 3.0, 5.0
# absolute floor absorbing float rounding when slack_se is exactly zero
VERDICT_ATOL = 1e-12


def verdict(slack: float, se: float, sense: str = "ge") -> str:
    s = -abs(slack) if sense == "eq" else slack
    if s >= -PASS_SIGMA * se - VERDICT_ATOL:
        return PASS
    if s < -FAIL_SIGMA * se - VERDICT_ATOL:
        return FAIL
    return INCONCLUSIVE


def combine(verdicts: Sequence[str]) -> str:
    if FAIL in verdicts:
        return FAIL
    if INCONCLUSIVE in verdicts:
        return INCONCLUSIVE
    return PASS


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


@dataclass
class CheckReport:
    name: str
    lhs: Estimate
    rhs: Estimate
    slack: float
    slack_se: float
    verdict: str
    sense: str = "ge"
    seed: Optional[int] = None
    config: dict = field(default_factory=dict)
    inputs: dict = field(default_factory=dict)
    subreports: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    @property
    def z(self) -> float:
        """Slack in standard-error units (inf when the slack is exact)."""
        s = -abs(self.slack) if self.sense == "eq" else self.slack
        if self.slack_se > 0:
            return s / self.slack_se
        return math.inf if s >= -VERDICT_ATOL else -math.inf

    @property
    def inputs_digest(self) -> str:
        payload = _canonical({"inputs": self.inputs, "seed": self.seed})
        return hashlib.sha256(payload.encode()).hexdigest()

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "lhs": self.lhs.to_json(),
            "rhs": self.rhs.to_json(),
            "slack": self.slack,
            "slack_se": self.slack_se,
            "verdict": self.verdict,
            "sense": self.sense,
            "seed": self.seed,
            "config": self.config,
            "inputs": self.inputs,
            "inputs_digest": self.inputs_digest,
            "subreports": [s.to_json() for s in self.subreports],
            "extra": self.extra,
            "version": __version__,
            "rng": {"generator": RNG_METHOD, "normals": NORMAL_METHOD},
        }

    @classmethod
    def from_json(cls, obj) -> "CheckReport":
        return cls(
            name=obj["name"], lhs=Estimate.from_json(obj["lhs"]), rhs=Estimate.from_json(obj["rhs"]),
            slack=float(obj["slack"]), slack_se=float(obj["slack_se"]), verdict=obj["verdict"],
            sense=obj.get("sense", "ge"), seed=obj.get("seed"), config=obj.get("config", {}),
            inputs=obj.get("inputs", {}), subreports=[cls.from_json(s) for s in obj.get("subreports", [])],
            extra=obj.get("extra", {}),
        )


def make_report(name, lhs: Estimate, rhs: Estimate, slack_se: float, *, sense="ge", stream=None,
                config=None, inputs=None, subreports=(), extra=None, verdict_override=None) -> CheckReport:
    slack = rhs.value - lhs.value if sense == "le" else lhs.value - rhs.value
    v = verdict(slack, slack_se, sense)
    if subreports:
        v = combine([v] + [s.verdict for s in subreports])
    if verdict_override is not None:
        v = verdict_override
    return CheckReport(name, lhs, rhs, float(slack), float(slack_se), v, sense,
                       None if stream is None else stream.seed, dict(config or {}), dict(inputs or {}),
                       list(subreports), dict(extra or {}))


def _mc(value, se, N) -> Estimate:
    return Estimate(float(value), float(max(se, 0.0)), int(N), "mc")


def _body_json(b):
    return b.to_json() if hasattr(b, "to_json") else repr(b)


def _cfg(N, chunk_size, **kw):
    out = {"samples": int(N), "chunk_size": int(chunk_size)}
    out.update(kw)
    return out


def _standard(spec, what) -> GaussianSpec:
    spec = as_spec(spec)
    if not isinstance(spec, GaussianSpec) or not spec.is_standard:
        raise ContractViolation(f"{what} is stated for the standard Gaussian measure")
    return spec


def _same_dim(spec, *bodies):
    for b in bodies:
        if b.dim is not None and b.dim != spec.dim:
            raise DimensionMismatch(f"{b.kind} has dimension {b.dim}, measure has dimension {spec.dim}")


# ----------------------------------------------------------------------------
# correlation-type checks


def correlation_check(a: Body, b: Body, spec, N: int, stream: Stream, *, name="correlation",
                      chunk_size=DEFAULT_CHUNK, workers=1) -> CheckReport:
    """mu(A n B) >= mu(A) mu(B) from one common sample."""
    spec = as_spec(spec)
    _same_dim(spec, a, b)
    j = mc_joint(a, b, spec, N, stream, chunk_size, workers)
    g = np.array([j.pB.value, j.pA.value, 0.0])
    rhs_se = math.sqrt(max(float(g @ j.cov_terms @ g), 0.0) / N)
    return make_report(
        name, j.pAB, _mc(j.pA.value * j.pB.value, rhs_se, N), j.slack_se, stream=stream,
        config=_cfg(N, chunk_size), inputs={"a": _body_json(a), "b": _body_json(b), "measure": spec.to_json()},
        extra={"pA": j.pA.value, "pB": j.pB.value})


def _max_abs_indicator(lo, hi, w):
    def ind(X):
        return np.all(np.abs(X[:, lo:hi]) <= w[lo:hi], axis=1)
    return ind


def khatri_sidak_check(spec: GaussianSpec, k: int, halfwidths, N: int, stream: Stream, *,
                       name="khatri_sidak", chunk_size=DEFAULT_CHUNK, workers=1) -> CheckReport:
    """P(max_i |X_i|/w_i <= 1) >= P(max_{i<=k} ...) P(max_{i>k} ...) for X = T z.

    With a diagonal covariance the blocks are independent boxes and all three
    probabilities are evaluated exactly, so the slack is exactly zero.
    """
    spec = as_spec(spec)
    n = spec.dim
    w = np.asarray(halfwidths, dtype=float)
    if w.shape != (n,):
        raise DimensionMismatch(f"need {n} halfwidths, got {w.shape}")
    if not 1 <= k < n:
        raise ContractViolation(f"split index must satisfy 1 <= k < n, got k={k}, n={n}")
    cov = spec.covariance
    inputs = {"measure": spec.to_json(), "k": k, "halfwidths": w.tolist()}
    if np.all(cov == np.diag(np.diag(cov))):
        sd = np.sqrt(np.diag(cov))
        pA = box_measure(w[:k] / sd[:k]).value
        pB = box_measure(w[k:] / sd[k:]).value
        both = exact(pA * pB)
        return make_report(name, both, both, 0.0, stream=stream, config=_cfg(N, chunk_size, route="exact"),
                           inputs=inputs, extra={"pA": pA, "pB": pB})
    inds = [_max_abs_indicator(0, k, w), _max_abs_indicator(k, n, w), _max_abs_indicator(0, n, w)]
    mom = crn_indicators(inds, spec, N, stream, "khatri_sidak", chunk_size, workers)
    pA, pB, pAB = mom.means
    return make_report(
        name, mom.estimate(2), _mc(pA * pB, mom.delta_se([pB, pA, 0.0]), N), mom.delta_se([-pB, -pA, 1.0]),
        stream=stream, config=_cfg(N, chunk_size, route="mc"), inputs=inputs, extra={"pA": pA, "pB": pB})


def khatri_sidak_product_check(spec: GaussianSpec, halfwidths, N: int, stream: Stream, *,
                               name="khatri_sidak_product", chunk_size=DEFAULT_CHUNK, workers=1) -> CheckReport:
    """P(|X_i| <= w_i for all i) >= prod_i P(|X_i| <= w_i); the product is exact."""
    spec = as_spec(spec)
    n = spec.dim
    w = np.asarray(halfwidths, dtype=float)
    sd = np.sqrt(np.diag(spec.covariance))
    rhs = box_measure(w / sd)
    mom = crn_indicators([_max_abs_indicator(0, n, w)], spec, N, stream, "khatri_sidak_product", chunk_size, workers)
    lhs = mom.estimate(0)
    return make_report(name, lhs, rhs, lhs.std_error, stream=stream, config=_cfg(N, chunk_size),
                       inputs={"measure": spec.to_json(), "halfwidths": w.tolist()})


def _minkowski_family(a: Body, b: Body):
    if isinstance(a, Ball) and isinstance(b, Ball):
        return Ball(a.radius + b.radius)
    if isinstance(a, AxisBox) and isinstance(b, AxisBox):
        return AxisBox(a.halfwidths + b.halfwidths)
    return None


def prop1_check(a: Body, b: Body, spec, N: int, stream: Stream, *, directions=None, name="prop1",
                chunk_size=DEFAULT_CHUNK, workers=1) -> CheckReport:
    """mu(A) mu(B) <= mu(sqrt2 (A n B)) mu((A + B)/sqrt2); reported with sense "le"."""
    spec = _standard(spec, "prop1_check")
    _same_dim(spec, a, b)
    total = _minkowski_family(a, b)
    route = "exact-family"
    if total is None:
        if directions is None:
            raise ContractViolation(
                "Minkowski membership is exact only for ball+ball and box+box; pass a certified direction set")
        total = MinkowskiSum(a, b, directions)
        route = "certified-directions"
    s2 = math.sqrt(2.0)
    shrunk_sum = scale(total, 1 / s2)
    grown_cap = scale(intersect(a, b), s2)
    mom = crn_indicators([a.indicator, b.indicator, grown_cap.indicator, shrunk_sum.indicator], spec, N, stream,
                         "prop1", chunk_size, workers)
    pA, pB, pS, pM = mom.means
    lhs = _mc(pA * pB, mom.delta_se([pB, pA, 0, 0]), N)
    rhs = _mc(pS * pM, mom.delta_se([0, 0, pM, pS]), N)
    return make_report(name, lhs, rhs, mom.delta_se([-pB, -pA, pM, pS]), sense="le", stream=stream,
                       config=_cfg(N, chunk_size, route=route), inputs={"a": _body_json(a), "b": _body_json(b)},
                       extra={"pA": pA, "pB": pB, "p_sqrt2_cap": pS, "p_sum_over_sqrt2": pM})


def pow2_bound_check(a: Body, b: Body, spec, N: int, stream: Stream, *, name="pow2_bound",
                     chunk_size=DEFAULT_CHUNK, workers=1) -> CheckReport:
    """2^{n/2} mu(A n B) >= mu(A) mu(B)."""
    spec = _standard(spec, "pow2_bound_check")
    _same_dim(spec, a, b)
    factor = 2.0 ** (spec.dim / 2.0)
    j = mc_joint(a, b, spec, N, stream, chunk_size, workers)
    cov = j.cov_terms
    pA, pB, pAB = j.pA.value, j.pB.value, j.pAB.value

    def se(g):
        g = np.asarray(g, dtype=float)
        return math.sqrt(max(float(g @ cov @ g), 0.0) / N)

    return make_report(name, _mc(factor * pAB, factor * j.pAB.std_error, N), _mc(pA * pB, se([pB, pA, 0]), N),
                       se([-pB, -pA, factor]), stream=stream, config=_cfg(N, chunk_size),
                       inputs={"a": _body_json(a), "b": _body_json(b)}, extra={"factor": factor})


def cor2_check(a: Body, b: Body, spec, N: int, stream: Stream, *, directions=None, volume_samples=None,
               name="cor2", chunk_size=DEFAULT_CHUNK, workers=1) -> CheckReport:
    """mu(A n B) >= (2 pi)^{n/2} / m_n(A + B) * mu(A) mu(B).

    m_n(A + B) is exact for ball+ball and box+box.  Otherwise it is estimated
    on the outer approximation given by ``directions``, which can only enlarge
    the volume and therefore only weakens the right side.
    """
    spec = _standard(spec, "cor2_check")
    _same_dim(spec, a, b)
    n = spec.dim
    total = _minkowski_family(a, b)
    route = "exact-family"
    if total is None:
        if directions is None:
            raise ContractViolation(
                "Minkowski volume is exact only for ball+ball and box+box; pass a certified direction set")
        total = MinkowskiSum(a, b, directions)
        route = "outer-approximation"
    vol = lebesgue_volume(total, volume_samples or N, derive_stream(stream, "cor2_volume"), n=n,
                          chunk_size=chunk_size, workers=workers)
    factor = (2 * math.pi) ** (n / 2) / vol.value
    j = mc_joint(a, b, spec, N, stream, chunk_size, workers)
    cov = j.cov_terms
    pA, pB = j.pA.value, j.pB.value

    def var(g):
        g = np.asarray(g, dtype=float)
        return max(float(g @ cov @ g), 0.0) / N

    rel_vol = vol.std_error / vol.value
    rhs_val = factor * pA * pB
    rhs_se = math.sqrt(factor**2 * var([pB, pA, 0]) + (rhs_val * rel_vol) ** 2)
    slack_se = math.sqrt(var([-factor * pB, -factor * pA, 1]) + (rhs_val * rel_vol) ** 2)
    return make_report(name, j.pAB, _mc(rhs_val, rhs_se, N), slack_se, stream=stream,
                       config=_cfg(N, chunk_size, route=route), inputs={"a": _body_json(a), "b": _body_json(b)},
                       extra={"factor": factor, "minkowski_volume": vol.to_json()})


def small_sets_check(a: Body, b: Body, spec, N: int, stream: Stream, *, name="small_sets",
                     chunk_size=DEFAULT_CHUNK, workers=1) -> CheckReport:
    """Correlation for bodies inside rho_n B_2^n, carrying the containment certificate."""
    spec = _standard(spec, "small_sets_check")
    n = spec.dim
    limit = rho_n(n)
    radii = {}
    for label, body in (("a", a), ("b", b)):
        r = body.bounding_radius()
        if not r <= limit * (1 + 1e-12):
            raise ContainmentError(f"body {label} has bounding radius {r:.6g} > rho_{n} = {limit:.6g}",
                                   radius=r, limit=limit)
        radii[label] = r
    rep = correlation_check(a, b, spec, N, stream, name=name, chunk_size=chunk_size, workers=workers)
    rep.extra["containment"] = {"rho_n": limit, "radius_a": radii["a"], "radius_b": radii["b"]}
    return rep


def tensor_lift_check(a: Body, b: Body, copies: int, spec, N: int, stream: Stream, *, c: Optional[float] = None,
                      name="tensor_lift", chunk_size=DEFAULT_CHUNK, workers=1, dim_cap=64) -> CheckReport:
    """mu_{Nn}(A^N n B^N) = mu_n(A n B)^N, checked as a two-sided identity."""
    spec = _standard(spec, "tensor_lift_check")
    _same_dim(spec, a, b)
    n = spec.dim
    if copies < 1:
        raise ContractViolation("copies must be >= 1")
    if copies * n > dim_cap:
        raise DimensionCapError(f"copies*n = {copies * n} exceeds the cap {dim_cap}")
    inputs = {"a": _body_json(a), "b": _body_json(b), "copies": copies}
    extra = {}
    if c is not None:
        extra["amplification"] = [[k, c ** (1.0 / k)] for k in range(1, copies + 1)]
    cap = intersect(a, b)
    if isinstance(cap, AxisBox):
        base = box_measure(cap.halfwidths).value
        lhs = box_measure(np.tile(cap.halfwidths, copies))
        rhs = exact(base**copies)
        return make_report(name, lhs, rhs, 0.0, sense="eq", stream=stream, config=_cfg(N, chunk_size, route="exact"),
                           inputs=inputs, extra=extra)

    def cap_ind(X):
        return a.indicator(X) & b.indicator(X)

    base = crn_indicators([cap_ind], spec, N, derive_stream(stream, "tensor_base"), "tensor_base",
                          chunk_size, workers).estimate(0)
    p = base.value
    rhs = _mc(p**copies, copies * p ** (copies - 1) * base.std_error, N)
    if copies == 1:
        lhs = base
    else:
        def lifted(X):
            blocks = X.reshape(X.shape[0] * copies, n)
            return np.all(cap_ind(blocks).reshape(X.shape[0], copies), axis=1)

        lhs = crn_indicators([lifted], GaussianSpec.standard(n * copies), N,
                             derive_stream(stream, "tensor_direct"), "tensor_direct", chunk_size, workers).estimate(0)
    se = math.hypot(lhs.std_error, rhs.std_error) if copies > 1 else 0.0
    return make_report(name, lhs, rhs, se, sense="eq", stream=stream, config=_cfg(N, chunk_size, route="mc"),
                       inputs=inputs, extra=extra)


def rotation_average_check(a: Body, b: Body, measure, M: int, N: int, stream: Stream, *,
                           name="rotation_average", chunk_size=DEFAULT_CHUNK, workers=1) -> CheckReport:
    """Average over M Haar rotations U of nu(A n U B) >= nu(A) nu(B).

    All rotations share one point sample.  The standard error adds the
    point-sample variance of the per-point rotation average (delta method) and
    the between-rotation variance of the per-rotation hit rates.
    """
    measure = as_spec(measure)
    if M < 1:
        raise ContractViolation("need at least one rotation")
    n = measure.dim
    _same_dim(measure, a, b)
    rot_stream = derive_stream(stream, "rotations")
    rotated = [rotate(b, haar_matrix(derive_stream(rot_stream, "haar", m).generator, n)) for m in range(M)]

    def reducer(X):
        ia = a.indicator(X)
        ib = b.indicator(X)
        per_rot = np.empty(M, dtype=np.int64)
        s = np.zeros(X.shape[0], dtype=np.int64)
        for m, body in enumerate(rotated):
            hit = ia & body.indicator(X)
            per_rot[m] = np.count_nonzero(hit)
            s += hit
        fa, fb = ia.astype(np.int64), ib.astype(np.int64)
        head = np.array([fa.sum(), fb.sum(), (fa & fb).sum(), s.sum(), (s * s).sum(), (s * fa).sum(), (s * fb).sum()],
                        dtype=np.int64)
        return np.concatenate([head, per_rot])

    sums = crn_reduce(stream, "rotation_average", N, measure.sample, reducer, chunk_size, workers)
    nA, nB, nAB, S, S2, SA, SB = (int(v) for v in sums[:7])
    per_rot = sums[7:] / N
    pA, pB, pAB = nA / N, nB / N, nAB / N
    L = S / (M * N)
    mean_psi = L - pB * pA - pA * pB
    e_psi2 = (S2 / M**2 + pB**2 * nA + pA**2 * nB - 2 * pB * SA / M - 2 * pA * SB / M + 2 * pA * pB * nAB) / N
    var_points = max(e_psi2 - mean_psi**2, 0.0) / N
    var_rot = float(np.var(per_rot, ddof=1)) / M if M > 1 else 0.0
    se = math.sqrt(var_points + var_rot)
    lhs = _mc(L, math.sqrt(max(S2 / (M**2 * N) - L**2, 0.0) / N + var_rot), N)
    rhs = _mc(pA * pB, math.sqrt(max(pA * (1 - pA) * pB**2 + pB * (1 - pB) * pA**2, 0.0) / N), N)
    return make_report(name, lhs, rhs, se, stream=stream, config=_cfg(N, chunk_size, rotations=M),
                       inputs={"a": _body_json(a), "b": _body_json(b), "measure": measure.to_json()},
                       extra={"pA": pA, "pB": pB, "var_points": var_points, "var_rotations": var_rot,
                              "per_rotation_min": float(per_rot.min()), "per_rotation_max": float(per_rot.max())})


def cor6_check(a: Body, r: float, spec, N: int, stream: Stream, *, name="cor6", chunk_size=DEFAULT_CHUNK,
               workers=1) -> CheckReport:
    """mu(A n rB) >= mu(A) mu(rB) with mu(rB) from the chi-square CDF."""
    spec = _standard(spec, "cor6_check")
    _same_dim(spec, a)
    if not r > 0:
        raise ContractViolation("radius must be positive")
    ball = Ball(r)
    beta = ball_measure(spec.dim, r).value

    def cap(X):
        return a.indicator(X) & ball.indicator(X)

    mom = crn_indicators([a.indicator, cap], spec, N, stream, "cor6", chunk_size, workers)
    pA, pAB = mom.means
    return make_report(name, mom.estimate(1), _mc(pA * beta, beta * mom.estimate(0).std_error, N),
                       mom.delta_se([-beta, 1.0]), stream=stream, config=_cfg(N, chunk_size),
                       inputs={"a": _body_json(a), "r": r}, extra={"ball_measure": beta, "pA": pA})


# ----------------------------------------------------------------------------
# orthant decomposition and Karlin-Rinott


def _orthant_index(X):
    return ((X > 0).astype(np.int64) << np.arange(X.shape[1])).sum(axis=1)


def _ray_boundary_points(body: Body, X: np.ndarray, shrink=1e-9, iters=60):
    """For inside points x, the point (1 - shrink) t* x with t* = sup{t : t x in body}."""
    if X.shape[0] == 0:
        return X
    lo = np.ones(X.shape[0])
    hi = np.full(X.shape[0], 2.0)
    for _ in range(40):
        inside = body.indicator(X * hi[:, None])
        if not inside.any():
            break
        lo[inside] = hi[inside]
        hi[inside] *= 2.0
    bounded = ~body.indicator(X * hi[:, None])
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        inside = body.indicator(X * mid[:, None])
        lo = np.where(inside, mid, lo)
        hi = np.where(inside, hi, mid)
    return (X * (lo * (1 - shrink))[:, None])[bounded]


def coordinate_projection_witnesses(body: Body, X: np.ndarray):
    """Points x in ``body`` with some x_i e_i outside it; returns (count, first witness)."""
    n = X.shape[1]
    proj = np.zeros((X.shape[0], n, n))
    idx = np.arange(n)
    proj[:, idx, idx] = X
    ok = body.indicator(proj.reshape(-1, n)).reshape(X.shape[0], n)
    bad_rows = np.flatnonzero(~ok.all(axis=1))
    if bad_rows.size == 0:
        return 0, None
    r = bad_rows[0]
    i = int(np.flatnonzero(~ok[r])[0])
    return int(bad_rows.size), {"x": X[r].tolist(), "coordinate": i}


def orthant_conditions_check(a: Body, b: Body, spec, N: int, stream: Stream, *, witness_points: int = 100_000,
                             name="orthant_conditions", chunk_size=DEFAULT_CHUNK, workers=1,
                             max_dim=12) -> CheckReport:
    """Hypotheses (i), (ii) and the per-orthant inequality behind nu(A n B) >= nu(A) nu(B).

    The measure must be a centered product Gaussian (diagonal covariance).
    Condition (i) is universally quantified; sampling can only falsify it.
    """
    spec = as_spec(spec)
    n = spec.dim
    if n > max_dim:
        raise DimensionCapError(f"2^n orthants not enumerable for n = {n} > {max_dim}")
    cov = spec.covariance
    if not np.all(cov == np.diag(np.diag(cov))):
        raise ContractViolation("orthant decomposition needs a product measure")
    _same_dim(spec, a, b)
    cap = intersect(a, b)
    nQ = 2**n
    vQ = 1.0 / nQ

    # (i) coordinate projections of sampled inside points and near-boundary points
    gen = derive_stream(stream, "condition_i").generator
    P = spec.sample(gen, witness_points)
    inside = P[cap.indicator(P)]
    edge = _ray_boundary_points(cap, inside)
    cnt_in, wit_in = coordinate_projection_witnesses(cap, inside)
    cnt_edge, wit_edge = coordinate_projection_witnesses(cap, edge)
    tested = inside.shape[0] + edge.shape[0]
    bad = cnt_in + cnt_edge
    frac_ok = 1.0 - bad / tested if tested else 1.0
    rep_i = make_report(
        "condition_i", exact(frac_ok), exact(1.0), 0.0, stream=stream,
        config={"points": witness_points, "tested": tested},
        extra={"witnesses": bad, "witness": wit_in or wit_edge, "falsification_only": True})

    # orthant-resolved counts on one sample
    def reducer(X):
        q = _orthant_index(X)
        ia, ib = a.indicator(X), b.indicator(X)
        return np.stack([np.bincount(q[ia], minlength=nQ), np.bincount(q[ib], minlength=nQ),
                         np.bincount(q[ia & ib], minlength=nQ)]).astype(np.int64)

    counts = crn_reduce(stream, "orthants", N, spec.sample, reducer, chunk_size, workers)
    pAQ, pBQ, pABQ = counts / N

    # (ii) sign agreement over orthant pairs
    sA = np.sqrt(pAQ * (1 - pAQ) / N)
    sB = np.sqrt(pBQ * (1 - pBQ) / N)
    iu, ju = np.triu_indices(nQ, 1)
    dA = pAQ[iu] - pAQ[ju]
    dB = pBQ[iu] - pBQ[ju]
    sdA = np.sqrt((pAQ[iu] * (1 - pAQ[iu]) + pAQ[ju] * (1 - pAQ[ju]) + 2 * pAQ[iu] * pAQ[ju]) / N)
    sdB = np.sqrt((pBQ[iu] * (1 - pBQ[iu]) + pBQ[ju] * (1 - pBQ[ju]) + 2 * pBQ[iu] * pBQ[ju]) / N)
    prod = dA * dB
    prod_se = np.sqrt((dA * sdB) ** 2 + (dB * sdA) ** 2 + (sdA * sdB) ** 2)
    if prod.size:
        zs = np.where(prod_se > 0, prod / np.where(prod_se > 0, prod_se, 1), np.where(prod >= 0, np.inf, -np.inf))
        w = int(np.argmin(zs))
        worst_prod, worst_se = float(prod[w]), float(prod_se[w])
    else:
        worst_prod, worst_se = 0.0, 0.0
    equal_A = _equal_measures(counts[0])
    equal_B = _equal_measures(counts[1])
    rep_ii = make_report("condition_ii", _mc(worst_prod, worst_se, N), exact(0.0), worst_se, stream=stream,
                         extra={"pairs": int(prod.size), "equal_measures_A": equal_A, "equal_measures_B": equal_B,
                                "route": "parenthetical" if (equal_A or equal_B) else "full"})

    # (1) per-orthant inequality nu(A n Q) nu(B n Q) <= nu(Q) nu(A n B n Q)
    slackQ = vQ * pABQ - pAQ * pBQ
    mean_psi = slackQ
    e_psi2 = (vQ**2 * pABQ + pBQ**2 * pAQ + pAQ**2 * pBQ - 2 * vQ * pBQ * pABQ - 2 * vQ * pAQ * pABQ
              + 2 * pAQ * pBQ * pABQ)
    seQ = np.sqrt(np.maximum(e_psi2 - mean_psi**2, 0.0) / N)
    zQ = np.where(seQ > 0, slackQ / np.where(seQ > 0, seQ, 1), np.where(slackQ >= -VERDICT_ATOL, np.inf, -np.inf))
    q = int(np.argmin(zQ))
    rep_1 = make_report("orthant_inequality", _mc(vQ * pABQ[q], vQ * math.sqrt(pABQ[q] * (1 - pABQ[q]) / N), N),
                        _mc(pAQ[q] * pBQ[q], 0.0, N), float(seQ[q]), stream=stream,
                        extra={"worst_orthant": q, "worst_z": float(zQ[q]) if math.isfinite(zQ[q]) else None})

    # conclusion
    pA, pB, pAB = pAQ.sum(), pBQ.sum(), pABQ.sum()
    e2 = pAB + pB**2 * pA + pA**2 * pB - 2 * pB * pAB - 2 * pA * pAB + 2 * pA * pB * pAB
    se = math.sqrt(max(e2 - (pAB - pA * pB) ** 2, 0.0) / N)
    conditions_hold = rep_i.verdict == PASS and rep_ii.verdict == PASS
    return make_report(
        name, _mc(pAB, math.sqrt(pAB * (1 - pAB) / N), N), _mc(pA * pB, 0.0, N), se, stream=stream,
        config=_cfg(N, chunk_size, witness_points=witness_points),
        inputs={"a": _body_json(a), "b": _body_json(b), "measure": spec.to_json()},
        subreports=[rep_i, rep_ii, rep_1],
        extra={"conclusion_implied": conditions_hold,
               "structurally_unconditional": is_unconditional(a) and is_unconditional(b)})


def _equal_measures(counts, alpha=1e-3) -> bool:
    counts = np.asarray(counts, dtype=float)
    if counts.sum() == 0:
        return True
    return bool(stats.chisquare(counts).pvalue > alpha)


def orthant_indicator(body, signs=None) -> Callable:
    """Indicator of body n Q, where Q is the orthant with the given signs (default: positive)."""
    ind = body.indicator if hasattr(body, "indicator") else body

    def f(X):
        inQ = np.all(X >= 0, axis=1) if signs is None else np.all(X * np.asarray(signs) >= 0, axis=1)
        return inQ & ind(X)
    return f


def kr_orthant_functions(a: Body, b: Body):
    """f1 = I_{A n Q}, f2 = I_{B n Q}, f3 = I_Q, f4 = I_{A n B n Q} on the positive orthant Q."""
    cap = intersect(a, b)
    return (orthant_indicator(a), orthant_indicator(b), lambda X: np.all(X >= 0, axis=1), orthant_indicator(cap))


def kr_lattice_check(f1, f2, f3, f4, pair_samples: int, stream: Stream, n: int, *, name="kr_lattice",
                     chunk_size=DEFAULT_CHUNK) -> CheckReport:
    """Sample (x, y) in the positive orthant and look for f1(x) f2(y) > f3(x v y) f4(x ^ y)."""
    fs = [f.indicator if hasattr(f, "indicator") else f for f in (f1, f2, f3, f4)]
    violations = 0
    active = 0
    witness = None
    for c, m in enumerate(_sizes(pair_samples, chunk_size)):
        gen = derive_stream(stream, "kr_pairs", c).generator
        x = np.abs(gen.standard_normal((m, n)))
        y = np.abs(gen.standard_normal((m, n)))
        left = fs[0](x).astype(float) * fs[1](y)
        right = fs[2](np.maximum(x, y)).astype(float) * fs[3](np.minimum(x, y))
        bad = np.flatnonzero(left > right)
        active += int(np.count_nonzero(left))
        violations += bad.size
        if bad.size and witness is None:
            k = bad[0]
            witness = {"x": x[k].tolist(), "y": y[k].tolist()}
    frac_ok = 1.0 - violations / pair_samples
    return make_report(name, exact(frac_ok), exact(1.0), 0.0, stream=stream,
                       config={"pairs": pair_samples, "chunk_size": chunk_size},
                       extra={"witnesses": violations, "witness": witness, "active_pairs": active})


def _sizes(total, chunk):
    full, rest = divmod(total, chunk)
    return [chunk] * full + ([rest] if rest else [])


# ----------------------------------------------------------------------------
# Gaussian weight against a log-concave function


@dataclass(frozen=True)
class LogConcaveFn:
    """Named symmetric log-concave function on R^n (vectorized over rows)."""

    kind: str
    params: tuple = ()

    def __call__(self, X):
        if self.kind == "one":
            return np.ones(X.shape[0])
        if self.kind == "box":
            return np.all(np.abs(X) <= np.asarray(self.params), axis=1).astype(float)
        if self.kind == "gauss_bump":
            C = np.asarray(self.params)
            return np.exp(-0.5 * np.einsum("ij,jk,ik->i", X, C, X))
        if self.kind == "exp_l1":
            (s,) = self.params
            return np.exp(-np.abs(X).sum(axis=1) / s)
        raise ContractViolation(f"unknown log-concave function kind {self.kind!r}")

    @classmethod
    def box(cls, halfwidths):
        return cls("box", tuple(float(w) for w in halfwidths))

    @classmethod
    def gauss_bump(cls, C):
        return cls("gauss_bump", tuple(tuple(float(v) for v in row) for row in np.asarray(C)))

    @classmethod
    def exp_l1(cls, scale=1.0):
        return cls("exp_l1", (float(scale),))

    def to_json(self):
        return {"kind": self.kind, "params": list(self.params)}


def prop11_identity_check(A, g: Callable, spec, N: int, stream: Stream, *, name="prop11",
                          chunk_size=DEFAULT_CHUNK, workers=1) -> CheckReport:
    """E[e^{-<Ax,x>/2} g] vs det(I+A)^{-1/2} E[g((I+A)^{-1/2} x)] and vs E[e^{..}] E[g].

    Sub-reports: ``identity`` (two-sided, common sample) and ``inequality``.
    """
    spec = _standard(spec, "prop11_identity_check")
    n = spec.dim
    A = np.asarray(A, dtype=float)
    if A.shape != (n, n) or not np.allclose(A, A.T, atol=1e-12):
        raise ContractViolation("A must be a symmetric n x n matrix")
    lam, V = np.linalg.eigh(A)
    if lam.min() < -1e-10:
        raise ContractViolation(f"A has eigenvalue {lam.min():.3g} < 0; must be nonnegative definite")
    lam = np.clip(lam, 0.0, None)
    Msq = (V * (1.0 / np.sqrt(1.0 + lam))) @ V.T
    d = float(np.prod(1.0 / np.sqrt(1.0 + lam)))

    def reducer(X):
        w = np.exp(-0.5 * np.einsum("ij,jk,ik->i", X, A, X))
        gx = g(X)
        u = w * gx
        v = d * g(X @ Msq)
        diff = u - v
        return np.array([u.sum(), v.sum(), w.sum(), gx.sum(), (diff * diff).sum(), (u * u).sum(), (w * w).sum(),
                         (gx * gx).sum(), (u * w).sum(), (u * gx).sum(), (w * gx).sum(), diff.sum()])

    sums = crn_reduce(stream, "prop11", N, spec.sample, reducer, chunk_size, workers) / N
    Eu, Ev, Ew, Eg, Ed2, Eu2, Ew2, Eg2, Euw, Eug, Ewg, Ed = sums
    var_d = max(Ed2 - Ed**2, 0.0)
    ident = make_report("identity", _mc(Eu, math.sqrt(max(Eu2 - Eu**2, 0) / N), N),
                        _mc(Ev, math.sqrt(max(Eu2 - Eu**2, 0) / N), N), math.sqrt(var_d / N),
                        sense="eq", stream=stream, extra={"difference": Ed})
    var_u, var_w, var_g = Eu2 - Eu**2, Ew2 - Ew**2, Eg2 - Eg**2
    cov_uw, cov_ug, cov_wg = Euw - Eu * Ew, Eug - Eu * Eg, Ewg - Ew * Eg
    var_psi = (var_u + Eg**2 * var_w + Ew**2 * var_g - 2 * Eg * cov_uw - 2 * Ew * cov_ug + 2 * Ew * Eg * cov_wg)
    ineq = make_report("inequality", _mc(Eu, math.sqrt(max(var_u, 0) / N), N), _mc(Ew * Eg, 0.0, N),
                       math.sqrt(max(var_psi, 0.0) / N), stream=stream, extra={"E_weight": Ew, "E_g": Eg})
    g_json = g.to_json() if hasattr(g, "to_json") else repr(g)
    return make_report(name, ineq.lhs, ineq.rhs, ineq.slack_se, stream=stream, config=_cfg(N, chunk_size),
                       inputs={"A": A.tolist(), "g": g_json}, subreports=[ident, ineq],
                       extra={"det_factor": d})


# ----------------------------------------------------------------------------
# log-concavity on a grid


def logconcavity_check(values, ses=None, *, name="logconcavity", rel_floor=1e-12) -> CheckReport:
    """Midpoint log-concavity f(t)^2 >= f(t-h) f(t+h) on a uniform grid.

    Each interior point is tested with a 3-sigma allowance from the delta-method
    SE of f(t)^2 - f(t-h) f(t+h) (grid errors treated as independent).  Zeros
    are allowed only outside a single contiguous support interval.
    """
    f = np.asarray([v.value if isinstance(v, Estimate) else v for v in values], dtype=float)
    if ses is None:
        ses = [v.std_error if isinstance(v, Estimate) else 0.0 for v in values]
    s = np.asarray(ses, dtype=float)
    if np.any(f < 0):
        raise ContractViolation("values must be nonnegative")
    support = np.flatnonzero(f > 0)
    contiguous = bool(support.size == 0 or support.size == support[-1] - support[0] + 1)
    best = None
    for t in range(1, len(f) - 1):
        fm, f0, fp = f[t - 1], f[t], f[t + 1]
        if fm == 0 or fp == 0:
            continue
        d = f0 * f0 - fm * fp
        se = math.sqrt((2 * f0 * s[t]) ** 2 + (fp * s[t - 1]) ** 2 + (fm * s[t + 1]) ** 2)
        se = max(se, rel_floor * fm * fp)
        z = d / se
        if best is None or z < best[0]:
            best = (z, t, f0 * f0, fm * fp, se)
    if best is None:
        rep = make_report(name, exact(0.0), exact(0.0), 0.0, extra={"points": 0, "support_interval": contiguous})
    else:
        z, t, lhs, rhs, se = best
        rep = make_report(name, Estimate(lhs, 0.0, 0, "exact") if se == 0 else _mc(lhs, se, 0), exact(rhs), se,
                          extra={"worst_index": t, "worst_z": z, "support_interval": contiguous})
    if not contiguous:
        rep.verdict = FAIL
    return rep
