"""Job runner and the built-in "desk" manifest of acceptance instances.

A :class:`Job` is a named, JSON-serializable call of one checker.  The job's
random stream is ``Stream(seed).derive("job", 0).derive(job.name)``, so a
report depends only on (job, seed, samples) and never on scheduling.

The desk manifest is generated from a fixed manifest seed; ``--seed`` changes
the Monte Carlo streams but not the instances.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

import numpy as np

from . import checks as ck
from .bodies import AxisBox, Ball, Body, Ellipsoid, Intersection, SymPolytope, Slab, body_from_json, rotate
from .errors import ContractViolation
from .measure import GaussianSpec, RadialMeasure, ball_measure, ball_volume, exact, marginal_profile, rho_n
from .randomness import Stream, derive_stream, haar_matrix
from .rotopt import (
    QuadratureSpec, SmoothProfile, givens, minimize_over_rotations, permutation_scan, smoothed_objective,
    objective_gradient,
)

SUITE_VERSION = "desk-1"
MANIFEST_SEED = 20_240_611
ROTOPT_TOL = 1e-3


@dataclass(frozen=True)
class Job:
    name: str
    check: str
    params: dict
    samples: int = 1_000_000
    group: str = ""

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, obj) -> "Job":
        return cls(obj["name"], obj["check"], obj["params"], int(obj.get("samples", 1_000_000)), obj.get("group", ""))


def job_stream(seed: int, name: str) -> Stream:
    return derive_stream(derive_stream(Stream(seed), "job"), name)


# ----------------------------------------------------------------------------
# parameter decoding


def _body(params, key) -> Body:
    if key not in params:
        raise ContractViolation(f"missing key {key!r}")
    return body_from_json(params[key])


def _dim(params, *bodies) -> int:
    if "n" in params:
        return int(params["n"])
    for b in bodies:
        if b.dim is not None:
            return b.dim
    raise ContractViolation("missing key 'n' (all bodies are dimension-free)")


def _spec(params, n):
    factor = params.get("factor")
    return GaussianSpec.standard(n) if factor is None else GaussianSpec.shaped(factor)


def _measure(params, n):
    kind = params.get("measure", "gaussian")
    scale = float(params.get("measure_scale", 1.0))
    if kind == "gaussian":
        return GaussianSpec.standard(n)
    if kind == "radial_gaussian":
        return RadialMeasure.gaussian(n)
    if kind == "uniform_ball":
        return RadialMeasure.uniform_ball(n, scale)
    if kind == "exponential":
        return RadialMeasure.exponential(n, scale)
    raise ContractViolation(f"unknown measure {kind!r}")


def _pair(params):
    a, b = _body(params, "a"), _body(params, "b")
    return a, b, _dim(params, a, b)


def _profile(params):
    return SmoothProfile.exponential(float(params.get("beta", 1.0)))


def _quad(params, n):
    q = params.get("quad")
    return QuadratureSpec.default(n) if q is None else QuadratureSpec.parse(q)


# ----------------------------------------------------------------------------
# runners: (params, N, stream, workers) -> CheckReport


def _run_correlation(p, N, s, w):
    a, b, n = _pair(p)
    return ck.correlation_check(a, b, _spec(p, n), N, s, workers=w)


def _run_khatri_sidak(p, N, s, w):
    return ck.khatri_sidak_check(GaussianSpec.shaped(p["factor"]), int(p.get("k", 1)), p["halfwidths"], N, s,
                                 workers=w)


def _run_khatri_sidak_product(p, N, s, w):
    return ck.khatri_sidak_product_check(GaussianSpec.shaped(p["factor"]), p["halfwidths"], N, s, workers=w)


def _directions(p):
    d = p.get("directions")
    return None if d is None else [np.asarray(u, dtype=float) for u in d]


def _run_prop1(p, N, s, w):
    a, b, n = _pair(p)
    return ck.prop1_check(a, b, n, N, s, directions=_directions(p), workers=w)


def _run_cor2(p, N, s, w):
    a, b, n = _pair(p)
    return ck.cor2_check(a, b, n, N, s, directions=_directions(p), workers=w)


def _run_pow2(p, N, s, w):
    a, b, n = _pair(p)
    return ck.pow2_bound_check(a, b, n, N, s, workers=w)


def _run_small_sets(p, N, s, w):
    a, b, n = _pair(p)
    return ck.small_sets_check(a, b, n, N, s, workers=w)


def _run_tensor_lift(p, N, s, w):
    a, b, n = _pair(p)
    return ck.tensor_lift_check(a, b, int(p["copies"]), n, N, s, c=p.get("c"), workers=w)


def _run_rotation_average(p, N, s, w):
    a, b, n = _pair(p)
    return ck.rotation_average_check(a, b, _measure(p, n), int(p.get("rotations", 500)), N, s, workers=w)


def _run_cor6(p, N, s, w):
    a = _body(p, "a")
    return ck.cor6_check(a, float(p["r"]), _dim(p, a), N, s, workers=w)


def _run_orthant(p, N, s, w):
    a, b, n = _pair(p)
    rep = ck.orthant_conditions_check(a, b, n, N, s, witness_points=int(p.get("witness_points", N)), workers=w)
    if p.get("expect_witness"):
        # negative control: the job passes when condition (i) is falsified
        cond_i = next(r for r in rep.subreports if r.name == "condition_i")
        rep.extra["negative_control"] = True
        rep.verdict = ck.PASS if cond_i.extra["witnesses"] > 0 else ck.FAIL
    return rep


def _run_kr(p, N, s, w):
    a, b, n = _pair(p)
    return ck.kr_lattice_check(*ck.kr_orthant_functions(a, b), N, s, n)


def _run_prop11(p, N, s, w):
    A = np.asarray(p["A"], dtype=float)
    g = ck.LogConcaveFn(p["g"]["kind"], _tuplify(p["g"].get("params", [])))
    return ck.prop11_identity_check(A, g, A.shape[0], N, s, workers=w)


def _tuplify(v):
    return tuple(_tuplify(x) for x in v) if isinstance(v, (list, tuple)) else v


def _run_prop11_analytic(p, N, s, w):
    """g = 1, A = a I: E[exp(-a|x|^2/2)] = (1 + a)^{-n/2}."""
    n, a = int(p["n"]), float(p["a"])
    rep = ck.prop11_identity_check(a * np.eye(n), ck.LogConcaveFn("one"), n, N, s, workers=w)
    lhs = rep.lhs
    return ck.make_report("prop11_analytic", lhs, exact((1 + a) ** (-n / 2)), lhs.std_error, sense="eq", stream=s,
                          config=rep.config, inputs={"n": n, "a": a}, subreports=rep.subreports)


def _run_marginal(p, N, s, w):
    body = _body(p, "body")
    n = _dim(p, body)
    lo, hi, count = p.get("grid", [-3.0, 3.0, 21])
    grid = np.linspace(float(lo), float(hi), int(count))
    prof = marginal_profile(body, int(p.get("axis", 0)), grid, n, N, s, workers=w)
    rep = ck.logconcavity_check(prof, name="marginal_logconcavity")
    rep.seed = s.seed
    rep.config = {"samples": N, "grid": [float(lo), float(hi), int(count)], "axis": int(p.get("axis", 0))}
    rep.inputs = {"body": body.to_json(), "n": n}
    rep.extra["profile"] = [e.value for e in prof]
    return rep


def _run_rho_identity(p, N, s, w):
    n = int(p["n"])
    target = (2 * math.pi) ** (n / 2)
    vol = ball_volume(n, 2 * rho_n(n))
    rel = abs(vol / target - 1)
    return ck.make_report("rho_identity", exact(rel), exact(1e-10), 0.0, sense="le", inputs={"n": n},
                          extra={"volume": vol, "target": target})


def _run_ball_clt(p, N, s, w):
    n = int(p["n"])
    gap = abs(ball_measure(n, math.sqrt(n)).value - 0.5)
    return ck.make_report("ball_clt", exact(gap), exact(1.5 / math.sqrt(n)), 0.0, sense="le", inputs={"n": n})


def _rot_inputs(p):
    return {k: p[k] for k in ("e_radii", "f_radii", "beta", "quad") if k in p}


def _run_rotopt_descent(p, N, s, w):
    r, rho = np.asarray(p["e_radii"], float), np.asarray(p["f_radii"], float)
    res = minimize_over_rotations(r, rho, _profile(p), _quad(p, r.size), stream=s)
    ok_diag = res.diagnostic <= ROTOPT_TOL
    gap = res.permutation_gap
    if gap is not None and gap < -ROTOPT_TOL:
        v = ck.FAIL
    elif ok_diag and (gap is None or gap <= ROTOPT_TOL):
        v = ck.PASS
    else:
        v = ck.INCONCLUSIVE
    best = res.value - (gap or 0.0)
    return ck.make_report("rotopt_descent", exact(res.value), exact(best), 0.0, sense="le", stream=s,
                          config=res.config, inputs=_rot_inputs(p), verdict_override=v,
                          extra={"diagnostic": res.diagnostic, "permutation_gap": gap, "converged": res.converged,
                                 "iterations": res.iterations, "trace": [list(t) for t in res.trace],
                                 "best_permutation": list(res.best_permutation or [])})


def alpha_grid(r, rho, profile, quad, step=1e-3):
    """Objective over alpha in (-pi/2, pi/2] for n = 2, U = V(alpha)."""
    m = int(round(math.pi / step))
    alphas = -math.pi / 2 + math.pi * np.arange(1, m + 1) / m
    vals = np.array([smoothed_objective(givens(2, 0, 1, a), r, profile, rho, quad) for a in alphas])
    return alphas, vals


def _circ_dist(a, targets, period=math.pi):
    return min(abs((a - t + period / 2) % period - period / 2) for t in targets)


def _run_rotopt_alpha_grid(p, N, s, w):
    r, rho = np.asarray(p["e_radii"], float), np.asarray(p["f_radii"], float)
    step = float(p.get("step", 1e-3))
    prof, quad = _profile(p), _quad(p, 2)
    alphas, vals = alpha_grid(r, rho, prof, quad, step)
    k = int(np.argmin(vals))
    dist = _circ_dist(alphas[k], (0.0, math.pi / 2))
    at_perm = min(smoothed_objective(givens(2, 0, 1, a), r, prof, rho, quad) for a in (0.0, math.pi / 2))
    v = ck.PASS if dist <= step * (1 + 1e-9) else ck.FAIL
    return ck.make_report("rotopt_alpha_grid", exact(float(vals[k])), exact(at_perm), 0.0, sense="le",
                          config={"step": step, "quad": str(quad)}, inputs=_rot_inputs(p), verdict_override=v,
                          extra={"argmin_alpha": float(alphas[k]), "distance_to_permutation": dist})


def _run_rotopt_haar_scan(p, N, s, w):
    r, rho = np.asarray(p["e_radii"], float), np.asarray(p["f_radii"], float)
    M = int(p.get("rotations", 1000))
    prof, quad = _profile(p), _quad(p, r.size)
    best = permutation_scan(r, rho, prof, quad)["best_value"]
    low = min(smoothed_objective(haar_matrix(derive_stream(s, "haar", m).generator, r.size), r, prof, rho, quad)
              for m in range(M))
    slack = low - best
    v = ck.PASS if slack >= -ROTOPT_TOL else ck.FAIL
    return ck.make_report("rotopt_haar_scan", exact(low), exact(best), 0.0, stream=s,
                          config={"rotations": M, "quad": str(quad), "tolerance": ROTOPT_TOL},
                          inputs=_rot_inputs(p), verdict_override=v)


def gradient_fd_error(U, r, rho, profile, quad, h=1e-4) -> float:
    """max |g - central difference| / max |g| over pairs i < j."""
    n = len(r)
    G = objective_gradient(U, r, profile, rho, quad)
    Um = np.asarray(U, dtype=float)
    err, scale = 0.0, 0.0
    for i in range(n):
        for j in range(i + 1, n):
            fp = smoothed_objective(Um @ givens(n, i, j, h).entries, r, profile, rho, quad)
            fm = smoothed_objective(Um @ givens(n, i, j, -h).entries, r, profile, rho, quad)
            err = max(err, abs(G[i, j] - (fp - fm) / (2 * h)))
            scale = max(scale, abs(G[i, j]))
    return err / scale if scale > 0 else err


def _run_rotopt_gradient(p, N, s, w):
    r, rho = np.asarray(p["e_radii"], float), np.asarray(p["f_radii"], float)
    U = haar_matrix(derive_stream(s, "U").generator, r.size)
    quad = _quad(p, r.size)
    h = float(p.get("h", 1e-4))
    rel = gradient_fd_error(U, r, rho, _profile(p), quad, h)
    return ck.make_report("rotopt_gradient", exact(rel), exact(1e-4), 0.0, sense="le", stream=s,
                          config={"quad": str(quad), "h": h}, inputs=_rot_inputs(p))


RUNNERS: dict[str, Callable] = {
    "correlation": _run_correlation,
    "khatri_sidak": _run_khatri_sidak,
    "khatri_sidak_product": _run_khatri_sidak_product,
    "prop1": _run_prop1,
    "cor2": _run_cor2,
    "pow2_bound": _run_pow2,
    "small_sets": _run_small_sets,
    "tensor_lift": _run_tensor_lift,
    "rotation_average": _run_rotation_average,
    "cor6": _run_cor6,
    "orthant_conditions": _run_orthant,
    "kr_lattice": _run_kr,
    "prop11": _run_prop11,
    "prop11_analytic": _run_prop11_analytic,
    "marginal_logconcavity": _run_marginal,
    "rho_identity": _run_rho_identity,
    "ball_clt": _run_ball_clt,
    "rotopt_descent": _run_rotopt_descent,
    "rotopt_alpha_grid": _run_rotopt_alpha_grid,
    "rotopt_haar_scan": _run_rotopt_haar_scan,
    "rotopt_gradient": _run_rotopt_gradient,
}


def run_job(job: Job, seed: int, samples: Optional[int] = None, workers: int = 1) -> ck.CheckReport:
    if job.check not in RUNNERS:
        raise ContractViolation(f"unknown check {job.check!r}; known: {', '.join(sorted(RUNNERS))}")
    N = int(samples) if samples is not None else job.samples
    rep = RUNNERS[job.check](job.params, N, job_stream(seed, job.name), workers)
    rep.name = job.name
    rep.config = dict(rep.config, check=job.check, group=job.group)
    return rep


# ----------------------------------------------------------------------------
# random instances


def random_orthogonal(gen, n):
    return haar_matrix(gen, n)


def random_ellipsoid(gen, n, lo=0.4, hi=2.5) -> Ellipsoid:
    return Ellipsoid(gen.uniform(lo, hi, n), random_orthogonal(gen, n))


def random_slab(gen, n, lo=0.3, hi=1.5) -> Slab:
    u = gen.standard_normal(n)
    return Slab(u / np.linalg.norm(u), float(gen.uniform(lo, hi)))


def random_box(gen, n, lo=0.4, hi=2.0, rotated=True) -> Body:
    box = AxisBox(gen.uniform(lo, hi, n))
    return rotate(box, random_orthogonal(gen, n)) if rotated and n > 1 else box


def random_polytope(gen, n, rows=4, lo=0.5, hi=2.0) -> SymPolytope:
    u = gen.standard_normal((rows, n))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    return SymPolytope(u / gen.uniform(lo, hi, rows)[:, None])


def random_body(gen, n, kinds=("slab", "box", "ellipsoid", "polytope", "ball")) -> Body:
    kind = kinds[int(gen.integers(len(kinds)))]
    if kind == "slab":
        return random_slab(gen, n)
    if kind == "box":
        return random_box(gen, n)
    if kind == "ellipsoid":
        return random_ellipsoid(gen, n)
    if kind == "polytope":
        return random_polytope(gen, n, rows=max(n + 1, 4))
    return Ball(float(gen.uniform(0.6, 1.4) * math.sqrt(n)))


def random_unconditional(gen, n) -> Body:
    kind = int(gen.integers(4))
    if kind == 0:
        return AxisBox(gen.uniform(0.4, 2.0, n))
    if kind == 1:
        return Ellipsoid(gen.uniform(0.5, 2.5, n))
    if kind == 2:
        return Ball(float(gen.uniform(0.6, 1.4) * math.sqrt(n)))
    return Intersection((AxisBox(gen.uniform(0.5, 2.0, n)), Ellipsoid(gen.uniform(0.8, 2.5, n))))


def random_factor(gen, n) -> np.ndarray:
    while True:
        T = gen.standard_normal((n, n))
        if abs(np.linalg.det(T)) > 0.05:
            return T


def random_psd(gen, n, scale=1.0) -> np.ndarray:
    B = gen.standard_normal((n, n))
    return scale * (B @ B.T) / n


def distinct_radii(gen, n, lo=0.5, hi=2.5, gap=0.1) -> np.ndarray:
    while True:
        r = gen.uniform(lo, hi, n)
        if n == 1 or np.min(np.diff(np.sort(r))) > gap:
            return r


# ----------------------------------------------------------------------------
# desk manifest


def _gen(group: str) -> np.random.Generator:
    return derive_stream(derive_stream(Stream(MANIFEST_SEED), "manifest"), group).generator


def _j(group, i, check, params, samples):
    return Job(f"{group}/{i:03d}", check, params, samples, group)


def desk_groups() -> dict[str, list[Job]]:
    """Acceptance instances keyed by group; groups map one-to-one to criteria."""
    out: dict[str, list[Job]] = {}

    out["rho_identity"] = [_j("rho_identity", n, "rho_identity", {"n": n}, 0) for n in range(1, 51)]
    out["ball_clt"] = [_j("ball_clt", i, "ball_clt", {"n": n}, 0) for i, n in enumerate((25, 100, 400))]

    g = _gen("khatri_sidak")
    jobs = []
    for i in range(200):
        n = int(g.integers(2, 7))
        T = np.eye(n) if i % 10 == 0 else random_factor(g, n)
        sd = np.sqrt(np.diag(T @ T.T))
        jobs.append(_j("khatri_sidak", i, "khatri_sidak",
                       {"factor": T.tolist(), "k": 1, "halfwidths": (sd * g.uniform(0.5, 2.0, n)).tolist()}, 200_000))
    out["khatri_sidak"] = jobs

    g = _gen("pitt_2d")
    kinds = ("slab", "box", "ellipsoid", "polytope")
    out["pitt_2d"] = [_j("pitt_2d", i, "correlation",
                         {"a": random_body(g, 2, kinds).to_json(), "b": random_body(g, 2, kinds).to_json(), "n": 2},
                         1_000_000) for i in range(100)]

    g = _gen("ellipsoids")
    jobs = []
    for i in range(100):
        n = int(g.integers(2, 6))
        jobs.append(_j("ellipsoids", i, "correlation",
                       {"a": random_ellipsoid(g, n).to_json(), "b": random_ellipsoid(g, n).to_json(), "n": n},
                       1_000_000))
    out["ellipsoids"] = jobs

    g = _gen("prop1")
    jobs = []
    for i in range(50):
        n = int(g.integers(1, 7))
        if i % 2 == 0:
            a, b = (Ball(float(g.uniform(0.5, 1.5) * math.sqrt(n))) for _ in range(2))
        else:
            a, b = AxisBox(g.uniform(0.4, 2.0, n)), AxisBox(g.uniform(0.4, 2.0, n))
        jobs.append(_j("prop1", i, "prop1", {"a": a.to_json(), "b": b.to_json(), "n": n}, 1_000_000))
    out["prop1"] = jobs

    g = _gen("pow2_bound")
    jobs = []
    for i in range(100):
        n = int(g.integers(1, 7))
        jobs.append(_j("pow2_bound", i, "pow2_bound",
                       {"a": random_body(g, n).to_json(), "b": random_body(g, n).to_json(), "n": n}, 200_000))
    out["pow2_bound"] = jobs

    g = _gen("cor2")
    jobs = []
    for i in range(20):
        n = int(g.integers(1, 5))
        if i % 2 == 0:
            a, b = (Ball(float(g.uniform(0.5, 1.5) * math.sqrt(n))) for _ in range(2))
        else:
            a, b = AxisBox(g.uniform(0.4, 2.0, n)), AxisBox(g.uniform(0.4, 2.0, n))
        jobs.append(_j("cor2", i, "cor2", {"a": a.to_json(), "b": b.to_json(), "n": n}, 200_000))
    out["cor2"] = jobs

    g = _gen("small_sets")
    jobs = []
    for i in range(50):
        n = int(g.integers(1, 7))
        pair = []
        for _ in range(2):
            e = random_ellipsoid(g, n)
            pair.append(e.scaled(rho_n(n) * g.uniform(0.5, 0.99) / e.bounding_radius()))
        jobs.append(_j("small_sets", i, "small_sets",
                       {"a": pair[0].to_json(), "b": pair[1].to_json(), "n": n}, 1_000_000))
    out["small_sets"] = jobs

    g = _gen("cor6")
    jobs = []
    for i in range(50):
        n = int(g.integers(1, 7))
        jobs.append(_j("cor6", i, "cor6", {"a": random_body(g, n, ("slab", "box", "ellipsoid", "polytope")).to_json(),
                                          "r": float(g.uniform(0.5, 1.5) * math.sqrt(n)), "n": n}, 1_000_000))
    out["cor6"] = jobs

    g = _gen("rotation_average")
    measures = ("gaussian", "gaussian", "uniform_ball", "exponential")
    jobs = []
    for i in range(20):
        n = int(g.integers(2, 5))
        jobs.append(_j("rotation_average", i, "rotation_average",
                       {"a": random_ellipsoid(g, n).to_json(), "b": random_ellipsoid(g, n).to_json(), "n": n,
                        "rotations": 500, "measure": measures[i % 4], "measure_scale": 2.0}, 20_000))
    out["rotation_average"] = jobs

    g = _gen("tensor_lift")
    jobs = []
    for i in range(20):
        n = int(g.integers(1, 5))
        copies = int(g.integers(1, min(4, 16 // n) + 1))
        if i % 4 == 0:
            a, b = AxisBox(g.uniform(0.8, 2.5, n)), AxisBox(g.uniform(0.8, 2.5, n))
        else:
            a, b = random_ellipsoid(g, n, 1.0, 3.0), random_ellipsoid(g, n, 1.0, 3.0)
        jobs.append(_j("tensor_lift", i, "tensor_lift",
                       {"a": a.to_json(), "b": b.to_json(), "n": n, "copies": copies, "c": 2.0 ** (n / 2)}, 1_000_000))
    out["tensor_lift"] = jobs

    g = _gen("orthant")
    jobs, kr = [], []
    for i in range(20):
        n = int(g.integers(2, 7))
        p = {"a": random_unconditional(g, n).to_json(), "b": random_unconditional(g, n).to_json(), "n": n,
             "witness_points": 100_000}
        jobs.append(_j("orthant", i, "orthant_conditions", p, 100_000))
        kr.append(_j("kr_lattice", i, "kr_lattice", {k: p[k] for k in ("a", "b", "n")}, 100_000))
    thin = Ellipsoid([2.0, 0.3], givens(2, 0, 1, math.pi / 5))
    jobs.append(_j("orthant", 20, "orthant_conditions",
                   {"a": thin.to_json(), "b": AxisBox([1.0, 1.0]).to_json(), "n": 2, "witness_points": 100_000,
                    "expect_witness": True}, 100_000))
    out["orthant"] = jobs
    out["kr_lattice"] = kr

    g = _gen("prop11")
    jobs = []
    for i in range(50):
        n = int(g.integers(1, 5))
        A = random_psd(g, n, g.uniform(0.2, 2.0))
        kind = i % 3
        if kind == 0:
            gfn = {"kind": "box", "params": g.uniform(0.5, 2.0, n).tolist()}
        elif kind == 1:
            gfn = {"kind": "gauss_bump", "params": random_psd(g, n, g.uniform(0.2, 2.0)).tolist()}
        else:
            gfn = {"kind": "exp_l1", "params": [float(g.uniform(0.5, 2.0))]}
        jobs.append(_j("prop11", i, "prop11", {"A": A.tolist(), "g": gfn}, 200_000))
    for i, (n, a) in enumerate(((1, 0.5), (2, 1.0), (3, 0.25), (4, 2.0), (6, 0.75))):
        jobs.append(_j("prop11", 50 + i, "prop11_analytic", {"n": n, "a": a}, 200_000))
    out["prop11"] = jobs

    g = _gen("rotopt_gradient")
    jobs = []
    for i in range(100):
        n = 2 + i % 2
        jobs.append(_j("rotopt_gradient", i, "rotopt_gradient",
                       {"e_radii": distinct_radii(g, n).tolist(), "f_radii": distinct_radii(g, n).tolist(),
                        "beta": 1.0, "quad": "gh:40", "h": 1e-4}, 0))
    out["rotopt_gradient"] = jobs

    g = _gen("rotopt_alpha_grid")
    out["rotopt_alpha_grid"] = [
        _j("rotopt_alpha_grid", i, "rotopt_alpha_grid",
           {"e_radii": distinct_radii(g, 2).tolist(), "f_radii": distinct_radii(g, 2).tolist(), "beta": 1.0,
            "step": 1e-3}, 0) for i in range(20)]

    g = _gen("rotopt_n3")
    desc, haar = [], []
    for i in range(10):
        p = {"e_radii": distinct_radii(g, 3).tolist(), "f_radii": distinct_radii(g, 3).tolist(), "beta": 1.0}
        desc.append(_j("rotopt_descent", i, "rotopt_descent", p, 0))
        haar.append(_j("rotopt_haar_scan", i, "rotopt_haar_scan", dict(p, rotations=1000), 0))
    for i in range(4):
        p = {"e_radii": distinct_radii(g, 3).tolist(), "f_radii": distinct_radii(g, 3).tolist(), "beta": 8.0}
        desc.append(_j("rotopt_descent", 10 + i, "rotopt_descent", p, 0))
    out["rotopt_descent"] = desc
    out["rotopt_haar_scan"] = haar

    g = _gen("marginal")
    jobs = []
    for i in range(10):
        kind = i % 4
        if kind == 0:
            body = random_ellipsoid(g, 4, 0.5, 2.0)
        elif kind == 1:
            body = random_box(g, 4, 0.5, 1.5)
        elif kind == 2:
            body = random_polytope(g, 4, rows=6)
        else:
            body = Intersection((random_ellipsoid(g, 4, 0.8, 2.5), random_slab(g, 4, 0.5, 1.5)))
        R = min(body.bounding_radius(), 4.0)
        jobs.append(_j("marginal", i, "marginal_logconcavity",
                       {"body": body.to_json(), "n": 4, "axis": int(g.integers(4)), "grid": [-R, R, 21]}, 1_000_000))
    out["marginal"] = jobs
    return out


def desk_suite() -> list[Job]:
    return [job for jobs in desk_groups().values() for job in jobs]


SUITES = {"desk": desk_suite}


def load_suite(name: str) -> list[Job]:
    if name not in SUITES:
        raise ContractViolation(f"unknown suite {name!r}; known: {', '.join(SUITES)}")
    return SUITES[name]()


def manifest_json(name: str = "desk") -> dict:
    return {"suite": name, "version": SUITE_VERSION, "manifest_seed": MANIFEST_SEED,
            "jobs": [j.to_json() for j in load_suite(name)]}
