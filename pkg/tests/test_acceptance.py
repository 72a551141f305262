"""Acceptance criteria 1-14 at their stated tolerances.

The desk suite runs once in-process with one worker (the same code path as
``gcorr check all --suite desk --seed 7 --jobs 1``), timing each group, and a
second time through the command line with ``--jobs 8`` for the
reproducibility criterion.  Each test prints one ``criterion N: PASS|FAIL``
line.  Expect roughly eight minutes on one core.
"""
import math
import time
from collections import defaultdict

import numpy as np
import pytest

from gcorr import cli
from gcorr.bodies import body_from_json
from gcorr.checks import FAIL, PASS, VERDICT_ATOL
from gcorr.measure import ball_measure, ball_volume, rho_n
from gcorr.suite import ROTOPT_TOL, load_suite

SEED = 7

pytestmark = pytest.mark.slow


class DeskRun:
    def __init__(self, out):
        self.out = out
        self.jobs = defaultdict(list)
        self.reports = defaultdict(list)
        self.seconds = defaultdict(float)

    def __call__(self, job, rep, secs):
        self.jobs[job.group].append(job)
        self.reports[job.group].append(rep)
        self.seconds[job.group] += secs

    def time(self, *groups):
        return sum(self.seconds[g] for g in groups)


@pytest.fixture(scope="module")
def desk(tmp_path_factory):
    run = DeskRun(tmp_path_factory.mktemp("desk_jobs1"))
    cli.run_suite(load_suite("desk"), SEED, run.out, max_jobs=1, on_done=run)
    return run


def announce(capsys, number, ok, detail):
    with capsys.disabled():
        print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")


def sub(rep, name):
    (hit,) = [s for s in rep.subreports if s.name == name]
    return hit


def dim(obj):
    return body_from_json(obj).dim


def no_fails(reps):
    return sum(r.verdict == FAIL for r in reps)


# 1 -------------------------------------------------------------------------


def test_criterion_01_rho_identity(capsys):
    t0 = time.perf_counter()
    worst = max(abs(ball_volume(n, 2 * rho_n(n)) / (2 * math.pi) ** (n / 2) - 1) for n in range(1, 51))
    ratio = rho_n(10_000) / (0.5 * math.sqrt(10_000 / math.e))
    secs = time.perf_counter() - t0
    ok = worst <= 1e-10 and 0.98 <= ratio <= 1.02 and secs < 1
    announce(capsys, 1, ok, f"max rel err {worst:.2e}, rho_n(1e4) ratio {ratio:.5f}, {secs:.3f}s")
    assert ok


# 2 -------------------------------------------------------------------------


def test_criterion_02_ball_clt(capsys):
    t0 = time.perf_counter()
    gaps = {n: abs(ball_measure(n, math.sqrt(n)).value - 0.5) for n in (25, 100, 400)}
    secs = time.perf_counter() - t0
    ok = all(g <= 1.5 / math.sqrt(n) for n, g in gaps.items()) and secs < 1
    detail = ", ".join(f"n={n}: {g:.4f} <= {1.5 / math.sqrt(n):.4f}" for n, g in gaps.items())
    announce(capsys, 2, ok, f"{detail}, {secs:.3f}s")
    assert ok


# 3 -------------------------------------------------------------------------


def test_criterion_03_khatri_sidak(desk, capsys):
    jobs, reps = desk.jobs["khatri_sidak"], desk.reports["khatri_sidak"]
    shape_ok = (len(reps) == 200 and all(j.params["k"] == 1 and len(j.params["halfwidths"]) <= 6
                                        and j.samples == 200_000 for j in jobs))
    below = sum(r.slack < -3 * r.slack_se - VERDICT_ATOL for r in reps)
    ident = [r for j, r in zip(jobs, reps)
             if np.array_equal(np.asarray(j.params["factor"]), np.eye(len(j.params["factor"])))]
    exact_zero = bool(ident) and all(r.slack == 0.0 for r in ident)
    secs = desk.time("khatri_sidak")
    ok = shape_ok and below == 0 and exact_zero and secs < 120
    announce(capsys, 3, ok, f"{len(reps)} instances, {below} below -3se, {len(ident)} with T=I all slack 0: "
                            f"{exact_zero}, {secs:.1f}s")
    assert ok


# 4, 5 ----------------------------------------------------------------------


def test_criterion_04_pitt_2d(desk, capsys):
    jobs, reps = desk.jobs["pitt_2d"], desk.reports["pitt_2d"]
    dims = {dim(j.params[k]) for j in jobs for k in ("a", "b")}
    shape_ok = len(reps) == 100 and all(j.samples == 1_000_000 for j in jobs) and dims == {2}
    fails, secs = no_fails(reps), desk.time("pitt_2d")
    ok = shape_ok and fails == 0 and secs < 180
    announce(capsys, 4, ok, f"{len(reps)} pairs, {fails} fails, {secs:.1f}s")
    assert ok


def test_criterion_05_ellipsoids(desk, capsys):
    jobs, reps = desk.jobs["ellipsoids"], desk.reports["ellipsoids"]
    dims = {dim(j.params["a"]) for j in jobs}
    shape_ok = len(reps) == 100 and dims <= {2, 3, 4, 5} and all(j.samples == 1_000_000 for j in jobs)
    fails, secs = no_fails(reps), desk.time("ellipsoids")
    ok = shape_ok and fails == 0 and secs < 300
    announce(capsys, 5, ok, f"{len(reps)} pairs, n in {sorted(dims)}, {fails} fails, {secs:.1f}s")
    assert ok


# 6 -------------------------------------------------------------------------


def test_criterion_06_prop1_and_pow2(desk, capsys):
    p1, p2 = desk.reports["prop1"], desk.reports["pow2_bound"]
    kinds = {(j.params["a"]["kind"], j.params["b"]["kind"]) for j in desk.jobs["prop1"]}
    shape_ok = (len(p1) == 50 and len(p2) == 100 and kinds <= {("ball", "ball"), ("axis_box", "axis_box")}
                and all(j.params["n"] <= 6 for j in desk.jobs["pow2_bound"]))
    passed = sum(r.verdict == PASS for r in p1), sum(r.verdict == PASS for r in p2)
    secs = desk.time("prop1", "pow2_bound")
    ok = shape_ok and passed == (50, 100) and secs < 180
    announce(capsys, 6, ok, f"prop1 {passed[0]}/50 pass, pow2 bound {passed[1]}/100 pass, {secs:.1f}s")
    assert ok


# 7 -------------------------------------------------------------------------


def test_criterion_07_small_sets_cor6_rotation_average(desk, capsys):
    groups = ("small_sets", "cor6", "rotation_average")
    counts = tuple(len(desk.reports[g]) for g in groups)
    M = {r.config.get("rotations") for r in desk.reports["rotation_average"]}
    fails = sum(no_fails(desk.reports[g]) for g in groups)
    secs = desk.time(*groups)
    ok = counts == (50, 50, 20) and M == {500} and fails == 0 and secs < 300
    announce(capsys, 7, ok, f"instances {counts}, M={sorted(M)}, {fails} fails, {secs:.1f}s")
    assert ok


# 8 -------------------------------------------------------------------------


def test_criterion_08_tensor_lift(desk, capsys):
    jobs, reps = desk.jobs["tensor_lift"], desk.reports["tensor_lift"]
    shape_ok = len(reps) == 20 and all(j.params["copies"] <= 4 and j.params["n"] * j.params["copies"] <= 16
                                       for j in jobs)
    worst = max(abs(r.slack) / (3 * r.slack_se + VERDICT_ATOL) for r in reps)
    secs = desk.time("tensor_lift")
    ok = shape_ok and worst <= 1 and secs < 120
    announce(capsys, 8, ok, f"{len(reps)} instances, max |diff| / (3 se) = {worst:.3f}, {secs:.1f}s")
    assert ok


# 9 -------------------------------------------------------------------------


def test_criterion_09_orthant_and_karlin_rinott(desk, capsys):
    jobs, reps = desk.jobs["orthant"], desk.reports["orthant"]
    pos = [(j, r) for j, r in zip(jobs, reps) if not j.params.get("expect_witness")]
    neg = [r for j, r in zip(jobs, reps) if j.params.get("expect_witness")]
    dims = {r.inputs["measure"]["n"] for _, r in pos}
    cond_i = sum(sub(r, "condition_i").extra["witnesses"] for _, r in pos)
    points = {sub(r, "condition_i").config["points"] for _, r in pos}
    rest = all(sub(r, "condition_ii").verdict == PASS and sub(r, "orthant_inequality").verdict == PASS
               for _, r in pos)
    kr = desk.reports["kr_lattice"]
    kr_w = sum(r.extra["witnesses"] for r in kr)
    kr_pairs = {r.config["pairs"] for r in kr}
    control = len(neg) == 1 and sub(neg[0], "condition_i").extra["witnesses"] > 0
    secs = desk.time("orthant", "kr_lattice")
    ok = (len(pos) == 20 and max(dims) <= 6 and points == {100_000} and cond_i == 0 and rest and len(kr) == 20
          and kr_pairs == {100_000} and kr_w == 0 and control and secs < 180)
    announce(capsys, 9, ok, f"{len(pos)} pairs: condition (i) witnesses {cond_i}, (ii) and orthant inequality "
                            f"pass {rest}; KR witnesses {kr_w}; control witness found {control}; {secs:.1f}s")
    assert ok


# 10 ------------------------------------------------------------------------


def test_criterion_10_prop11(desk, capsys):
    jobs, reps = desk.jobs["prop11"], desk.reports["prop11"]
    rand = [(j, r) for j, r in zip(jobs, reps) if j.check == "prop11"]
    ana = [(j, r) for j, r in zip(jobs, reps) if j.check == "prop11_analytic"]
    kinds = {j.params["g"]["kind"] for j, _ in rand}

    def within(s, target=None):
        ref = s.rhs.value if target is None else target
        return abs(s.lhs.value - ref) <= 3 * s.slack_se + VERDICT_ATOL

    ident = sum(within(sub(r, "identity")) for _, r in rand)
    ana_ok = sum(within(sub(r, "identity"), (1 + j.params["a"]) ** (-j.params["n"] / 2)) for j, r in ana)
    ineq_fails = sum(sub(r, "inequality").verdict == FAIL for _, r in rand + ana)
    secs = desk.time("prop11")
    ok = (len(rand) == 50 and ident == 50 and len(ana) >= 1 and ana_ok == len(ana) and ineq_fails == 0
          and len(kinds) == 3 and secs < 180)
    announce(capsys, 10, ok, f"identity within 3se {ident}/50 (g kinds {sorted(kinds)}), analytic {ana_ok}/{len(ana)}, "
                             f"inequality fails {ineq_fails}, {secs:.1f}s")
    assert ok


# 11 ------------------------------------------------------------------------


def test_criterion_11_gradient(desk, capsys):
    jobs, reps = desk.jobs["rotopt_gradient"], desk.reports["rotopt_gradient"]
    dims = {len(j.params["e_radii"]) for j in jobs}
    quads = {r.config["quad"] for r in reps}
    worst = max(r.lhs.value for r in reps)
    secs = desk.time("rotopt_gradient")
    ok = len(reps) == 100 and dims == {2, 3} and quads == {"gh:40"} and worst <= 1e-4 and secs < 120
    announce(capsys, 11, ok, f"{len(reps)} triples, n in {sorted(dims)}, {sorted(quads)}, "
                             f"max rel error {worst:.2e}, {secs:.1f}s")
    assert ok


# 12 ------------------------------------------------------------------------


def test_criterion_12_permutation_extremality(desk, capsys):
    grid = desk.reports["rotopt_alpha_grid"]
    a_ok = sum(r.extra["distance_to_permutation"] <= r.config["step"] * (1 + 1e-9) for r in grid)
    steps = {r.config["step"] for r in grid}
    dj, desc = desk.jobs["rotopt_descent"], desk.reports["rotopt_descent"]
    b_ok = sum(r.extra["diagnostic"] <= ROTOPT_TOL and r.extra["permutation_gap"] <= ROTOPT_TOL for r in desc)
    base = sum(1 for j in dj if j.params["beta"] == 1.0 and len(j.params["e_radii"]) == 3)
    haar = desk.reports["rotopt_haar_scan"]
    c_ok = sum(r.lhs.value >= r.rhs.value - ROTOPT_TOL for r in haar)
    M = {r.config["rotations"] for r in haar}
    secs = desk.time("rotopt_alpha_grid", "rotopt_descent", "rotopt_haar_scan")
    ok = (len(grid) == 20 and a_ok == 20 and steps == {1e-3} and base >= 10 and b_ok == len(desc)
          and len(haar) == 10 and c_ok == 10 and M == {1000} and secs < 600)
    announce(capsys, 12, ok, f"(a) {a_ok}/20 grid minima at a permutation; (b) {b_ok}/{len(desc)} descents "
                             f"reach the permutation ({base} at beta=1); (c) {c_ok}/10 Haar scans above the "
                             f"permutation minimum; {secs:.1f}s")
    assert ok


# 13 ------------------------------------------------------------------------


def test_criterion_13_marginal_logconcavity(desk, capsys):
    jobs, reps = desk.jobs["marginal"], desk.reports["marginal"]
    shape_ok = len(reps) == 10 and all(r.config["grid"][2] == 21 and r.config["samples"] == 1_000_000 for r in reps)
    dims = {dim(j.params["body"]) for j in jobs}
    passed = sum(r.verdict == PASS for r in reps)
    secs = desk.time("marginal")
    ok = shape_ok and dims == {4} and passed == 10 and secs < 300
    announce(capsys, 13, ok, f"{passed}/10 profiles log-concave, {secs:.1f}s")
    assert ok


# 14 ------------------------------------------------------------------------


def test_criterion_14_reproducibility(desk, tmp_path, capsys):
    out = tmp_path / "desk_jobs8"
    code = cli.main(["check", "all", "--suite", "desk", "--seed", str(SEED), "--jobs", "8", "--out", str(out)])
    a = sorted(p.name for p in desk.out.iterdir())
    b = sorted(p.name for p in out.iterdir())
    differing = [n for n in a if n in b and (desk.out / n).read_bytes() != (out / n).read_bytes()]
    ok = code == 0 and a == b and not differing and len(a) == len(load_suite("desk")) + 1
    announce(capsys, 14, ok, f"{len(a)} files with --jobs 1, {len(b)} with --jobs 8, {len(differing)} differ")
    assert ok
