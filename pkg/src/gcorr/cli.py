"""Command-line entry point.

    gcorr measure --body ball.json --n 3 --r 1
    gcorr check correlation --bodies pair.json --seed 7 --samples 100000 --out report.json
    gcorr check all --suite desk --seed 7 --jobs 4 --out reports/
    gcorr rotopt --e-radii 1 2 --f-radii 2 1 --beta 1 --quad polar:40 --seed 7 --out result.json
    gcorr report reports/

Settings resolve as command-line flag, then environment variable
(``GCORR_SEED``, ``GCORR_SAMPLES``, ``GCORR_JOBS``, ``GCORR_OUT``,
``GCORR_SUITE``, ``GCORR_QUAD``, ``GCORR_BETA``), then the ``--config`` file,
then the built-in default.

Exit status: 0 all pass, 2 any inconclusive, 1 any fail or error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .bodies import AxisBox, Ball, Ellipsoid, Scaled, body_from_json, scale
from .errors import BodyParseError, ContractViolation
from .measure import ball_measure, box_measure, ellipsoid_measure, mc_measure
from .randomness import NORMAL_METHOD, RNG_METHOD, Stream, derive_stream
from .report import atomic_write, dumps, exit_code, render_report
from .rotopt import QuadratureSpec, RotOptConfig, SmoothProfile, minimize_over_rotations
from .suite import SUITE_VERSION, Job, load_suite, manifest_json, run_job

COMMANDS = ("measure", "check", "check-all", "rotopt", "report")
DEFAULTS = {"seed": 0, "samples": None, "jobs": 1, "out": None, "suite": "desk", "quad": None, "beta": 1.0}
ENV = {k: f"GCORR_{k.upper()}" for k in DEFAULTS}
_CAST = {"seed": int, "samples": int, "jobs": int, "out": str, "suite": str, "quad": str, "beta": float}


@dataclass
class JobConfig:
    command: str
    seed: int = 0
    samples: Optional[int] = None
    inputs: list = field(default_factory=list)
    out: Optional[str] = None
    jobs: int = 1
    suite: str = "desk"
    quad: Optional[str] = None
    beta: float = 1.0
    overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ContractViolation(f"unknown command {self.command!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise ContractViolation("seed must be an unsigned 64-bit integer")
        if self.jobs < 1:
            raise ContractViolation("--jobs must be >= 1")

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, obj) -> "JobConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(obj) - known
        if unknown:
            raise ContractViolation(f"unknown config keys: {', '.join(sorted(unknown))}")
        return cls(**obj)


class CliError(Exception):
    pass


def _load_json(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"{path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError(f"{path}: line {exc.lineno}: {exc.msg}") from None


def resolve(args, name, file_cfg: dict, env=None):
    """flag > environment > config file > default."""
    env = os.environ if env is None else env
    value = getattr(args, name, None)
    if value is not None:
        return value
    if ENV[name] in env:
        try:
            return _CAST[name](env[ENV[name]])
        except ValueError:
            raise CliError(f"{ENV[name]}={env[ENV[name]]!r} is not a valid {_CAST[name].__name__}") from None
    if name in file_cfg and file_cfg[name] is not None:
        return file_cfg[name]
    return DEFAULTS[name]


def build_config(args, env=None) -> JobConfig:
    file_cfg = _load_json(args.config) if getattr(args, "config", None) else {}
    command = args.command
    inputs = []
    if command == "check" and args.name == "all":
        command = "check-all"
    if command == "check" and args.bodies:
        inputs = [args.bodies]
    if command == "measure":
        inputs = [args.body]
    if command == "report":
        inputs = [args.directory]
    values = {k: resolve(args, k, file_cfg, env) for k in DEFAULTS}
    overrides = dict(file_cfg.get("overrides", {}))
    if command == "check":
        overrides["check"] = args.name
    return JobConfig(command=command, inputs=inputs, overrides=overrides, **values)


# ----------------------------------------------------------------------------
# commands


def _closed_form(body, n):
    if isinstance(body, Scaled):
        body = body.inner.scaled(body.factor)
    if isinstance(body, Ball):
        return ball_measure(n, body.radius)
    if isinstance(body, AxisBox):
        return box_measure(body.halfwidths)
    if isinstance(body, Ellipsoid):
        # the standard Gaussian is rotation invariant, so orientation is irrelevant
        return ellipsoid_measure(body.radii)
    return None


def cmd_measure(cfg: JobConfig, args) -> int:
    body = body_from_json(_load_json(cfg.inputs[0]))
    if args.r is not None:
        body = scale(body, float(args.r))
    n = args.n if args.n is not None else body.dim
    if n is None:
        raise CliError("dimension-free body: pass --n")
    if body.dim is not None and body.dim != n:
        raise CliError(f"body has dimension {body.dim} but --n {n}")
    est = _closed_form(body, n)
    if est is None:
        est = mc_measure(body, n, cfg.samples or 1_000_000, derive_stream(Stream(cfg.seed), "measure"))
    out = {"body": body.to_json(), "n": n, "estimate": est.to_json(), "seed": cfg.seed, "version": __version__}
    _emit(out, cfg.out)
    return 0


def _emit(obj, out):
    if out:
        atomic_write(out, dumps(obj))
    else:
        sys.stdout.write(dumps(obj))


def cmd_check(cfg: JobConfig, args) -> int:
    if not cfg.inputs:
        raise CliError("check needs --bodies FILE")
    params = _load_json(cfg.inputs[0])
    name = cfg.overrides["check"]
    job = Job(name, name, params, cfg.samples or 1_000_000)
    rep = run_job(job, cfg.seed, workers=cfg.jobs)
    _emit(rep.to_json(), cfg.out)
    print(f"{rep.name}: {rep.verdict} (slack {rep.slack:.4g}, se {rep.slack_se:.3g})", file=sys.stderr)
    return exit_code([rep.verdict])


def run_suite(jobs: list[Job], seed: int, out_dir, samples=None, max_jobs=1, on_done=None) -> list[str]:
    """Run jobs concurrently (up to ``max_jobs``), writing one report per job atomically.

    ``on_done(job, report, seconds)`` is called after each job; timings never
    reach the report files, which stay byte-reproducible.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    def one(job):
        t0 = time.perf_counter()
        rep = run_job(job, seed, samples)
        atomic_write(out_dir / (job.name.replace("/", "-") + ".json"), dumps(rep.to_json()))
        if on_done is not None:
            on_done(job, rep, time.perf_counter() - t0)
        return rep.verdict

    if max_jobs == 1:
        verdicts = [one(j) for j in jobs]
    else:
        with ThreadPoolExecutor(max_workers=max_jobs) as pool:
            verdicts = list(pool.map(one, jobs))
    index = {"suite_version": SUITE_VERSION, "seed": seed, "samples": samples,
             "version": __version__, "rng": {"generator": RNG_METHOD, "normals": NORMAL_METHOD},
             "reports": {j.name: v for j, v in zip(jobs, verdicts)}}
    atomic_write(out_dir / "index.json", dumps(index))
    return verdicts


def cmd_check_all(cfg: JobConfig, args) -> int:
    if not cfg.out:
        raise CliError("check all needs --out DIR")
    jobs = load_suite(cfg.suite)
    only = getattr(args, "group", None)
    if only:
        jobs = [j for j in jobs if j.group in only]
    verdicts = run_suite(jobs, cfg.seed, cfg.out, cfg.samples, cfg.jobs)
    code = exit_code(verdicts)
    print(f"{len(verdicts)} reports in {cfg.out}; exit {code}", file=sys.stderr)
    return code


def cmd_rotopt(cfg: JobConfig, args) -> int:
    r = np.asarray(args.e_radii, dtype=float)
    rho = np.asarray(args.f_radii, dtype=float)
    if r.shape != rho.shape:
        raise CliError("--e-radii and --f-radii need the same length")
    quad = QuadratureSpec.parse(cfg.quad, cfg.seed) if cfg.quad else QuadratureSpec.default(r.size)
    rc = RotOptConfig(max_iter=args.max_iter, grad_tol=args.grad_tol)
    res = minimize_over_rotations(r, rho, SmoothProfile.exponential(cfg.beta), quad, rc,
                                  stream=derive_stream(Stream(cfg.seed), "rotopt"))
    out = dict(res.to_json(), seed=cfg.seed, version=__version__)
    _emit(out, cfg.out)
    ok = res.diagnostic <= 1e-3 and (res.permutation_gap is None or abs(res.permutation_gap) <= 1e-3)
    return 0 if ok else 2


def cmd_report(cfg: JobConfig, args) -> int:
    d = Path(cfg.inputs[0])
    if not d.is_dir():
        raise CliError(f"{d}: not a directory")
    rows, code = render_report(d, args.out)
    sys.stdout.write((Path(args.out or d) / "summary.txt").read_text())
    return code


def cmd_manifest(args) -> int:
    _emit(manifest_json(args.suite or "desk"), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gcorr", description="Numerical checks of Gaussian correlation inequalities.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, *names):
        if "seed" in names:
            sp.add_argument("--seed", type=int)
        if "samples" in names:
            sp.add_argument("--samples", type=int)
        if "jobs" in names:
            sp.add_argument("--jobs", type=int)
        if "out" in names:
            sp.add_argument("--out")
        if "suite" in names:
            sp.add_argument("--suite")
        if "quad" in names:
            sp.add_argument("--quad", help="gh:L, polar:L or mc:N")
        if "beta" in names:
            sp.add_argument("--beta", type=float)
        sp.add_argument("--config", help="JobConfig JSON supplying file defaults")

    m = sub.add_parser("measure", help="Gaussian measure of one body")
    m.add_argument("--body", required=True)
    m.add_argument("--n", type=int)
    m.add_argument("--r", type=float, help="dilate the body by this factor")
    common(m, "seed", "samples", "out")

    c = sub.add_parser("check", help="run one checker, or 'all' for a suite")
    c.add_argument("name")
    c.add_argument("--bodies")
    c.add_argument("--group", action="append", help="with 'all': restrict to these groups")
    common(c, "seed", "samples", "jobs", "out", "suite")

    r = sub.add_parser("rotopt", help="minimize ellipsoid overlap over rotations")
    r.add_argument("--e-radii", type=float, nargs="+", required=True)
    r.add_argument("--f-radii", type=float, nargs="+", required=True)
    r.add_argument("--max-iter", type=int, default=500)
    r.add_argument("--grad-tol", type=float, default=1e-8)
    common(r, "seed", "out", "quad", "beta")

    rp = sub.add_parser("report", help="summarize a report directory")
    rp.add_argument("directory")
    rp.add_argument("--out", help="directory for summary files (default: the report directory)")

    mf = sub.add_parser("manifest", help="print a suite manifest")
    mf.add_argument("--suite")
    mf.add_argument("--out")
    return p


HANDLERS = {"measure": cmd_measure, "check": cmd_check, "check-all": cmd_check_all, "rotopt": cmd_rotopt,
            "report": cmd_report}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "manifest":
            return cmd_manifest(args)
        if args.command == "report":
            args.config = None
        cfg = build_config(args)
        return HANDLERS[cfg.command](cfg, args)
    except BodyParseError as exc:
        print(f"error: malformed body: {exc}", file=sys.stderr)
    except (CliError, ContractViolation, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    return 1


if __name__ == "__main__":
    sys.exit(main())
