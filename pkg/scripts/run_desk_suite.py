"""Run the desk suite and summarize it.

    python3 scripts/run_desk_suite.py --out reports/ --seed 7
    python3 scripts/run_desk_suite.py --out quick/ --group cor6 --group pitt_2d --samples 20000

Writes one JSON report per job plus summary.csv / summary.txt, and prints
the wall time spent in each group.  Exit status follows the CLI convention.
"""
import argparse
import sys
import time
from collections import defaultdict

from gcorr.cli import run_suite
from gcorr.report import render_report
from gcorr.suite import load_suite


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--samples", type=int, default=None, help="override every job's sample count")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--group", action="append", help="restrict to these groups")
    args = p.parse_args(argv)

    jobs = load_suite("desk")
    if args.group:
        jobs = [j for j in jobs if j.group in args.group]
    seconds = defaultdict(float)
    counts = defaultdict(lambda: defaultdict(int))

    def tick(job, rep, secs):
        seconds[job.group] += secs
        counts[job.group][rep.verdict] += 1

    t0 = time.perf_counter()
    run_suite(jobs, args.seed, args.out, args.samples, args.jobs, on_done=tick)
    wall = time.perf_counter() - t0
    _, code = render_report(args.out)

    print(f"{'group':20s} {'jobs':>5s} {'seconds':>8s}  verdicts")
    for g in seconds:
        v = ", ".join(f"{k} {n}" for k, n in sorted(counts[g].items()))
        print(f"{g:20s} {sum(counts[g].values()):5d} {seconds[g]:8.1f}  {v}")
    print(f"total {len(jobs)} jobs in {wall:.1f}s; summary in {args.out}/summary.txt")
    return code


if __name__ == "__main__":
    sys.exit(main())
