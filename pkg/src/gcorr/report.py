"""Summary tables over a directory of report files.

CSV columns (fixed): ``name, check, slack, slack_over_se, verdict``.
``slack_over_se`` is ``inf`` for exact comparisons.  Files holding a
minimization trace also get a two-column ``<stem>.trace.csv`` with
``iteration, value``.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

from .checks import FAIL, INCONCLUSIVE, PASS, CheckReport

CSV_COLUMNS = ("name", "check", "slack", "slack_over_se", "verdict")
ERROR = "error"
RESERVED = {"index.json", "manifest.json", "config.json"}


def exit_code(verdicts) -> int:
    """0 when everything passed (or nothing ran), 2 if any inconclusive, 1 on fail or error."""
    verdicts = list(verdicts)
    if any(v in (FAIL, ERROR) for v in verdicts):
        return 1
    if any(v == INCONCLUSIVE for v in verdicts):
        return 2
    return 0


def atomic_write(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _plain(o):
    # numpy scalars and arrays that slipped into an extras dict
    if hasattr(o, "tolist"):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, default=_plain) + "\n"


@dataclass
class Row:
    name: str
    check: str
    slack: float
    z: float
    verdict: str
    trace: list = None

    def cells(self):
        z = "inf" if self.z == math.inf else "-inf" if self.z == -math.inf else repr(self.z)
        return [self.name, self.check, repr(self.slack), z, self.verdict]


def _rotopt_row(stem, obj) -> Row:
    gap = obj.get("permutation_gap")
    ok = obj["diagnostic"] <= 1e-3 and (gap is None or abs(gap) <= 1e-3)
    bad = gap is not None and gap < -1e-3
    v = FAIL if bad else PASS if ok else INCONCLUSIVE
    return Row(stem, "rotopt", -(gap or 0.0), math.inf, v, [t[:2] for t in obj["trace"]])


def read_row(path: Path) -> Row:
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
        if "U_star" in obj:
            return _rotopt_row(path.stem, obj)
        rep = CheckReport.from_json(obj)
        trace = rep.extra.get("trace")
        return Row(rep.name, rep.config.get("check", rep.name), rep.slack, rep.z, rep.verdict,
                   [t[:2] for t in trace] if trace else None)
    except (ValueError, KeyError, TypeError) as exc:
        return Row(path.stem, ERROR, math.nan, math.nan, ERROR, [str(exc)])


def collect(directory) -> list[Row]:
    directory = Path(directory)
    files = sorted(p for p in directory.glob("*.json") if p.name not in RESERVED)
    return sorted((read_row(p) for p in files), key=lambda r: r.name)


def to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow(r.cells())
    return buf.getvalue()


def trace_csv(trace) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("iteration", "value"))
    for it, val in trace:
        w.writerow((int(it), repr(float(val))))
    return buf.getvalue()


def to_text(rows) -> str:
    if not rows:
        return "no reports\n"
    width = max(len(r.name) for r in rows)
    lines = [f"{'name':<{width}}  {'slack':>12}  {'slack/se':>10}  verdict"]
    for r in rows:
        z = r.cells()[3]
        z = z if z in ("inf", "-inf", "nan") else f"{r.z:.2f}"
        lines.append(f"{r.name:<{width}}  {r.slack:>12.4g}  {z:>10}  {r.verdict}")
    counts = {v: sum(r.verdict == v for r in rows) for v in (PASS, INCONCLUSIVE, FAIL, ERROR)}
    lines.append(", ".join(f"{k}: {v}" for k, v in counts.items()))
    return "\n".join(lines) + "\n"


def render_report(directory, out_dir=None) -> tuple[list[Row], int]:
    """Write summary.csv, summary.txt and trace CSVs into ``out_dir`` (default: the report directory)."""
    rows = collect(directory)
    out = Path(out_dir or directory)
    atomic_write(out / "summary.csv", to_csv(rows))
    atomic_write(out / "summary.txt", to_text(rows))
    for r in rows:
        if r.trace and r.verdict != ERROR:
            atomic_write(out / f"{r.name.replace('/', '-')}.trace.csv", trace_csv(r.trace))
    return rows, exit_code(r.verdict for r in rows)
