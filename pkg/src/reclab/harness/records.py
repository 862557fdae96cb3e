"""Trial records and report files (records.jsonl, summary.csv, summary.txt)."""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

STATUSES = ("pass", "fail", "vacuous-infinite", "skipped")

# JSONL key order; also the documented record schema
RECORD_KEYS = (
    "check", "trial", "seed", "dims", "digest", "lhs", "rhs", "slack", "tol",
    "status", "cert_residual", "wall_time", "note",
)


def _num(x):
    """Floats go to JSON as numbers, non-finite ones as strings."""
    if x is None:
        return None
    x = float(x)
    if math.isfinite(x):
        return x
    return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")


def _parse_num(x):
    return float(x) if isinstance(x, str) else x


def digest(*arrays) -> str:
    """Short SHA-256 of the inputs' bytes (complex128, C order)."""
    h = hashlib.sha256()
    for a in arrays:
        h.update(np.ascontiguousarray(np.asarray(a, dtype=complex)).tobytes())
    return h.hexdigest()[:16]


@dataclass
class TrialRecord:
    check: str
    trial: int
    seed: int
    dims: tuple
    digest: str
    lhs: float
    rhs: float
    slack: float
    tol: float
    status: str = ""
    cert_residual: float = 0.0
    wall_time: float = 0.0
    note: str = ""

    def __post_init__(self):
        if not self.status:
            self.status = status_for(self.slack, self.tol)
        if self.status not in STATUSES:
            raise ValueError(f"bad status {self.status!r}")

    def to_dict(self) -> dict:
        return {
            "check": self.check,
            "trial": int(self.trial),
            "seed": int(self.seed),
            "dims": [int(x) for x in self.dims],
            "digest": self.digest,
            "lhs": _num(self.lhs),
            "rhs": _num(self.rhs),
            "slack": _num(self.slack),
            "tol": _num(self.tol),
            "status": self.status,
            "cert_residual": _num(self.cert_residual),
            "wall_time": _num(self.wall_time),
            "note": self.note,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))

    @classmethod
    def from_dict(cls, d: dict) -> "TrialRecord":
        kw = {k: d[k] for k in RECORD_KEYS}
        for k in ("lhs", "rhs", "slack", "tol", "cert_residual", "wall_time"):
            kw[k] = _parse_num(kw[k])
        kw["dims"] = tuple(kw["dims"])
        return cls(**kw)


def status_for(slack: float, tol: float) -> str:
    """``fail`` iff ``slack < -tol`` (NaN slack fails too)."""
    if math.isnan(slack):
        return "fail"
    return "fail" if slack < -tol else "pass"


def write_jsonl(records, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(r.to_json() + "\n")


def read_jsonl(path) -> list[TrialRecord]:
    with open(path, encoding="utf-8") as fh:
        return [TrialRecord.from_dict(json.loads(line)) for line in fh if line.strip()]


@dataclass
class CheckSummary:
    check: str
    count: int = 0
    passed: int = 0
    failed: int = 0
    vacuous: int = 0
    skipped: int = 0
    slacks: list = field(default_factory=list)

    @property
    def min_slack(self) -> float:
        return min(self.slacks) if self.slacks else float("nan")

    @property
    def median_slack(self) -> float:
        return float(np.median(self.slacks)) if self.slacks else float("nan")


def summarize(records) -> list[CheckSummary]:
    out: dict[str, CheckSummary] = {}
    for r in records:
        s = out.setdefault(r.check, CheckSummary(r.check))
        s.count += 1
        if r.status == "pass":
            s.passed += 1
        elif r.status == "fail":
            s.failed += 1
        elif r.status == "vacuous-infinite":
            s.vacuous += 1
        else:
            s.skipped += 1
        if r.status in ("pass", "fail") and math.isfinite(r.slack):
            s.slacks.append(float(r.slack))
    return list(out.values())


CSV_HEADER = ("check", "count", "pass", "fail", "vacuous_infinite", "skipped", "min_slack", "median_slack")


def emit_reports(records, out_dir) -> int:
    """Write the three report files; return the exit code (0 iff no failures)."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        write_jsonl(records, out / "records.jsonl")
        summaries = summarize(records)
        with open(out / "summary.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_HEADER)
            for s in summaries:
                w.writerow([s.check, s.count, s.passed, s.failed, s.vacuous, s.skipped,
                            repr(s.min_slack), repr(s.median_slack)])
        (out / "summary.txt").write_text(format_summary(summaries), encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write reports to {out}: {exc}") from exc
    return exit_code(records)


def exit_code(records) -> int:
    return 1 if any(r.status == "fail" for r in records) else 0


def format_summary(summaries) -> str:
    if not summaries:
        return "no records\n"
    width = max(len(s.check) for s in summaries)
    lines = []
    for s in summaries:
        verdict = "FAIL" if s.failed else "ok"
        lines.append(
            f"{s.check:<{width}}  {verdict:<4}  n={s.count:<4d} pass={s.passed:<4d} fail={s.failed:<3d} "
            f"vacuous={s.vacuous:<3d} skipped={s.skipped:<3d} min_slack={s.min_slack:.3e} "
            f"median_slack={s.median_slack:.3e}"
        )
    total_fail = sum(s.failed for s in summaries)
    lines.append(f"total failures: {total_fail}")
    return "\n".join(lines) + "\n"
