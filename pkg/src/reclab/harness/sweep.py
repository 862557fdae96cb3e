"""Sweep runner: all enabled checks over their trial ranges."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

from .checks import run_trial
from .config import ExperimentConfig
from .records import TrialRecord


def _workers(requested: int | None) -> int:
    if requested is not None:
        return max(1, int(requested))
    return max(1, int(os.environ.get("RECLAB_WORKERS", "1")))


def tasks(cfg: ExperimentConfig) -> list[tuple[str, int]]:
    return [(check, k) for check in cfg.enabled() for k in range(cfg.trial_count(check))]


def run_sweep(cfg: ExperimentConfig, workers: int | None = None, progress=None) -> list[TrialRecord]:
    """Run every enabled check; records come back in check order, then trial order.

    Each trial derives its own seed from the base seed and its index, so the
    output does not depend on the number of workers.
    """
    todo = tasks(cfg)
    n_workers = _workers(workers)

    def job(task):
        recs = run_trial(cfg, *task)
        if progress is not None:
            progress(task, recs)
        return recs

    if n_workers == 1:
        chunks = [job(t) for t in todo]
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            chunks = list(pool.map(job, todo))
    return [r for chunk in chunks for r in chunk]
