"""Named fixtures runnable from the command line."""

from __future__ import annotations

from dataclasses import replace

from .checks import DAVIES_GRID, _Ctx, condexp_records, davies_records
from .config import CHECK_NAMES, ExperimentConfig
from .records import TrialRecord
from .sweep import run_sweep

FIXTURES = ("conditional-expectation", "davies", "identity")


def run_fixture(name: str, cfg: ExperimentConfig | None = None) -> list[TrialRecord]:
    """Records for one fixture.

    ``conditional-expectation`` and ``davies`` run the exact-recovery
    examples; ``identity`` runs every check once with ``T = id`` and
    ``rho = sigma``, where all slacks vanish.
    """
    cfg = cfg or ExperimentConfig()
    if name == "conditional-expectation":
        return [r for k in range(3) for r in condexp_records(_Ctx(cfg, k))]
    if name == "davies":
        return [r for k in range(len(DAVIES_GRID)) for r in davies_records(_Ctx(cfg, k))]
    if name == "identity":
        fixed = replace(cfg, trials=1, fixture="identity", checks={c: True for c in CHECK_NAMES})
        return run_sweep(fixed)
    raise ValueError(f"unknown fixture {name!r}; choose from {', '.join(FIXTURES)}")
