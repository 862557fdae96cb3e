"""Randomized verification harness: configuration, checks, records and reports."""

from .checks import RUNNERS, run_trial
from .config import CHECK_NAMES, ConfigError, ExperimentConfig, load, loads
from .fixtures import FIXTURES, run_fixture
from .records import TrialRecord, emit_reports, read_jsonl, summarize, write_jsonl
from .sweep import run_sweep

__all__ = [
    "CHECK_NAMES", "ConfigError", "ExperimentConfig", "FIXTURES", "RUNNERS", "TrialRecord",
    "emit_reports", "load", "loads", "read_jsonl", "run_fixture", "run_sweep", "run_trial",
    "summarize", "write_jsonl",
]
