"""Command-line entry point: ``reclab check``, ``reclab sweep``, ``reclab fixture``."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .harness.config import CHECK_NAMES, ConfigError, ExperimentConfig, load
from .harness.fixtures import FIXTURES, run_fixture
from .harness.records import emit_reports, format_summary, summarize
from .harness.sweep import run_sweep


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, help="base seed (64-bit unsigned)")
    p.add_argument("--trials", type=int, help="trials per check, capped per check")
    p.add_argument("--out", default="reclab-out", help="output directory (default: reclab-out)")
    p.add_argument("--quad-panels", type=int, help="quadrature panels")
    p.add_argument("--quad-nodes", type=int, help="Gauss-Legendre nodes per panel")
    p.add_argument("--tol-slack", type=float, help="slack tolerance for the inequality checks")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="reclab", description="Randomized checks of recovery bounds.")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("check", help="run one check or all of them")
    p.add_argument("name", choices=[*CHECK_NAMES, "all"])
    _common(p)
    p = sub.add_parser("sweep", help="run the checks enabled in a JSON config")
    p.add_argument("--config", required=True, help="path to the JSON config")
    _common(p)
    p = sub.add_parser("fixture", help="run a named fixture")
    p.add_argument("name", choices=FIXTURES)
    _common(p)
    return parser


def _apply_overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.trials is not None:
        changes["trials"] = args.trials
    quad = cfg.quadrature
    if args.quad_panels is not None:
        quad = replace(quad, panels=args.quad_panels)
    if args.quad_nodes is not None:
        quad = replace(quad, nodes_per_panel=args.quad_nodes)
    changes["quadrature"] = quad
    if args.tol_slack is not None:
        changes["tolerances"] = {**cfg.tolerances, "slack_tol": args.tol_slack}
    return replace(cfg, **changes)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load(args.config) if args.command == "sweep" else ExperimentConfig()
        cfg = _apply_overrides(cfg, args)
    except (ConfigError, ValueError) as exc:
        print(f"reclab: configuration error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"reclab: {exc}", file=sys.stderr)
        return 2
    if args.command == "check":
        names = CHECK_NAMES if args.name == "all" else [args.name]
        records = run_sweep(cfg.with_checks(names))
    elif args.command == "sweep":
        records = run_sweep(cfg)
    else:
        records = run_fixture(args.name, cfg)
    try:
        code = emit_reports(records, args.out)
    except OSError as exc:
        print(f"reclab: {exc}", file=sys.stderr)
        return 2
    sys.stdout.write(format_summary(summarize(records)))
    return code


if __name__ == "__main__":
    sys.exit(main())
