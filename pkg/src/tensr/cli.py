"""Command-line front end: single runs, grid campaigns, config checks.

Exit status is 0 on success and 2 for anything wrong with the
configuration (unknown keys, bad types, out-of-range values, missing
files)."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import yaml

from . import __version__
from .harness import PROTOCOLS, metrics_to_dict, run_campaign, run_scenario
from .scenario import Scenario, ScenarioError, check_scenario, load_scenario


def _load(config_path: str | None) -> Scenario:
    scenario = load_scenario(config_path) if config_path else Scenario()
    return check_scenario(scenario)


def _cmd_run(args: argparse.Namespace) -> int:
    scenario = _load(args.config)
    metrics = run_scenario(scenario, args.protocol, seed=args.seed)
    text = yaml.safe_dump(metrics_to_dict(metrics), sort_keys=False)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_campaign(args: argparse.Namespace) -> int:
    scenario = _load(args.config)
    result = run_campaign(scenario, trials=args.trials, jobs=args.jobs)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "campaign.csv").write_text(result.to_csv())
    (out_dir / "summary.txt").write_text(result.summary_text())
    sys.stdout.write(result.summary_text())
    return 0


def _cmd_validate(args: argparse.Namespace) -> int:
    _load(args.config)
    print("ok")
    return 0


def _cmd_version(_args: argparse.Namespace) -> int:
    print(__version__)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tensr",
        description="Deterministic MANET routing simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="simulate one scenario")
    p.add_argument("--config", help="scenario YAML (defaults apply "
                                    "when omitted)")
    p.add_argument("--protocol", choices=PROTOCOLS, default="tensr")
    p.add_argument("--seed", type=int, default=None,
                   help="override the scenario's master seed")
    p.add_argument("--out", help="write metrics YAML here instead of "
                                 "stdout")
    p.set_defaults(fn=_cmd_run)

    p = sub.add_parser("campaign", help="run the velocity/grouping grid")
    p.add_argument("--config")
    p.add_argument("--trials", type=int, default=None,
                   help="override the scenario's trial count")
    p.add_argument("--out-dir", default="campaign",
                   help="directory for campaign.csv and summary.txt")
    p.add_argument("--jobs", type=int, default=1,
                   help="parallel worker processes")
    p.set_defaults(fn=_cmd_campaign)

    p = sub.add_parser("validate", help="check a config and exit")
    p.add_argument("--config")
    p.set_defaults(fn=_cmd_validate)

    p = sub.add_parser("version", help="print the package version")
    p.set_defaults(fn=_cmd_version)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ScenarioError as exc:
        print(exc, file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
