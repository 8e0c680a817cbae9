"""Command line front end: run simulations, inspect runs, verify replays."""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .core import MarketError
from .gateway import Transcript
from .harness import ReplayOk, RunConfig, TRANSPORTS, run_simulation, verify_replay
from .metrics import load_closes, load_jsonl, summarize
from .scenario import PRESET_NAMES, ScenarioSpec, preset_scenario


def _load_scenario(token: str) -> ScenarioSpec:
    path = Path(token)
    if path.suffix == ".json" and path.exists():
        return ScenarioSpec.load(path)
    return preset_scenario(token)


def _parse_range(text: str | None) -> tuple[int, int] | None:
    if text is None:
        return None
    first, sep, last = text.partition("..")
    if not sep:
        raise SystemExit(f"bad --range {text!r}: expected FIRST..LAST, e.g. 5..10")
    try:
        days = int(first), int(last)
    except ValueError:
        raise SystemExit(f"bad --range {text!r}: days must be integers") from None
    if not 1 <= days[0] <= days[1]:
        raise SystemExit(f"bad --range {text!r}: need 1 <= FIRST <= LAST")
    return days


def _fmt(value) -> str:
    if value is None:
        return "n/a"
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def _print_block(title: str, rows: dict) -> None:
    print(title)
    width = max(len(key) for key in rows)
    for key, value in rows.items():
        print(f"  {key:<{width}}  {_fmt(value)}")


def _cmd_simulate(args: argparse.Namespace) -> int:
    scenario = _load_scenario(args.scenario)
    if args.days is not None:
        scenario = dataclasses.replace(scenario, days=args.days)
    transcript = None
    if args.transport == "replay":
        if args.transcript is None:
            raise SystemExit("--transport replay needs --transcript FILE")
        transcript = Transcript.load(args.transcript)
    config = RunConfig(
        scenario=scenario,
        output_dir=Path(args.out),
        seed=args.seed,
        transport=args.transport,
    )
    log = run_simulation(config, transcript=transcript)
    summary = log.summary
    print(f"wrote {log.run_dir}")
    _print_block(
        f"run {summary['run_id']} ({summary['days']} days, {summary['transport']})",
        {
            "order_number": summary["order_number"],
            "order_execution_rate": summary["order_execution_rate"],
            "turnover_rate": summary["turnover_rate"],
            "volatility": summary["volatility"],
            "average_stock_return": summary["average_stock_return"],
        },
    )
    _print_block("agent returns", summary["agent_returns"])
    return 0


def _cmd_metrics(args: argparse.Namespace) -> int:
    run_dir = Path(args.run)
    orders = load_jsonl(run_dir / "orders.jsonl")
    trades = load_jsonl(run_dir / "trades.jsonl")
    closes = load_closes(run_dir / "closes.csv")
    companies = json.loads((run_dir / "companies.json").read_text("utf-8"))
    outstanding = {c["code"]: int(c["shares_outstanding"]) for c in companies}
    day_range = _parse_range(args.range)
    values = summarize(orders, trades, closes, outstanding, day_range)
    label = f"days {day_range[0]}..{day_range[1]}" if day_range else "whole run"
    _print_block(f"{run_dir.name} ({label})", values)
    return 0


def _cmd_replay_verify(args: argparse.Namespace) -> int:
    result = verify_replay(args.run)
    print(result)
    return 0 if isinstance(result, ReplayOk) else 1


def _cmd_export_scenario(args: argparse.Namespace) -> int:
    scenario = preset_scenario(args.preset)
    text = json.dumps(scenario.to_dict(), indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {args.out}")
    else:
        print(text, end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="asfm",
        description="Agent-based simulated stock market: run, measure, replay.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    simulate = sub.add_parser("simulate", help="run a scenario and write artifacts")
    simulate.add_argument(
        "--scenario",
        default="baseline",
        help=f"preset name ({', '.join(PRESET_NAMES)}, parameterised forms like "
        "inflation(8) allowed) or a scenario JSON file",
    )
    simulate.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    simulate.add_argument("--days", type=int, default=None, help="override the scenario length")
    simulate.add_argument("--transport", choices=TRANSPORTS, default="mock")
    simulate.add_argument("--transcript", default=None, help="recorded transcript for --transport replay")
    simulate.add_argument("--out", required=True, help="run directory to create")
    simulate.set_defaults(func=_cmd_simulate)

    metrics = sub.add_parser("metrics", help="recompute headline metrics from a run directory")
    metrics.add_argument("--run", required=True, help="run directory")
    metrics.add_argument("--range", default=None, help="inclusive day range FIRST..LAST")
    metrics.set_defaults(func=_cmd_metrics)

    verify = sub.add_parser("replay-verify", help="re-execute a recorded run and compare digests")
    verify.add_argument("--run", required=True, help="run directory")
    verify.set_defaults(func=_cmd_replay_verify)

    export = sub.add_parser("export-scenario", help="print a preset scenario as JSON")
    export.add_argument("preset", help="preset name, e.g. baseline or inflation(8)")
    export.add_argument("--out", default=None, help="write to a file instead of stdout")
    export.set_defaults(func=_cmd_export_scenario)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (MarketError, OSError, ValueError) as exc:
        print(f"asfm: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
