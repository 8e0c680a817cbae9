"""Command-line front end: asfm-plot run / compare."""

import argparse
import sys
from pathlib import Path

from .figures import compare_runs, plot_run
from .frames import MissingArtifact, SchemaMismatch


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="asfm-plot",
        description="Render figures and summary tables from simulation run directories.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="render one run's figures and summary table")
    run.add_argument("run_dir", help="simulation run directory")
    run.add_argument(
        "--out",
        help="output directory (default: <run dir name>-plots in the current directory)",
    )

    compare = sub.add_parser("compare", help="overlay agent returns across runs")
    compare.add_argument("run_dirs", nargs="+", help="two or more run directories")
    compare.add_argument("--labels", nargs="+", help="one label per run")
    compare.add_argument(
        "--out", default="compare-plots", help="output directory (default: compare-plots)"
    )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            out = args.out or f"{Path(args.run_dir).resolve().name}-plots"
            written = plot_run(args.run_dir, out)
        else:
            written = compare_runs(args.run_dirs, labels=args.labels, out_dir=args.out)
    except (MissingArtifact, SchemaMismatch, ValueError, OSError) as exc:
        print(f"asfm-plot: {exc}", file=sys.stderr)
        return 2
    for path in written:
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
