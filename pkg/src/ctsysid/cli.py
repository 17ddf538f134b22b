"""Command line interface: experiment runner and summarizer."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .experiments import ConfigError, format_summary, load_config, run_experiment, summarize


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ctsysid",
        description="Single-trajectory identification experiments for continuous-time "
        "linear systems, with finite-time bound validation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment from a config file")
    run.add_argument("--config", required=True, help="key = value config file")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--seed-base", type=int, default=None, help="override seed_base")
    run.add_argument("--experiment", default=None, help="override the experiment name")
    run.add_argument(
        "--kappa-override",
        type=float,
        default=None,
        help="use this input gain for every system instead of the kappa map",
    )

    summ = sub.add_parser("summarize", help="summarize a results directory")
    summ.add_argument("--in", dest="in_dir", required=True, help="directory with results.csv")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            config = load_config(args.config)
            if args.experiment is not None:
                config = replace(config, experiment=args.experiment)
            if args.seed_base is not None:
                config = replace(config, seed_base=args.seed_base)
            out_dir = args.out or config.out
            run_experiment(config, out_dir, kappa_override=args.kappa_override)
            print(f"wrote {Path(out_dir) / 'results.csv'}")
        else:
            summary = summarize(args.in_dir)
            text = format_summary(summary)
            (Path(args.in_dir) / "summary.txt").write_text(text)
            print(text, end="")
    except (ConfigError, OSError, ValueError) as exc:
        print(f"ctsysid: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
