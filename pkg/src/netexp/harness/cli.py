"""Command line entry point: ``netexp run|truth|report|validate``."""

from __future__ import annotations

import argparse
import logging
import sys

from .config import ConfigError, load_config
from .runner import report, run_experiment, run_truth


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="netexp", description="Network experiment simulations.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run every configured cell and write results")
    truth = sub.add_parser("truth", help="run only the global treatment and control runs")
    for s in (run, truth):
        s.add_argument("config", help="YAML experiment configuration")
        s.add_argument("--workers", type=int, default=None,
                       help="worker processes (default: $NETEXP_MAX_WORKERS or 1)")
        s.add_argument("--output", default=None, help="results directory (overrides config)")

    rep = sub.add_parser("report", help="recompute summary and plot data from saved results")
    rep.add_argument("results_dir")

    val = sub.add_parser("validate", help="check a configuration without running it")
    val.add_argument("config")
    return p


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "validate":
            cfg = load_config(args.config)
            n_cells = len(cfg.graph.param_values) * len(cfg.response.cells())
            print(f"ok: {n_cells} configuration cells, {len(cfg.designs)} designs, "
                  f"{len(cfg.estimators)} estimators, {cfg.replications} replications")
        elif args.command == "run":
            cfg = load_config(args.config)
            _, summary = run_experiment(cfg, workers=args.workers, output_dir=args.output)
            print(f"wrote {len(summary)} summary rows to {args.output or cfg.output_dir}")
        elif args.command == "truth":
            cfg = load_config(args.config)
            truth = run_truth(cfg, workers=args.workers, output_dir=args.output)
            print(f"wrote {len(truth)} truth rows to {args.output or cfg.output_dir}")
        else:
            summary, _ = report(args.results_dir)
            print(f"wrote {len(summary)} summary rows to {args.results_dir}")
    except (ConfigError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
