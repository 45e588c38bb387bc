"""Command line entry point: run one experiment from an INI config."""

from __future__ import annotations

import argparse
import sys

from .harness import EXPERIMENTS, parse_config, run_sweep


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="binplanar",
        description="Monte Carlo sweeps for binomial-code planar lattices.")
    ap.add_argument("--config", required=True, help="INI config file")
    ap.add_argument("--experiment", choices=EXPERIMENTS,
                    help="override the experiment named in the config")
    ap.add_argument("--seed", type=int, help="override the master seed")
    ap.add_argument("--workers", type=int, default=None,
                    help="worker processes (results are worker-independent)")
    ap.add_argument("--out", help="override the output directory")
    args = ap.parse_args(argv)

    cfg = parse_config(args.config)
    if args.experiment:
        cfg.experiment = args.experiment
    if args.seed is not None:
        cfg.seed = args.seed
    if args.workers is not None:
        cfg.workers = args.workers
    if args.out:
        cfg.out = args.out
    return run_sweep(cfg)


if __name__ == "__main__":
    sys.exit(main())
