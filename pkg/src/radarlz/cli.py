"""Command line: ``radarlz run | sweep | plot``."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from radarlz.config import SWEEP_KEYS, load_config, sweep_configs
from radarlz.harness import (
    ConfigError,
    ExperimentConfig,
    emit_plots,
    format_summary,
    read_summary,
    run_experiment,
)

log = logging.getLogger("radarlz")


def _seed_list(text: str) -> list[int]:
    """Parse ``0,1,2`` or ``0-9``."""
    seeds: list[int] = []
    try:
        for part in filter(None, (p.strip() for p in text.split(","))):
            lo, _, hi = part.partition("-")
            seeds.extend(range(int(lo), int(hi or lo) + 1))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad seed list {text!r}") from exc
    if not seeds:
        raise argparse.ArgumentTypeError("empty seed list")
    return seeds


def _base_config(args: argparse.Namespace) -> tuple[ExperimentConfig, dict]:
    if args.config:
        config, sweep = load_config(args.config)
    else:
        config, sweep = ExperimentConfig(), {}
    overrides = {}
    for name in ("scenario", "objective", "policy", "tracks", "cpis_per_track", "seeds", "workers"):
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    if args.output is not None:
        overrides["output_path"] = str(args.output)
    config = replace(config, **overrides)
    config.validate()
    return config, sweep


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="TOML experiment file")
    p.add_argument("--seeds", type=_seed_list, help="seed list, e.g. 0-9 or 1,4,7")
    p.add_argument("--output", type=Path, help="output directory")
    p.add_argument("--tracks", type=int)
    p.add_argument("--cpis-per-track", dest="cpis_per_track", type=int)
    p.add_argument("--workers", type=int, help="worker processes (one trial each)")
    p.add_argument("--plots", action="store_true", help="also write SVG plots")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="radarlz", description=__doc__)
    verbose = argparse.ArgumentParser(add_help=False)
    verbose.add_argument("-v", "--verbose", action="store_true", help="log progress")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", parents=[verbose], help="run one configuration")
    _add_common(run)
    run.add_argument("--scenario")
    run.add_argument("--objective")
    run.add_argument("--policy")

    sweep = sub.add_parser("sweep", parents=[verbose], help="scenario x objective x policy grid")
    _add_common(sweep)
    for key in SWEEP_KEYS:
        sweep.add_argument(f"--{key}", type=lambda s: s.split(","), help="comma-separated list")

    plot = sub.add_parser("plot", parents=[verbose], help="SVG plots from summary CSVs")
    plot.add_argument("summaries", type=Path, nargs="+")
    plot.add_argument("--output", type=Path, required=True)
    return parser


def _finish(summary: list[dict], config: ExperimentConfig, plots: bool) -> None:
    if config.output_path is None:
        sys.stdout.write(format_summary(summary))
    elif plots:
        for path in emit_plots(summary, config.output_path):
            log.info("wrote %s", path)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        if args.command == "plot":
            rows = []
            for path in args.summaries:
                rows.extend(read_summary(path))
            for path in emit_plots(rows, args.output):
                log.info("wrote %s", path)
            return 0
        config, sweep = _base_config(args)
        if args.command == "run":
            result = run_experiment(config)
            _finish(result.summary, config, args.plots)
            return 0
        for key in SWEEP_KEYS:
            if getattr(args, key) is not None:
                sweep[key] = getattr(args, key)
        summary: list[dict] = []
        for cfg in sweep_configs(config, sweep):
            cfg.validate()
            log.info("running %s / %s / %s", cfg.scenario, cfg.objective, cfg.policy)
            summary.extend(run_experiment(cfg).summary)
        _finish(summary, config, args.plots)
        return 0
    except (ConfigError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
