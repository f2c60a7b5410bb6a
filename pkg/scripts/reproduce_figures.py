"""Run the full scenario x objective x policy grid and write CSVs and SVG plots.

    python scripts/reproduce_figures.py --output results --seeds 0-9
"""

from __future__ import annotations

import argparse
import sys

from radarlz.cli import main


def parse_args(argv: list[str] | None = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--output", default="results", help="output directory")
    parser.add_argument("--seeds", default="0-9", help="seed list, e.g. 0-9 or 1,4,7")
    parser.add_argument("--tracks", type=int, default=20)
    parser.add_argument("--cpis-per-track", type=int, default=200)
    parser.add_argument("--workers", type=int, default=1)
    return parser.parse_args(argv)


if __name__ == "__main__":
    args = parse_args()
    sys.exit(main([
        "sweep", "-v", "--plots",
        "--scenarios", "stochastic_order3,adaptive_order2",
        "--objectives", "tracking,entropy",
        "--policies", "universal,ts,random",
        "--output", args.output,
        "--seeds", args.seeds,
        "--tracks", str(args.tracks),
        "--cpis-per-track", str(args.cpis_per_track),
        "--workers", str(args.workers),
    ]))
