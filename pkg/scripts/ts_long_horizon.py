"""Collision rate per track against the adaptive emitter for each policy.

Runs more tracks than the default experiment to show how the collision rate of
each policy evolves when the emitter chases bands the radar reuses.
"""

from __future__ import annotations

import argparse

import numpy as np

from radarlz.harness import ExperimentConfig, run_trials


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--objective", default="tracking", choices=["tracking", "entropy"])
    parser.add_argument("--tracks", type=int, default=100)
    parser.add_argument("--cpis-per-track", type=int, default=200)
    parser.add_argument("--seeds", type=int, default=3)
    parser.add_argument("--every", type=int, default=10, help="print every n-th track")
    args = parser.parse_args()

    rates = {}
    for policy in ("universal", "ts", "random"):
        cfg = ExperimentConfig(scenario="adaptive_order2", objective=args.objective, policy=policy,
                               tracks=args.tracks, cpis_per_track=args.cpis_per_track,
                               seeds=list(range(args.seeds)))
        per_track = np.zeros(args.tracks)
        for rec in run_trials(cfg):
            per_track[rec.track] += rec.collision
        rates[policy] = per_track / (args.seeds * args.cpis_per_track)
    print("track," + ",".join(rates))
    for t in range(0, args.tracks, args.every):
        print(f"{t}," + ",".join(f"{rates[p][t]:.3f}" for p in rates))
    print(f"{args.tracks - 1}," + ",".join(f"{rates[p][-1]:.3f}" for p in rates))


if __name__ == "__main__":
    main()
