"""Universal learner against the band-hopping emitter.

The emitter moves to the radar's band once that band has been used twice in a
row, so the best memoryless policy pays more than a policy that remembers the
previous action. The script prints both reference costs and the learner's
running average for each seed.
"""

from __future__ import annotations

import argparse

import numpy as np

from radarlz.active_lz import LearnerConfig, UniversalLearner
from radarlz.context_tree import SymbolAlphabet
from radarlz.markov_env import BandHopper


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--bands", type=int, default=3)
    parser.add_argument("--seeds", type=int, default=10)
    parser.add_argument("--steps", type=int, default=50_000)
    args = parser.parse_args()

    reference = BandHopper(args.bands)
    lam1, _ = reference.best_memoryless_policy()
    print(f"best memoryless cost {lam1:.4f}, optimal cost {reference.optimal_average_cost():.4f}")
    for seed in range(args.seeds):
        env = BandHopper(args.bands)
        y = env.reset(np.random.default_rng(seed))
        learner = UniversalLearner(SymbolAlphabet(args.bands, args.bands), LearnerConfig(seed=seed))
        for _ in range(args.steps):
            w = learner.select_waveform(y)
            cost, y_next = env.step(w)
            learner.observe_and_update(y, w, cost, y_next)
            y = y_next
        avg = learner.costs.average
        print(f"seed {seed}: running average {avg:.4f} ({'below' if avg < lam1 else 'not below'} memoryless)")


if __name__ == "__main__":
    main()
