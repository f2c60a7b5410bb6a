"""Running average cost of the universal learner on a two-state MDP.

Prints the optimal average cost, found by enumerating stationary policies,
and the learner's running average at checkpoints for each seed.
"""

from __future__ import annotations

import argparse

import numpy as np

from radarlz.active_lz import LearnerConfig, UniversalLearner
from radarlz.context_tree import SymbolAlphabet
from radarlz.markov_env import FiniteMDP

TRANSITIONS = [[[0.9, 0.1], [0.2, 0.8]], [[0.7, 0.3], [0.1, 0.9]]]
COSTS = [[1.0, 0.6], [0.8, 1.2]]


def running_averages(env: FiniteMDP, seed: int, steps: int, checkpoints: list[int]) -> list[float]:
    draws = np.random.default_rng(seed).random(steps).tolist()
    learner = UniversalLearner(SymbolAlphabet(2, 2), LearnerConfig(seed=seed))
    s, out = env.reset(0), []
    for k, u in enumerate(draws, start=1):
        a = learner.select_waveform(s)
        cost, s_next = env.step(a, u)
        learner.observe_and_update(s, a, cost, s_next)
        s = s_next
        if k in checkpoints:
            out.append(learner.costs.average)
    return out


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seeds", type=int, default=10)
    parser.add_argument("--steps", type=int, default=200_000)
    args = parser.parse_args()

    env = FiniteMDP(TRANSITIONS, COSTS)
    lam, policy = env.optimal_average_cost()
    print(f"optimal average cost {lam:.4f} with policy {policy}")
    print(f"uniform random policy {env.random_policy_average_cost():.4f}")
    checkpoints = [c for c in (1_000, 10_000, 50_000, 100_000, 200_000) if c <= args.steps]
    print("seed," + ",".join(f"k={c}" for c in checkpoints) + ",final_gap")
    for seed in range(args.seeds):
        avgs = running_averages(env, seed, args.steps, checkpoints)
        print(f"{seed}," + ",".join(f"{v:.4f}" for v in avgs) + f",{avgs[-1] / lam - 1:.2%}")


if __name__ == "__main__":
    main()
