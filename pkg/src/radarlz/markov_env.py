"""Small finite environments with exactly computable optimal average cost.

Two kinds are provided:

* ``FiniteMDP``: an order-1 MDP in which the observation is the state;
* ``BandHopper``: an emitter that jumps onto a band the agent has used twice
  in a row and otherwise stays put. It is deterministic and needs the last two
  actions to predict, so any policy of the current observation alone is
  beaten by one that also remembers the previous action.

``FiniteMDP.step(action, u)`` takes a uniform draw so that callers can
pre-generate randomness; ``BandHopper.step(action)`` is deterministic. Both
return ``(cost, observation)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np


def stationary_distribution(transition: np.ndarray) -> np.ndarray:
    """Stationary distribution of an irreducible row-stochastic matrix."""
    n = transition.shape[0]
    # solve pi (T - I) = 0 with sum(pi) = 1 as a least-squares system
    a = np.vstack([transition.T - np.eye(n), np.ones((1, n))])
    b = np.zeros(n + 1)
    b[-1] = 1.0
    pi, *_ = np.linalg.lstsq(a, b, rcond=None)
    return pi


@dataclass
class FiniteMDP:
    """Order-1 MDP: ``transitions[s, a, s']`` and ``costs[s, a]``."""

    transitions: np.ndarray
    costs: np.ndarray
    state: int = 0

    def __post_init__(self) -> None:
        self.transitions = np.asarray(self.transitions, dtype=float)
        self.costs = np.asarray(self.costs, dtype=float)
        n_s, n_a, n_s2 = self.transitions.shape
        if n_s != n_s2 or self.costs.shape != (n_s, n_a):
            raise ValueError("transition and cost shapes disagree")
        if not np.allclose(self.transitions.sum(axis=2), 1.0, atol=1e-9):
            raise ValueError("transition rows must sum to 1")
        self._cdf = np.cumsum(self.transitions, axis=2).tolist()
        self._cost = self.costs.tolist()

    @property
    def n_states(self) -> int:
        return self.transitions.shape[0]

    @property
    def n_actions(self) -> int:
        return self.transitions.shape[1]

    def reset(self, state: int = 0) -> int:
        self.state = state
        return state

    def step(self, action: int, u: float) -> tuple[float, int]:
        """Advance with uniform draw ``u`` in [0, 1); returns (cost, next state)."""
        s = self.state
        cdf = self._cdf[s][action]
        nxt = 0
        while nxt < len(cdf) - 1 and u >= cdf[nxt]:
            nxt += 1
        self.state = nxt
        return self._cost[s][action], nxt

    def policy_average_cost(self, policy: tuple[int, ...]) -> float:
        chain = np.array([self.transitions[s, policy[s]] for s in range(self.n_states)])
        pi = stationary_distribution(chain)
        return float(sum(pi[s] * self.costs[s, policy[s]] for s in range(self.n_states)))

    def random_policy_average_cost(self) -> float:
        chain = self.transitions.mean(axis=1)
        pi = stationary_distribution(chain)
        return float(pi @ self.costs.mean(axis=1))

    def optimal_average_cost(self) -> tuple[float, tuple[int, ...]]:
        """Best deterministic stationary policy by exhaustive enumeration."""
        best: tuple[float, tuple[int, ...]] | None = None
        for policy in itertools.product(range(self.n_actions), repeat=self.n_states):
            lam = self.policy_average_cost(policy)
            if best is None or lam < best[0] - 1e-15:
                best = (lam, policy)
        assert best is not None
        return best


@dataclass
class BandHopper:
    """Deterministic emitter reacting to the agent's last two bands.

    The observation is the emitter's band during the previous step. Each step
    the emitter first moves (to the agent's band if the agent used it twice in
    a row, otherwise it stays), then the agent's chosen band is scored:
    ``base_cost`` plus ``collision_cost`` if it matches the emitter.
    """

    bands: int = 3
    base_cost: float = 0.5
    collision_cost: float = 1.0
    emitter: int = 0
    history: list[int] = field(default_factory=lambda: [0, 1])

    def reset(self, rng: np.random.Generator) -> int:
        self.emitter = int(rng.integers(self.bands))
        self.history = [int(b) for b in rng.integers(self.bands, size=2)]
        return self.emitter

    @staticmethod
    def respond(emitter: int, older: int, newer: int) -> int:
        return newer if older == newer else emitter

    def step(self, action: int) -> tuple[float, int]:
        self.emitter = self.respond(self.emitter, self.history[0], self.history[1])
        cost = self.base_cost + (self.collision_cost if action == self.emitter else 0.0)
        self.history = [self.history[1], action]
        return cost, self.emitter

    # exact evaluation over the lifted state (emitter, older band, newer band)

    def _lifted_states(self) -> list[tuple[int, int, int]]:
        return list(itertools.product(range(self.bands), repeat=3))

    def memoryless_average_cost(self, policy: tuple[int, ...]) -> float:
        """Long-run average cost of ``policy[observed band]`` from a uniform start.

        The lifted chain is deterministic, so each start state runs into a
        cycle; the result averages the cycle costs over start states.
        """
        total = 0.0
        states = self._lifted_states()
        for start in states:
            seen: dict[tuple[int, int, int], int] = {}
            costs: list[float] = []
            s = start
            while s not in seen:
                seen[s] = len(costs)
                emitter, older, newer = s
                a = policy[emitter]
                e2 = self.respond(emitter, older, newer)
                costs.append(self.base_cost + (self.collision_cost if a == e2 else 0.0))
                s = (e2, newer, a)
            cycle = costs[seen[s]:]
            total += sum(cycle) / len(cycle)
        return total / len(states)

    def best_memoryless_policy(self) -> tuple[float, tuple[int, ...]]:
        """Best policy of the current observation alone, by enumeration."""
        best: tuple[float, tuple[int, ...]] | None = None
        for policy in itertools.product(range(self.bands), repeat=self.bands):
            lam = self.memoryless_average_cost(policy)
            if best is None or lam < best[0] - 1e-15:
                best = (lam, policy)
        assert best is not None
        return best

    def optimal_average_cost(self, iterations: int = 2000) -> float:
        """Optimal average cost over history-dependent policies.

        Relative value iteration on the lifted (emitter, older, newer) state,
        which is a sufficient statistic for the future.
        """
        states = self._lifted_states()
        index = {s: i for i, s in enumerate(states)}
        h = np.zeros(len(states))
        gain = 0.0
        for _ in range(iterations):
            new = np.empty_like(h)
            for i, (emitter, older, newer) in enumerate(states):
                e2 = self.respond(emitter, older, newer)
                new[i] = min(
                    self.base_cost + (self.collision_cost if a == e2 else 0.0)
                    + h[index[(e2, newer, a)]]
                    for a in range(self.bands)
                )
            gain = float(new[0] - h[0])
            h = new - new[0]
        return gain
