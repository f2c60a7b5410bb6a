"""Baseline waveform selectors sharing the learner's policy interface.

Every policy offers ``select_waveform(y) -> w`` and
``observe_and_update(y, w, cost, y_next)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def random_policy(rng: np.random.Generator, n_actions: int) -> int:
    return int(rng.integers(n_actions))


class RandomPolicy:
    """Uniform choice over the catalog, ignoring all feedback."""

    def __init__(self, n_actions: int, seed: int | None = 0) -> None:
        if n_actions < 1:
            raise ValueError("n_actions must be >= 1")
        self.n_actions = n_actions
        self.rng = np.random.default_rng(seed)

    def select_waveform(self, y: int) -> int:
        return random_policy(self.rng, self.n_actions)

    def observe_and_update(self, y: int, w: int, cost: float, y_next: int) -> None:
        pass


@dataclass
class TSArmPosterior:
    """Normal posterior on one arm's mean cost under a known observation variance."""

    mean: float = 0.0
    variance: float = 1.0
    count: int = 0

    def update(self, value: float, obs_variance: float) -> None:
        precision = 1.0 / self.variance + 1.0 / obs_variance
        self.mean = (self.mean / self.variance + value / obs_variance) / precision
        self.variance = 1.0 / precision
        self.count += 1


@dataclass
class TSPosteriors:
    n_actions: int
    prior_mean: float = 0.0
    prior_variance: float = 1.0
    obs_variance: float = 1.0
    arms: dict[tuple[int, int], TSArmPosterior] = field(default_factory=dict)

    def arm(self, context: int, action: int) -> TSArmPosterior:
        key = (context, action)
        post = self.arms.get(key)
        if post is None:
            post = self.arms[key] = TSArmPosterior(self.prior_mean, self.prior_variance)
        return post


def ts_select(posteriors: TSPosteriors, context: int, rng: np.random.Generator) -> int:
    """Draw a mean cost per arm for this context and return the lowest draw."""
    means = np.empty(posteriors.n_actions)
    sds = np.empty(posteriors.n_actions)
    for a in range(posteriors.n_actions):
        post = posteriors.arm(context, a)
        means[a], sds[a] = post.mean, np.sqrt(post.variance)
    draws = means + sds * rng.standard_normal(posteriors.n_actions)
    return int(np.argmin(draws))


def ts_update(posteriors: TSPosteriors, context: int, action: int, cost: float) -> TSPosteriors:
    posteriors.arm(context, action).update(cost, posteriors.obs_variance)
    return posteriors


class ThompsonPolicy:
    """Gaussian Thompson sampling with the current observation as context.

    Costs are divided by ``g_max`` before entering the posterior.
    """

    def __init__(self, n_actions: int, g_max: float, seed: int | None = 0,
                 prior_variance: float = 1.0, obs_variance: float = 1.0) -> None:
        self.g_max = g_max
        self.posteriors = TSPosteriors(n_actions, 0.0, prior_variance, obs_variance)
        self.rng = np.random.default_rng(seed)

    def select_waveform(self, y: int) -> int:
        return ts_select(self.posteriors, y, self.rng)

    def observe_and_update(self, y: int, w: int, cost: float, y_next: int) -> None:
        if not -self.g_max <= cost <= self.g_max:
            raise ValueError(f"cost {cost} outside [-{self.g_max}, {self.g_max}]")
        ts_update(self.posteriors, y, w, cost / self.g_max)
