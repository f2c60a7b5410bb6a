"""Active Lempel-Ziv waveform selection over a context tree.

Time is split into phrases. Inside a phrase the decision context is every
observation and action since the phrase began. While that context is in the
tree the learner exploits (or explores with probability eps_k); the first time
it falls off the tree it acts uniformly at random, the phrase ends, and the
whole phrase is swept backwards to update counts, KT/CTW probabilities and
discounted cost-to-go values.

Next-observation estimates at a context weight the context's own KT estimate
against a coarse KT estimate conditioned only on the latest observation and
action (pooled over every step). Each model gets the posterior weight earned
by the probability it assigned to the data seen at that context.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from radarlz.context_tree import (
    ContextNode,
    ContextTree,
    Pair,
    PhraseState,
    SymbolAlphabet,
    kt_predictive,
)


class CostBoundError(ValueError):
    """A cost outside [-g_max, g_max] reached the learner."""


@dataclass
class LearnerConfig:
    discount: float = 0.95
    epsilon0: float = 1.0
    seed: int | None = 0
    max_depth: int = 16
    # value of a successor context not (yet) in the tree: "zero", "mean"
    # (discounted running mean cost) or "backoff" (depth-1 context, else mean)
    tail: str = "backoff"
    # weight each context's own estimate against the pooled one-step estimate
    coarse_mixing: bool = True

    def __post_init__(self) -> None:
        if not 0.0 < self.discount < 1.0:
            raise ValueError("discount must lie in (0, 1)")
        if not 0.0 <= self.epsilon0 <= 1.0:
            raise ValueError("epsilon0 must lie in [0, 1]")
        if self.tail not in ("zero", "mean", "backoff"):
            raise ValueError("tail must be 'zero', 'mean' or 'backoff'")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")

    def exploration_rate(self, k: int) -> float:
        """eps_k = min(1, eps_0 / sqrt(k)) for step k >= 1."""
        return min(1.0, self.epsilon0 / math.sqrt(max(k, 1)))


class UndefinedAverageError(ValueError):
    pass


class AverageCostTracker:
    def __init__(self) -> None:
        self.running_sum = 0.0
        self.steps = 0

    def add(self, cost: float) -> None:
        self.running_sum += cost
        self.steps += 1

    @property
    def average(self) -> float:
        if self.steps == 0:
            raise UndefinedAverageError("no costs recorded yet")
        return self.running_sum / self.steps


def average_cost(tracker: AverageCostTracker) -> float:
    return tracker.average


class _PooledRow:
    """Statistics for one (observation, action) pair pooled over all steps."""

    __slots__ = ("g", "g_n", "g_sum", "g_seen", "counts", "total", "cost_sum")

    def __init__(self, arity: int) -> None:
        self.g: list[float | None] = [None] * arity  # mean cost per next observation
        self.g_n = [0] * arity
        self.g_sum = 0.0  # sum of the seen entries of g
        self.g_seen = 0
        self.counts: dict[int, int] = {}
        self.total = 0
        self.cost_sum = 0.0

    def add(self, y_next: int, cost: float) -> None:
        n = self.g_n[y_next]
        old = self.g[y_next]
        if old is None:
            old = 0.0
            self.g_seen += 1
        new = old + (cost - old) / (n + 1)
        self.g[y_next] = new
        self.g_n[y_next] = n + 1
        self.g_sum += new - old
        self.counts[y_next] = self.counts.get(y_next, 0) + 1
        self.total += 1
        self.cost_sum += cost


class UniversalLearner:
    """Waveform selector implementing the phrase-based active-LZ loop.

    Parameters
    ----------
    alphabet : SymbolAlphabet
        Quantized observation arity and number of waveforms.
    config : LearnerConfig
    g_max : float
        Bound on incoming costs; anything outside raises ``CostBoundError``.

    Call ``select_waveform(y)`` and then ``observe_and_update(y, w, cost,
    y_next)`` once per step.
    """

    def __init__(self, alphabet: SymbolAlphabet, config: LearnerConfig | None = None,
                 g_max: float = math.inf) -> None:
        self.alphabet = alphabet
        self.config = config or LearnerConfig()
        self.g_max = g_max
        self.rng = random.Random(self.config.seed)
        self.tree = ContextTree(alphabet, max_depth=self.config.max_depth)
        self.costs = AverageCostTracker()
        # pooled statistics per (y, w), keyed by y * |W| + w
        self._rows: dict[int, _PooledRow] = {}
        self._arity = alphabet.observation_arity
        self._n_actions = alphabet.action_arity
        self._gamma = self.config.discount
        self._mean = 0.0
        self._missing: list[float] = []
        self._missing_sum = 0.0
        self._root_j: list[float | None] = []
        self._root_complete = False
        self._root_sum = 0.0
        self._stamp_steps = -1
        self._stamp_phrases = -1
        self.k = 0
        self.phrases = 0
        self._path: list[Pair] = []
        self._coarse_logp: list[float] = []
        self._node = self.tree.root
        self._terminate = False
        self._prev_action = 0
        self._expected_obs = -1
        self._phrase_start = 1

    # -- estimates -------------------------------------------------------

    def running_mean_cost(self) -> float:
        return self.costs.average if self.costs.steps else 0.0

    def g_hat(self, y: int, w: int, y_next: int) -> float:
        row = self._rows.get(y * self.alphabet.action_arity + w)
        g = None if row is None else row.g[y_next]
        return self.running_mean_cost() if g is None else g

    def coarse_predictive(self, y: int, w: int, y_next: int) -> float:
        """Pooled KT estimate of ``y_next`` after ``(y, w)``."""
        row = self._rows.get(y * self.alphabet.action_arity + w)
        if row is None:
            return 1.0 / self.alphabet.observation_arity
        return kt_predictive(row.counts.get(y_next, 0), row.total,
                             self.alphabet.observation_arity)

    def _record(self, y: int, w: int, y_next: int, cost: float) -> None:
        key = y * self.alphabet.action_arity + w
        row = self._rows.get(key)
        if row is None:
            row = self._rows[key] = _PooledRow(self.alphabet.observation_arity)
        row.add(y_next, cost)

    def tail_value(self) -> float:
        """Worth of a successor with no information at all."""
        if self.config.tail == "zero":
            return 0.0
        return self.running_mean_cost() / (1.0 - self.config.discount)

    def successor_values(self) -> list[float]:
        """Worth of a successor missing from the tree, per next observation."""
        self._refresh_step_cache()
        return self._missing

    def _refresh_step_cache(self) -> None:
        # quantities that change at most once per step or per phrase
        if self._stamp_steps == self.costs.steps and self._stamp_phrases == self.phrases:
            return
        if self._stamp_phrases != self.phrases and self.config.tail == "backoff":
            # depth-1 values only move when a phrase ends
            root = self.tree.root.children
            self._root_j = [
                None if (node := root.get((y_next, 0))) is None else node.cost_to_go
                for y_next in range(self.alphabet.observation_arity)
            ]
            self._root_complete = None not in self._root_j
            if self._root_complete:
                self._root_sum = sum(self._root_j)
        self._mean = self.running_mean_cost()
        if self.config.tail != "backoff":
            self._missing = [self.tail_value()] * self.alphabet.observation_arity
            self._missing_sum = sum(self._missing)
        elif self._root_complete:
            self._missing = self._root_j
            self._missing_sum = self._root_sum
        else:
            tail = self.tail_value()
            self._missing = [tail if j is None else j for j in self._root_j]
            self._missing_sum = sum(self._missing)
        self._stamp_steps = self.costs.steps
        self._stamp_phrases = self.phrases

    def action_values(self, node: ContextNode, y: int) -> list[float]:
        """Expected one-step cost plus discounted successor cost-to-go, per action.

        ``y`` is the latest observation, i.e. the end of ``node``'s context. A
        successor missing from the tree is worth ``successor_values()``.
        """
        if self._stamp_steps != self.costs.steps or self._stamp_phrases != self.phrases:
            self._refresh_step_cache()
        arity = self._arity
        n_actions = self._n_actions
        gamma = self._gamma
        mean = self._mean
        missing = self._missing
        children = node.children
        base = y * n_actions
        rows = self._rows

        # every (action, y') counted here was also pooled, so its cost
        # estimate exists; every child key also appears among the counts
        j_all = [self._missing_sum] * n_actions
        fine = [0.0] * n_actions
        for (a, y_next), n in node.next_obs_counts.items():
            child = children.get((y_next, a))
            if child is None:
                j = missing[y_next]
            else:
                j = child.cost_to_go
                j_all[a] += j - missing[y_next]
            fine[a] += n * (rows[base + a].g[y_next] + gamma * j)

        half = 0.5 * arity
        counts = node.action_counts
        weights = node.fine_weight if self.config.coarse_mixing else None
        values = []
        for a in range(n_actions):
            row = rows.get(base + a)
            if row is None:
                # nothing pooled, so nothing counted here either
                values.append(mean + gamma * j_all[a] / arity)
                continue
            # the add-one-half mass spread over every next observation
            prior = 0.5 * (row.g_sum + (arity - row.g_seen) * mean + gamma * j_all[a])
            v_fine = (fine[a] + prior) / (counts.get(a, 0) + half)
            if weights is None:
                values.append(v_fine)
                continue
            j_coarse = 0.0
            if children:
                for y_next, n in row.counts.items():
                    child = children.get((y_next, a))
                    j_coarse += n * (missing[y_next] if child is None else child.cost_to_go)
            else:
                for y_next, n in row.counts.items():
                    j_coarse += n * missing[y_next]
            v_coarse = (row.cost_sum + gamma * j_coarse + prior) / (row.total + half)
            beta = weights.get(a, 0.5)
            values.append(beta * v_fine + (1.0 - beta) * v_coarse)
        return values

    def greedy_action(self, node: ContextNode, y: int) -> int:
        """Lowest expected cost-to-go action at ``node``; ties go to the lowest index."""
        values = self.action_values(node, y)
        best = 0
        for a in range(1, len(values)):
            if values[a] < values[best]:
                best = a
        return best

    def backup(self, node: ContextNode, y: int) -> float:
        """Cost-to-go backup: min over actions of the expected cost-to-go."""
        node.cost_to_go = min(self.action_values(node, y))
        return node.cost_to_go

    # -- policy interface -------------------------------------------------

    @property
    def phrase(self) -> PhraseState:
        """Current phrase; steps are counted from 1."""
        return PhraseState(self.phrases, self._phrase_start, tuple(self._path))

    def context_key(self, y: int) -> Pair:
        return (y, self._prev_action) if self._path else (y, 0)

    def select_waveform(self, y: int) -> int:
        if not 0 <= y < self._arity:
            self.alphabet.check_observation(y)
        if self._path and y != self._expected_obs:
            raise ValueError(
                f"observation {y} differs from the {self._expected_obs} reported by the last update"
            )
        self.k += 1
        if not self._path:
            self._phrase_start = self.k
        key = self.context_key(y)
        node = self._node.children.get(key)
        self._path.append(key)
        n_actions = self.alphabet.action_arity
        if node is not None and node.visit_count > 0:
            self._node = node
            if self.rng.random() < self.config.exploration_rate(self.k):
                return self.rng.randrange(n_actions)
            return self.greedy_action(node, y)
        self._terminate = True
        return self.rng.randrange(n_actions)

    def observe_and_update(self, y: int, w: int, cost: float, y_next: int) -> None:
        if not -self.g_max <= cost <= self.g_max:
            raise CostBoundError(f"cost {cost} outside [-{self.g_max}, {self.g_max}]")
        if not (0 <= w < self._n_actions and 0 <= y_next < self._arity):
            self.alphabet.check_action(w)
            self.alphabet.check_observation(y_next)
        self.costs.add(cost)
        self._coarse_logp.append(math.log(self.coarse_predictive(y, w, y_next)))
        self._record(y, w, y_next, cost)
        self._prev_action = w
        self._expected_obs = y_next
        if self._terminate:
            self._end_phrase(w, y_next)

    def _end_phrase(self, w: int, y_next: int) -> None:
        nodes = self.tree.record_transition(self._path, w, y_next)
        # node d (d >= 1) recorded the move made at phrase step d - 1
        for depth in range(len(nodes) - 1, 0, -1):
            node = nodes[depth]
            a = self._path[depth][1] if depth < len(self._path) else w
            log_coarse = node.log_coarse.get(a, 0.0) + self._coarse_logp[depth - 1]
            node.log_coarse[a] = log_coarse
            # equal prior odds on the node's own model and the coarse one
            log_odds = log_coarse - node.log_kt[a]
            node.fine_weight[a] = 1.0 / (1.0 + math.exp(min(log_odds, 700.0)))
            self.backup(node, self._path[depth - 1][0])
        self.phrases += 1
        self._path = []
        self._coarse_logp = []
        self._node = self.tree.root
        self._terminate = False
