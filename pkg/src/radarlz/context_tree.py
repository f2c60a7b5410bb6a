"""Variable-order context tree with KT estimation and context-tree weighting.

A node stands for a context ending in an observation. Leaving a node means
choosing an action and then seeing the next observation, so per-node
statistics are indexed by ``(action, next_obs)`` while children are keyed by
the ``(observation, action)`` pair that extends the context.

The same tree supports two uses:

* phrase parsing (Lempel-Ziv style), where a path runs forward in time from
  the start of a phrase and at most one node is created per phrase;
* classic suffix-context CTW, where the path is the recent history read
  backwards and every node down to the depth bound is created.

All probabilities are kept as natural logs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

LOG_HALF = math.log(0.5)

Pair = tuple[int, int]


class AlphabetError(ValueError):
    """Raised when a symbol falls outside its alphabet."""


@dataclass(frozen=True)
class SymbolAlphabet:
    observation_arity: int
    action_arity: int = 1

    def __post_init__(self) -> None:
        if self.observation_arity < 1 or self.action_arity < 1:
            raise AlphabetError("alphabet arities must be >= 1")

    def check_observation(self, y: int) -> None:
        if not 0 <= y < self.observation_arity:
            raise AlphabetError(f"observation {y} outside [0, {self.observation_arity})")

    def check_action(self, a: int) -> None:
        if not 0 <= a < self.action_arity:
            raise AlphabetError(f"action {a} outside [0, {self.action_arity})")


def log_add(a: float, b: float) -> float:
    """log(exp(a) + exp(b)) without overflow."""
    if a < b:
        a, b = b, a
    if b == -math.inf:
        return a
    return a + math.log1p(math.exp(b - a))


def kt_predictive(count: float, total: float, arity: int) -> float:
    """Add-one-half estimate of a symbol seen ``count`` times out of ``total``."""
    return (count + 0.5) / (total + 0.5 * arity)


def kt_block_log_probability(counts: Iterable[int], arity: int) -> float:
    """Closed-form log KT probability of any sequence with these symbol counts."""
    counts = list(counts)
    n = sum(counts)
    out = math.lgamma(0.5 * arity) - arity * math.lgamma(0.5) - math.lgamma(n + 0.5 * arity)
    out += sum(math.lgamma(c + 0.5) for c in counts)
    out += (arity - len(counts)) * math.lgamma(0.5)
    return out


def sequential_kt_log_probability(sequence: Sequence[int], arity: int) -> float:
    """Log of the product of sequential KT predictives over ``sequence``."""
    if len(sequence) == 0:
        raise ValueError("sequence must be nonempty")
    counts = [0] * arity
    logp = 0.0
    for n, s in enumerate(sequence):
        if not 0 <= s < arity:
            raise AlphabetError(f"symbol {s} outside [0, {arity})")
        logp += math.log(kt_predictive(counts[s], n, arity))
        counts[s] += 1
    return logp


def sequential_kt_probability(sequence: Sequence[int], arity: int) -> float:
    return math.exp(sequential_kt_log_probability(sequence, arity))


@dataclass(frozen=True)
class PhraseState:
    """Where the parser is: phrase number, its start step and the path so far."""

    phrase_index: int
    phrase_start: int
    current_path: tuple[Pair, ...]


class ContextNode:
    """One context. Counts and log-probabilities are kept per action."""

    __slots__ = (
        "depth",
        "visit_count",
        "next_obs_counts",
        "action_counts",
        "log_kt",
        "log_weighted",
        "log_coarse",
        "fine_weight",
        "cost_to_go",
        "children",
    )

    def __init__(self, depth: int = 0) -> None:
        self.depth = depth
        self.visit_count = 0
        self.next_obs_counts: dict[Pair, int] = {}
        self.action_counts: dict[int, int] = {}
        self.log_kt: dict[int, float] = {}
        self.log_weighted: dict[int, float] = {}
        # log-probability a coarser model gave this node's data, per action
        self.log_coarse: dict[int, float] = {}
        # posterior weight of this node's own estimate against the coarser one
        self.fine_weight: dict[int, float] = {}
        self.cost_to_go = 0.0
        self.children: dict[Pair, ContextNode] = {}

    def is_leaf(self) -> bool:
        return not self.children

    def count(self, action: int, next_obs: int) -> int:
        return self.next_obs_counts.get((action, next_obs), 0)

    def predictive(self, action: int, arity: int) -> list[float]:
        total = self.action_counts.get(action, 0)
        return [kt_predictive(self.count(action, y), total, arity) for y in range(arity)]


def kt_estimate(node: ContextNode, action: int, next_obs: int, alphabet: SymbolAlphabet) -> float:
    alphabet.check_action(action)
    alphabet.check_observation(next_obs)
    return kt_predictive(
        node.count(action, next_obs),
        node.action_counts.get(action, 0),
        alphabet.observation_arity,
    )


def ctw_log_weighted(node: ContextNode, action: int, depth_bound: int) -> float:
    """Log weighted probability of ``node`` for one action.

    Leaves and nodes at the depth bound use their own KT estimate; otherwise
    the estimate is mixed half-and-half with the product of the children.
    """
    log_pe = node.log_kt.get(action, 0.0)
    if node.depth >= depth_bound or node.is_leaf():
        return log_pe
    log_children = sum(c.log_weighted.get(action, 0.0) for c in node.children.values())
    return LOG_HALF + log_add(log_pe, log_children)


def ctw_weighted_prob(node: ContextNode, action: int, depth_bound: int) -> float:
    return math.exp(ctw_log_weighted(node, action, depth_bound))


class ContextTree:
    """Context tree over interleaved observation/action symbols.

    ``depth`` is the current bound D (deepest node so far); it grows with
    insertions up to ``max_depth``. Attempts to go deeper are counted in
    ``truncations`` and otherwise ignored.
    """

    def __init__(self, alphabet: SymbolAlphabet, max_depth: int = 16) -> None:
        if max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        self.alphabet = alphabet
        self.max_depth = max_depth
        self.root = ContextNode(0)
        self.depth = 0
        self.node_count = 1
        self.truncations = 0

    def child(self, node: ContextNode, key: Pair) -> ContextNode | None:
        return node.children.get(key)

    def lookup(self, path: Iterable[Pair]) -> ContextNode | None:
        node = self.root
        for key in path:
            node = node.children.get(key)
            if node is None:
                return None
        return node

    def lookup_context(
        self, obs_history: Sequence[int], action_history: Sequence[int], lead_action: int = 0
    ) -> ContextNode | None:
        """Walk ``y_1, w_1, y_2, ...`` from the root.

        The first observation is paired with ``lead_action`` (the action that
        preceded the context). ``action_history`` holds one action per
        observation, except that the last may be missing.
        """
        if not obs_history:
            return self.root
        if len(action_history) not in (len(obs_history), len(obs_history) - 1):
            raise ValueError("histories are not aligned")
        prev = [lead_action, *action_history[: len(obs_history) - 1]]
        return self.lookup(zip(obs_history, prev))

    def add_child(self, node: ContextNode, key: Pair) -> ContextNode | None:
        """Return the child at ``key``, creating it if allowed.

        Returns ``None`` (and counts a truncation) when the child would exceed
        ``max_depth``.
        """
        child = node.children.get(key)
        if child is not None:
            return child
        if node.depth + 1 > self.max_depth:
            self.truncations += 1
            return None
        self.alphabet.check_observation(key[0])
        self.alphabet.check_action(key[1])
        child = ContextNode(node.depth + 1)
        node.children[key] = child
        self.node_count += 1
        self.depth = max(self.depth, child.depth)
        return child

    def count_transition(self, node: ContextNode, action: int, next_obs: int) -> None:
        """Add one ``(action, next_obs)`` observation to ``node`` and its KT log-probability."""
        self.alphabet.check_action(action)
        self.alphabet.check_observation(next_obs)
        total = node.action_counts.get(action, 0)
        n = node.next_obs_counts.get((action, next_obs), 0)
        node.log_kt[action] = node.log_kt.get(action, 0.0) + math.log(
            kt_predictive(n, total, self.alphabet.observation_arity)
        )
        node.next_obs_counts[(action, next_obs)] = n + 1
        node.action_counts[action] = total + 1
        node.visit_count += 1

    def refresh_weighted(self, node: ContextNode, action: int) -> None:
        node.log_weighted[action] = ctw_log_weighted(node, action, self.depth)

    def record_transition(
        self, path: Sequence[Pair], action: int, next_obs: int
    ) -> list[ContextNode]:
        """Count a transition at every node along a phrase path.

        ``path`` runs from the root; ``path[i]`` keys the node at depth i+1.
        Node i along the path records the action taken there, which is the
        action half of ``path[i+1]``; the final node records ``action`` and
        ``next_obs``, and the next observation recorded at node i is the
        observation half of ``path[i+1]``. Only the final node may be new.
        Counts, KT and weighted probabilities are refreshed deepest first.
        Returns the nodes along the path, root first.
        """
        self.alphabet.check_action(action)
        self.alphabet.check_observation(next_obs)
        nodes = [self.root]
        for key in path:
            nxt = self.add_child(nodes[-1], key)
            if nxt is None:
                break
            nodes.append(nxt)
        # move i leaves node i; a truncated path keeps the cut-off move.
        # Path keys were validated when their nodes were created.
        moves = [(k[1], k[0]) for k in path] + [(action, next_obs)]
        moves = moves[: len(nodes)]
        arity = self.alphabet.observation_arity
        bound = self.depth
        for node, (a, y) in zip(reversed(nodes), reversed(moves)):
            total = node.action_counts.get(a, 0)
            n = node.next_obs_counts.get((a, y), 0)
            log_pe = node.log_kt.get(a, 0.0) + math.log((n + 0.5) / (total + 0.5 * arity))
            node.log_kt[a] = log_pe
            node.next_obs_counts[(a, y)] = n + 1
            node.action_counts[a] = total + 1
            node.visit_count += 1
            if node.depth >= bound or not node.children:
                node.log_weighted[a] = log_pe
            else:
                log_children = 0.0
                for c in node.children.values():
                    log_children += c.log_weighted.get(a, 0.0)
                node.log_weighted[a] = LOG_HALF + log_add(log_pe, log_children)
        return nodes

    def update_suffix(self, context: Sequence[Pair], action: int, next_obs: int) -> float:
        """Classic CTW step: ``context`` is the history, most recent pair first.

        Every node along the context down to the depth bound is created and
        updated. Returns the new log weighted probability at the root for
        ``action``.
        """
        nodes = [self.root]
        for key in context[: self.max_depth]:
            nodes.append(self.add_child(nodes[-1], key))
        for node in reversed(nodes):
            self.count_transition(node, action, next_obs)
            self.refresh_weighted(node, action)
        return self.root.log_weighted[action]

    def iter_nodes(self) -> Iterator[tuple[tuple[Pair, ...], ContextNode]]:
        """Depth-first traversal in symbol-index order."""
        stack: list[tuple[tuple[Pair, ...], ContextNode]] = [((), self.root)]
        while stack:
            path, node = stack.pop()
            yield path, node
            for key in sorted(node.children, reverse=True):
                stack.append((path + (key,), node.children[key]))

    def dump(self) -> str:
        """Deterministic line-oriented dump used for debugging and golden files."""
        lines = [
            f"# obs_arity={self.alphabet.observation_arity} "
            f"action_arity={self.alphabet.action_arity} depth={self.depth} "
            f"nodes={self.node_count} truncations={self.truncations}"
        ]
        for path, node in self.iter_nodes():
            key = "/".join(f"{y}.{a}" for y, a in path) or "root"
            counts = ",".join(
                f"{a}:{y}={n}" for (a, y), n in sorted(node.next_obs_counts.items())
            )
            lkt = ",".join(f"{a}:{v:.12g}" for a, v in sorted(node.log_kt.items()))
            lw = ",".join(f"{a}:{v:.12g}" for a, v in sorted(node.log_weighted.items()))
            lines.append(
                f"{node.depth}\t{key}\tN={node.visit_count}\t[{counts}]\t"
                f"kt=[{lkt}]\tw=[{lw}]\tJ={node.cost_to_go:.12g}"
            )
        return "\n".join(lines) + "\n"
