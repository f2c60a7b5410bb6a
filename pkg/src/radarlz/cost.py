"""Waveform-selection costs: tracking error and cell-probability entropy."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class InputError(ValueError):
    pass


@dataclass(frozen=True)
class CostSpec:
    objective: str = "tracking"  # or "entropy"
    g_max: float = 100.0
    # "entropy" scores -sum p ln p; "negentropy" scores sum p ln p
    entropy_sign: str = "entropy"
    # softmax sharpness per dB of energy above threshold
    beta: float = 1.0

    def __post_init__(self) -> None:
        if self.objective not in ("tracking", "entropy"):
            raise ValueError("objective must be 'tracking' or 'entropy'")
        if not self.g_max > 0:
            raise ValueError("g_max must be positive")
        if self.entropy_sign not in ("entropy", "negentropy"):
            raise ValueError("entropy_sign must be 'entropy' or 'negentropy'")


def clip(value: float, spec: CostSpec) -> float:
    return float(min(max(value, -spec.g_max), spec.g_max))


def g_track(measurement: np.ndarray | None, estimate: np.ndarray, spec: CostSpec) -> float:
    """Squared distance between the raw measurement and the estimate; g_max on a miss."""
    if measurement is None:
        return spec.g_max
    d = np.asarray(measurement, dtype=float) - np.asarray(estimate, dtype=float)
    return clip(float(d @ d), spec)


@dataclass
class CellProbabilityMap:
    probs: np.ndarray

    def __post_init__(self) -> None:
        self.probs = np.asarray(self.probs, dtype=float)
        if np.any(self.probs < 0) or abs(self.probs.sum() - 1.0) > 1e-9:
            raise ValueError("cell probabilities must be nonnegative and sum to 1")


def cell_probabilities(cell_energies: np.ndarray, threshold: float, gate: np.ndarray | None = None,
                       beta: float = 1.0) -> CellProbabilityMap:
    """Softmax of ``beta * (energy - threshold)`` over the gated cells.

    ``gate`` is a boolean mask of the same shape; ``None`` gates every cell.
    Cells outside the gate get probability 0.
    """
    energies = np.asarray(cell_energies, dtype=float)
    mask = np.ones(energies.shape, dtype=bool) if gate is None else np.asarray(gate, dtype=bool)
    if mask.shape != energies.shape:
        raise InputError("gate and energy map shapes differ")
    if not mask.any():
        raise InputError("gate is empty")
    logits = beta * (energies[mask] - threshold)
    logits -= logits.max()
    w = np.exp(logits)
    probs = np.zeros(energies.shape)
    probs[mask] = w / w.sum()
    return CellProbabilityMap(probs)


def g_entropy(cell_map: CellProbabilityMap, spec: CostSpec) -> float:
    """Shannon entropy of the cell map in nats (sign set by the spec), clipped."""
    p = cell_map.probs[cell_map.probs > 0]
    h = float(-(p * np.log(p)).sum())
    return clip(h if spec.entropy_sign == "entropy" else -h, spec)
