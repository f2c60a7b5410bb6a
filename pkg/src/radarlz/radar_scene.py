"""Simulated radar scene: target, interference channel, waveforms, measurements.

The target moves radially at constant velocity. The channel is a single
interferer occupying one of ``S`` sub-channels, moved either by a stochastic
order-3 rule or by an emitter reacting to the radar's last two bands. The
radar's catalog holds an LFM chirp and a Zadoff-Chu phase code in every
sub-channel. Interference is band-abstracted: sharing the interferer's band
lowers SINR, and the waveform class only changes measurement noise.

Measurements are quantized for the learner into ``occupancy index * 2 +
detected``, where the occupancy vector is read as a binary number with
``occupancy[0]`` as the most significant bit.
"""

from __future__ import annotations

import enum
import itertools
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0


class ConfigError(ValueError):
    """Inconsistent scene or channel configuration."""


class ParameterError(ValueError):
    """Invalid waveform-generation parameter."""


@dataclass
class SceneConfig:
    carrier_hz: float = 2.5e9
    pri_s: float = 4.96e-4
    pulses_per_cpi: int = 128
    delay_cells: int = 64
    doppler_cells: int = 32
    subchannels: int = 4
    snr0_db: float = 15.0
    inr_db: float = 20.0
    detection_threshold_db: float = 10.0
    memory_L: int = 3  # order of the stochastic interferer
    memory_J: int = 2  # order of the adaptive emitter
    # measurement noise at snr0 for the LFM class
    sigma_range_m: float = 3.0
    sigma_velocity_mps: float = 1.0
    # phase-coded (Zadoff-Chu) noise relative to LFM
    zc_range_factor: float = 2.0
    zc_velocity_factor: float = 0.5
    # delay-Doppler grid: range cells from 0, velocity cells centred on 0
    range_cell_m: float = 62.5
    velocity_cell_mps: float = 4.0
    # probability the interferer keeps its recent majority band
    majority_stay_prob: float = 0.8
    # chance each sensed occupancy bit is flipped
    occupancy_flip_prob: float = 0.0

    def __post_init__(self) -> None:
        for name in ("delay_cells", "doppler_cells", "subchannels", "pulses_per_cpi"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.pri_s <= 0 or self.carrier_hz <= 0:
            raise ConfigError("pri_s and carrier_hz must be positive")
        if self.memory_L < 1 or self.memory_J < 1:
            raise ConfigError("channel memories must be >= 1")
        if min(self.sigma_range_m, self.sigma_velocity_mps) < 0:
            raise ConfigError("noise levels must be nonnegative")
        if self.range_cell_m <= 0 or self.velocity_cell_mps <= 0:
            raise ConfigError("cell sizes must be positive")
        if not 0.0 <= self.majority_stay_prob <= 1.0:
            raise ConfigError("majority_stay_prob must lie in [0, 1]")
        if not 0.0 <= self.occupancy_flip_prob <= 1.0:
            raise ConfigError("occupancy_flip_prob must lie in [0, 1]")

    @property
    def cpi_duration(self) -> float:
        return self.pulses_per_cpi * self.pri_s

    @property
    def hypothesis_count(self) -> int:
        """Delay-Doppler cells plus the no-target hypothesis."""
        return self.delay_cells * self.doppler_cells + 1

    @property
    def wavelength_m(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_hz

    @property
    def catalog_size(self) -> int:
        return 2 * self.subchannels

    @property
    def observation_arity(self) -> int:
        return 2 ** self.subchannels * 2


@dataclass(frozen=True)
class TargetState:
    range_m: float
    velocity_mps: float

    def __post_init__(self) -> None:
        if self.range_m < 0:
            raise ValueError("range must be nonnegative")

    def as_array(self) -> np.ndarray:
        return np.array([self.range_m, self.velocity_mps])


def target_cell(state: TargetState | np.ndarray, config: SceneConfig) -> tuple[int, int] | None:
    """Delay-Doppler cell of a (range, velocity) pair; ``None`` off the grid."""
    r, v = (state.range_m, state.velocity_mps) if isinstance(state, TargetState) else state
    i = math.floor(r / config.range_cell_m)
    j = math.floor(v / config.velocity_cell_mps) + config.doppler_cells // 2
    if 0 <= i < config.delay_cells and 0 <= j < config.doppler_cells:
        return i, j
    return None


def advance_target(state: TargetState, config: SceneConfig, dt: float | None = None) -> TargetState:
    """Constant-velocity motion over one CPI (or ``dt`` seconds)."""
    dt = config.cpi_duration if dt is None else dt
    return TargetState(state.range_m + state.velocity_mps * dt, state.velocity_mps)


@dataclass
class ChannelState:
    """Interferer band plus a bounded history of (band, radar band) pairs.

    ``band`` is the interferer's current sub-channel; ``occupancy`` is its
    one-hot vector. ``history`` holds the most recent entries last.
    """

    subchannels: int
    band: int = 0
    capacity: int = 3
    history: deque = field(default_factory=deque)

    def __post_init__(self) -> None:
        if not 0 <= self.band < self.subchannels:
            raise ConfigError("interferer band outside the sub-channels")
        self.history = deque(self.history, maxlen=self.capacity)

    @property
    def occupancy(self) -> tuple[int, ...]:
        return tuple(int(b == self.band) for b in range(self.subchannels))

    def bands(self) -> list[int]:
        return [b for b, _ in self.history]

    def radar_bands(self) -> list[int]:
        return [r for _, r in self.history if r is not None]

    def record_radar(self, radar_band: int) -> None:
        """Attach the radar's band to the latest history entry."""
        if self.history and self.history[-1][1] is None:
            self.history[-1] = (self.history[-1][0], radar_band)
        else:
            self.history.append((self.band, radar_band))

    def copy(self) -> ChannelState:
        return ChannelState(self.subchannels, self.band, self.capacity, deque(self.history))


def new_channel(config: SceneConfig, rng: np.random.Generator) -> ChannelState:
    """Channel with the interferer on a random band and a padded history."""
    band = int(rng.integers(config.subchannels))
    capacity = max(config.memory_L, config.memory_J, 2)
    # pad with the start band so order-L rules have a full history
    history = deque([(band, None)] * config.memory_L, maxlen=capacity)
    return ChannelState(config.subchannels, band, capacity, history)


def majority_band(bands: list[int]) -> int:
    """Most frequent band; ties go to the most recent of the tied bands."""
    best, best_count = bands[-1], 0
    for b in reversed(bands):
        c = bands.count(b)
        if c > best_count:
            best, best_count = b, c
    return best


def majority_table(subchannels: int, stay_prob: float = 0.8, order: int = 3) -> dict[tuple[int, ...], np.ndarray]:
    """Order-``order`` table: keep the majority band w.p. ``stay_prob``, else uniform."""
    table = {}
    for hist in itertools.product(range(subchannels), repeat=order):
        row = np.full(subchannels, (1.0 - stay_prob) / subchannels)
        row[majority_band(list(hist))] += stay_prob
        table[hist] = row
    return table


def uniform_table(subchannels: int, order: int = 3) -> dict[tuple[int, ...], np.ndarray]:
    return {
        hist: np.full(subchannels, 1.0 / subchannels)
        for hist in itertools.product(range(subchannels), repeat=order)
    }


def validate_table(table: dict[tuple[int, ...], np.ndarray], subchannels: int, order: int) -> None:
    expected = set(itertools.product(range(subchannels), repeat=order))
    if set(table) != expected:
        raise ConfigError(f"table must have one row per length-{order} band history")
    for hist, row in table.items():
        row = np.asarray(row, dtype=float)
        if row.shape != (subchannels,) or np.any(row < 0):
            raise ConfigError(f"row {hist} is not a probability vector over {subchannels} bands")
        if abs(row.sum() - 1.0) > 1e-9:
            raise ConfigError(f"row {hist} sums to {row.sum()!r}, not 1")


def lifted_stationary_distribution(table: dict[tuple[int, ...], np.ndarray], subchannels: int) -> np.ndarray:
    """Band marginal of the stationary law of an order-L table, by power iteration."""
    hists = sorted(table)
    index = {h: i for i, h in enumerate(hists)}
    trans = np.zeros((len(hists), len(hists)))
    for h in hists:
        for b in range(subchannels):
            trans[index[h], index[h[1:] + (b,)]] += table[h][b]
    pi = np.full(len(hists), 1.0 / len(hists))
    for _ in range(10_000):
        nxt = pi @ trans
        if np.abs(nxt - pi).max() < 1e-15:
            pi = nxt
            break
        pi = nxt
    marginal = np.zeros(subchannels)
    for h, p in zip(hists, pi):
        marginal[h[-1]] += p
    return marginal


def step_channel_stochastic(
    channel: ChannelState,
    rng: np.random.Generator,
    table: dict[tuple[int, ...], np.ndarray],
    order: int = 3,
) -> ChannelState:
    """Draw the next interferer band from the last ``order`` bands."""
    bands = channel.bands()
    if len(bands) < order:
        raise ConfigError(f"history holds {len(bands)} bands, the rule needs {order}")
    row = table[tuple(bands[-order:])]
    band = int(rng.choice(channel.subchannels, p=row))
    out = channel.copy()
    out.band = band
    out.history.append((band, None))
    return out


def step_channel_adaptive(channel: ChannelState, last_two_radar_bands: tuple[int, int] | list[int]) -> ChannelState:
    """Jump to the radar's band after it used that band twice in a row, else stay."""
    out = channel.copy()
    if len(last_two_radar_bands) >= 2:
        older, newer = last_two_radar_bands[-2], last_two_radar_bands[-1]
        if older == newer:
            out.band = newer
    out.history.append((out.band, None))
    return out


class WaveformClass(enum.Enum):
    LFM_UPSWEEP = "lfm"
    PHASE_CODED_ZC64 = "zc64"


@dataclass(frozen=True)
class Waveform:
    wf_class: WaveformClass
    subchannel: int


def waveform_catalog(config: SceneConfig) -> list[Waveform]:
    """All LFM waveforms (by sub-channel) followed by all Zadoff-Chu ones."""
    return [
        Waveform(cls, s)
        for cls in (WaveformClass.LFM_UPSWEEP, WaveformClass.PHASE_CODED_ZC64)
        for s in range(config.subchannels)
    ]


@dataclass
class Observation:
    detected: bool
    range_est_m: float
    velocity_est_mps: float
    observed_occupancy: tuple[int, ...]
    sinr_db: float

    @property
    def measurement(self) -> np.ndarray | None:
        """(range, velocity) when detected, else ``None``."""
        if not self.detected:
            return None
        return np.array([self.range_est_m, self.velocity_est_mps])


@dataclass
class SceneState:
    target: TargetState
    channel: ChannelState


def compute_sinr(waveform: Waveform, channel: ChannelState, config: SceneConfig) -> float:
    """SINR in dB; sharing the interferer's band adds INR to the noise."""
    overlap = channel.occupancy[waveform.subchannel]
    snr = 10.0 ** (config.snr0_db / 10.0)
    inr = 0.0 if config.inr_db == -math.inf else 10.0 ** (config.inr_db / 10.0)
    return 10.0 * math.log10(snr / (1.0 + inr * overlap))


def noise_sigmas(waveform: Waveform, sinr_db: float, config: SceneConfig) -> tuple[float, float]:
    """Range and velocity noise for a waveform at a given SINR."""
    scale = 10.0 ** (-(sinr_db - config.snr0_db) / 20.0)
    sr, sv = config.sigma_range_m, config.sigma_velocity_mps
    if waveform.wf_class is WaveformClass.PHASE_CODED_ZC64:
        sr *= config.zc_range_factor
        sv *= config.zc_velocity_factor
    return sr * scale, sv * scale


def measure(scene: SceneState, waveform: Waveform, rng: np.random.Generator, config: SceneConfig) -> Observation:
    """Detect and estimate the target with the given waveform."""
    sinr = compute_sinr(waveform, scene.channel, config)
    occupancy = scene.channel.occupancy
    if config.occupancy_flip_prob > 0:
        flips = rng.random(len(occupancy)) < config.occupancy_flip_prob
        occupancy = tuple(int(o ^ f) for o, f in zip(occupancy, flips))
    if sinr < config.detection_threshold_db:
        return Observation(False, math.nan, math.nan, occupancy, sinr)
    sr, sv = noise_sigmas(waveform, sinr, config)
    noise = rng.standard_normal(2)
    return Observation(
        True,
        scene.target.range_m + sr * noise[0],
        scene.target.velocity_mps + sv * noise[1],
        occupancy,
        sinr,
    )


def cell_energies(
    scene: SceneState,
    waveform: Waveform,
    center: tuple[int, int],
    half_width: int,
    rng: np.random.Generator,
    config: SceneConfig,
) -> np.ndarray:
    """Received energy (dB) over a square gate of delay-Doppler cells.

    Every cell holds exponentially distributed noise, plus interference if the
    waveform shares the interferer's band; the target's cell also holds the
    target return at ``snr0``. Cells off the grid hold noise only.
    """
    size = 2 * half_width + 1
    power = rng.exponential(1.0, size=(size, size))
    if scene.channel.occupancy[waveform.subchannel]:
        power += 10.0 ** (config.inr_db / 10.0) * rng.exponential(1.0, size=(size, size))
    cell = target_cell(scene.target, config)
    if cell is not None:
        di, dj = cell[0] - center[0] + half_width, cell[1] - center[1] + half_width
        if 0 <= di < size and 0 <= dj < size:
            power[di, dj] += 10.0 ** (config.snr0_db / 10.0)
    return 10.0 * np.log10(power)


def occupancy_index(occupancy: tuple[int, ...] | list[int]) -> int:
    index = 0
    for bit in occupancy:
        index = index * 2 + int(bit)
    return index


def quantize_observation(obs: Observation) -> int:
    return occupancy_index(obs.observed_occupancy) * 2 + int(obs.detected)


def dequantize_symbol(symbol: int, subchannels: int) -> tuple[tuple[int, ...], bool]:
    """Inverse of ``quantize_observation``: (occupancy, detected)."""
    if not 0 <= symbol < 2 ** subchannels * 2:
        raise ValueError(f"symbol {symbol} outside the alphabet")
    index, detected = divmod(symbol, 2)
    bits = tuple((index >> (subchannels - 1 - s)) & 1 for s in range(subchannels))
    return bits, bool(detected)


def gen_zadoff_chu(length: int, root: int) -> np.ndarray:
    """Zadoff-Chu sequence; even lengths use n^2, odd lengths n(n+1)."""
    if length < 1:
        raise ParameterError("length must be >= 1")
    if math.gcd(root, length) != 1:
        raise ParameterError(f"root {root} is not coprime with length {length}")
    n = np.arange(length)
    # reduce the phase index modulo 2*length to keep the argument small
    k = (n * n) if length % 2 == 0 else (n * (n + 1))
    k = (root * k) % (2 * length)
    return np.exp(-1j * np.pi * k / length)


def gen_lfm(samples: int, norm_bandwidth: float) -> np.ndarray:
    """Unit-modulus upsweep chirp, frequency rising linearly from 0 to ``norm_bandwidth``."""
    if samples < 2:
        raise ParameterError("samples must be >= 2")
    n = np.arange(samples)
    return np.exp(1j * np.pi * norm_bandwidth * n * n / (samples - 1))
