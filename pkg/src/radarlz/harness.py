"""Experiment orchestration: trials, per-CPI logs, per-track summaries, plots.

A trial is one seed. It owns its scene, tracker, policy and RNG streams, and
runs ``tracks`` engagements back to back; the policy keeps learning across
tracks while target and interferer are re-initialized for each one. Trials
are independent, so they may run in worker processes; results are merged in
trial order either way.
"""

from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from radarlz.active_lz import LearnerConfig, UniversalLearner
from radarlz.baselines import RandomPolicy, ThompsonPolicy
from radarlz.context_tree import SymbolAlphabet
from radarlz.cost import CostSpec, cell_probabilities, g_entropy, g_track
from radarlz.radar_scene import (
    SceneConfig,
    SceneState,
    TargetState,
    advance_target,
    cell_energies,
    compute_sinr,
    majority_table,
    measure,
    new_channel,
    noise_sigmas,
    occupancy_index,
    quantize_observation,
    step_channel_adaptive,
    step_channel_stochastic,
    target_cell,
    waveform_catalog,
)
from radarlz.tracking import TrackEstimate, cv_process_noise, kalman_predict, kalman_update

SCENARIOS = ("stochastic_order3", "adaptive_order2")
OBJECTIVES = ("tracking", "entropy")
POLICIES = ("universal", "ts", "random")

CPI_COLUMNS = (
    "trial", "track", "cpi", "policy", "objective", "scenario", "wf_class",
    "subchannel", "sinr_db", "cost", "rmse", "collision",
)
SUMMARY_COLUMNS = (
    "policy", "objective", "scenario", "track", "n_trials",
    "sinr_db_mean", "sinr_db_se", "rmse_mean", "rmse_se",
    "cost_mean", "cost_se", "collision_mean", "collision_se",
)


class ConfigError(ValueError):
    """Experiment configuration that cannot be run."""


@dataclass
class ExperimentConfig:
    scenario: str = "stochastic_order3"
    objective: str = "tracking"
    policy: str = "universal"
    tracks: int = 100
    cpis_per_track: int = 200
    seeds: list[int] = field(default_factory=lambda: [0])
    scene: SceneConfig = field(default_factory=SceneConfig)
    learner: LearnerConfig = field(default_factory=LearnerConfig)
    output_path: str | None = None
    g_max: float = 100.0
    entropy_sign: str = "entropy"
    softmax_beta: float = 1.0
    gate_half_width: int = 1
    initial_range_m: float = 1000.0
    initial_velocity_mps: float = 50.0
    range_jitter_m: float = 0.0
    velocity_jitter_mps: float = 0.0
    accel_psd: float = 0.1
    workers: int = 1

    def validate(self) -> None:
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"scenario must be one of {SCENARIOS}")
        if self.objective not in OBJECTIVES:
            raise ConfigError(f"objective must be one of {OBJECTIVES}")
        if self.policy not in POLICIES:
            raise ConfigError(f"policy must be one of {POLICIES}")
        if self.tracks < 1 or self.cpis_per_track < 1:
            raise ConfigError("tracks and cpis_per_track must be >= 1")
        if not self.seeds:
            raise ConfigError("seeds must be nonempty")
        if self.gate_half_width < 0:
            raise ConfigError("gate_half_width must be >= 0")
        if self.initial_range_m < 0:
            raise ConfigError("initial_range_m must be >= 0")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        CostSpec(self.objective, self.g_max, self.entropy_sign, self.softmax_beta)

    def cost_spec(self) -> CostSpec:
        return CostSpec(self.objective, self.g_max, self.entropy_sign, self.softmax_beta)


@dataclass
class TrackRecord:
    trial: int
    track: int
    cpi: int
    policy: str
    objective: str
    scenario: str
    wf_class: str
    subchannel: int
    sinr_db: float
    cost: float
    rmse: float
    collision: int

    def row(self) -> list[str]:
        return [
            str(self.trial), str(self.track), str(self.cpi), self.policy, self.objective,
            self.scenario, self.wf_class, str(self.subchannel), f"{self.sinr_db:.6f}",
            f"{self.cost:.6f}", f"{self.rmse:.6f}", str(self.collision),
        ]


def make_policy(config: ExperimentConfig, seed: int):
    """Fresh policy for one trial, seeded from the trial's stream."""
    scene = config.scene
    n_actions = scene.catalog_size
    if config.policy == "universal":
        learner_cfg = LearnerConfig(**{**asdict(config.learner), "seed": seed})
        alphabet = SymbolAlphabet(scene.observation_arity, n_actions)
        return UniversalLearner(alphabet, learner_cfg, g_max=config.g_max)
    if config.policy == "ts":
        return ThompsonPolicy(n_actions, config.g_max, seed=seed)
    return RandomPolicy(n_actions, seed=seed)


@dataclass
class TrialState:
    """Everything one trial carries from track to track."""

    policy: object
    scene_rng: np.random.Generator
    measure_rng: np.random.Generator
    table: dict | None
    last_symbol: int | None = None


def new_trial(config: ExperimentConfig, seed: int) -> TrialState:
    scene_ss, measure_ss, policy_ss = np.random.SeedSequence(seed).spawn(3)
    policy_seed = int(policy_ss.generate_state(1)[0])
    table = None
    if config.scenario == "stochastic_order3":
        table = majority_table(config.scene.subchannels, config.scene.majority_stay_prob,
                               config.scene.memory_L)
    return TrialState(
        make_policy(config, policy_seed),
        np.random.default_rng(scene_ss),
        np.random.default_rng(measure_ss),
        table,
    )


def _initial_track(config: ExperimentConfig, rng: np.random.Generator) -> tuple[TargetState, TrackEstimate]:
    r = config.initial_range_m + config.range_jitter_m * rng.standard_normal()
    v = config.initial_velocity_mps + config.velocity_jitter_mps * rng.standard_normal()
    truth = TargetState(max(r, 0.0), v)
    sr, sv = config.scene.sigma_range_m, config.scene.sigma_velocity_mps
    # the track starts from one reference-quality measurement
    start = truth.as_array() + np.array([sr, sv]) * rng.standard_normal(2)
    cov = np.diag([max(sr, 1e-3) ** 2, max(sv, 1e-3) ** 2])
    return truth, TrackEstimate(start, cov)


def run_track(config: ExperimentConfig, trial: TrialState, trial_index: int, track_index: int) -> list[TrackRecord]:
    """Simulate one track of ``cpis_per_track`` CPIs, updating ``trial`` in place."""
    scene_cfg = config.scene
    spec = config.cost_spec()
    catalog = waveform_catalog(scene_cfg)
    policy = trial.policy
    rng = trial.scene_rng
    mrng = trial.measure_rng
    dt = scene_cfg.cpi_duration
    q = cv_process_noise(dt, config.accel_psd)

    truth, est = _initial_track(config, rng)
    channel = new_channel(scene_cfg, rng)
    # the first decision of a trial uses a spectrum sensed before the first
    # CPI; later tracks continue from the previous track's last observation
    y = trial.last_symbol
    if y is None:
        y = occupancy_index(channel.occupancy) * 2 + 1
    records = []
    sq_err = 0.0
    for cpi in range(config.cpis_per_track):
        w = policy.select_waveform(y)
        wf = catalog[w]
        truth = advance_target(truth, scene_cfg)
        if config.scenario == "stochastic_order3":
            channel = step_channel_stochastic(channel, rng, trial.table, scene_cfg.memory_L)
        else:
            channel = step_channel_adaptive(channel, channel.radar_bands()[-2:])
        channel.record_radar(wf.subchannel)
        scene = SceneState(truth, channel)
        obs = measure(scene, wf, mrng, scene_cfg)

        pred = kalman_predict(est, dt, q)
        z = obs.measurement
        if z is not None:
            sr, sv = noise_sigmas(wf, obs.sinr_db, scene_cfg)
            r = np.diag([max(sr, 1e-6) ** 2, max(sv, 1e-6) ** 2])
            est = kalman_update(pred, z, r)
        else:
            est = pred

        if config.objective == "tracking":
            cost = g_track(z, pred.state, spec)
        else:
            center = target_cell(pred.state, scene_cfg) or _clamp_cell(pred.state, scene_cfg)
            energies = cell_energies(scene, wf, center, config.gate_half_width, mrng, scene_cfg)
            cmap = cell_probabilities(energies, scene_cfg.detection_threshold_db, beta=spec.beta)
            cost = g_entropy(cmap, spec)

        y_next = quantize_observation(obs)
        policy.observe_and_update(y, w, cost, y_next)
        y = y_next
        trial.last_symbol = y

        err = truth.as_array() - est.state
        sq_err += float(err @ err)
        records.append(TrackRecord(
            trial_index, track_index, cpi, config.policy, config.objective, config.scenario,
            wf.wf_class.value, wf.subchannel, obs.sinr_db, cost,
            math.sqrt(sq_err / (cpi + 1)),
            int(channel.occupancy[wf.subchannel]),
        ))
    return records


def _clamp_cell(state: np.ndarray, config: SceneConfig) -> tuple[int, int]:
    i = math.floor(state[0] / config.range_cell_m)
    j = math.floor(state[1] / config.velocity_cell_mps) + config.doppler_cells // 2
    return min(max(i, 0), config.delay_cells - 1), min(max(j, 0), config.doppler_cells - 1)


def run_trial(config: ExperimentConfig, trial_index: int) -> list[TrackRecord]:
    trial = new_trial(config, config.seeds[trial_index])
    records: list[TrackRecord] = []
    for track in range(config.tracks):
        records.extend(run_track(config, trial, trial_index, track))
    return records


def _run_trial_args(args: tuple[ExperimentConfig, int]) -> list[TrackRecord]:
    return run_trial(*args)


def run_trials(config: ExperimentConfig) -> list[TrackRecord]:
    """All trials of one configuration, merged in trial order."""
    config.validate()
    jobs = [(config, i) for i in range(len(config.seeds))]
    if config.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            parts = list(pool.map(_run_trial_args, jobs))
    else:
        parts = [_run_trial_args(job) for job in jobs]
    return [rec for part in parts for rec in part]


def _mean_se(values: list[float]) -> tuple[float, float]:
    arr = np.asarray(values, dtype=float)
    mean = float(arr.mean())
    se = float(arr.std(ddof=1) / math.sqrt(len(arr))) if len(arr) > 1 else 0.0
    return mean, se


def summarize(records: list[TrackRecord]) -> list[dict]:
    """Per-track seed means and standard errors.

    Each trial contributes its mean SINR, final RMSE, mean cost and collision
    rate for the track.
    """
    per_trial: dict[tuple, dict[int, list[TrackRecord]]] = {}
    for rec in records:
        key = (rec.policy, rec.objective, rec.scenario, rec.track)
        per_trial.setdefault(key, {}).setdefault(rec.trial, []).append(rec)
    rows = []
    for key in sorted(per_trial, key=lambda k: (k[0], k[1], k[2], k[3])):
        trials = per_trial[key]
        sinr, rmse, cost, coll = [], [], [], []
        for t in sorted(trials):
            recs = trials[t]
            sinr.append(np.mean([r.sinr_db for r in recs]))
            rmse.append(recs[-1].rmse)
            cost.append(np.mean([r.cost for r in recs]))
            coll.append(np.mean([r.collision for r in recs]))
        row = dict(zip(("policy", "objective", "scenario", "track"), key))
        row["n_trials"] = len(trials)
        for name, vals in (("sinr_db", sinr), ("rmse", rmse), ("cost", cost), ("collision", coll)):
            row[f"{name}_mean"], row[f"{name}_se"] = _mean_se(vals)
        rows.append(row)
    return rows


def write_cpi_csv(records: list[TrackRecord], path: str | os.PathLike) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CPI_COLUMNS)
        for rec in records:
            writer.writerow(rec.row())


def format_summary(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SUMMARY_COLUMNS)
    for row in rows:
        writer.writerow([
            f"{row[c]:.6f}" if isinstance(row[c], float) else str(row[c]) for c in SUMMARY_COLUMNS
        ])
    return buf.getvalue()


def read_summary(path: str | os.PathLike) -> list[dict]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    for row in rows:
        if list(row) != list(SUMMARY_COLUMNS):
            raise ValueError(f"{path} is not a summary CSV")
        row["track"] = int(row["track"])
        row["n_trials"] = int(row["n_trials"])
        for c in SUMMARY_COLUMNS[5:]:
            row[c] = float(row[c])
    return rows


@dataclass
class ExperimentResult:
    records: list[TrackRecord]
    summary: list[dict]


def _tag(config: ExperimentConfig) -> str:
    return f"{config.scenario}_{config.objective}_{config.policy}"


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Run every trial; write per-CPI and summary CSVs when ``output_path`` is set."""
    config.validate()
    out = None
    if config.output_path is not None:
        out = Path(config.output_path)
        try:
            out.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise OSError(f"cannot create output directory {out}: {exc}") from exc
        if not os.access(out, os.W_OK):
            raise OSError(f"output directory {out} is not writable")
    records = run_trials(config)
    summary = summarize(records)
    if out is not None:
        write_cpi_csv(records, out / f"cpi_{_tag(config)}.csv")
        (out / f"summary_{_tag(config)}.csv").write_text(format_summary(summary))
    return ExperimentResult(records, summary)


def config_fields() -> list[str]:
    return [f.name for f in fields(ExperimentConfig)]


def emit_plots(summary: list[dict], out_dir: str | os.PathLike) -> list[Path]:
    """SINR-vs-track and RMSE-vs-track SVGs, one file per (scenario, objective).

    Values are rounded as in the summary CSV, so plotting a run directly
    or from its CSV gives the same bytes.
    """
    if not summary:
        return []
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    groups: dict[tuple[str, str], dict[str, list[dict]]] = {}
    for row in summary:
        groups.setdefault((row["scenario"], row["objective"]), {}).setdefault(row["policy"], []).append(row)
    written = []
    with matplotlib.rc_context({"svg.hashsalt": "radarlz", "svg.fonttype": "none"}):
        for (scenario, objective), by_policy in sorted(groups.items()):
            fig, (ax_s, ax_r) = plt.subplots(1, 2, figsize=(10, 4))
            for policy in sorted(by_policy):
                rows = sorted(by_policy[policy], key=lambda r: r["track"])
                x = [r["track"] + 1 for r in rows]
                ax_s.plot(x, [round(r["sinr_db_mean"], 6) for r in rows], label=policy)
                ax_r.plot(x, [round(r["rmse_mean"], 6) for r in rows], label=policy)
            ax_s.set_xlabel("track")
            ax_s.set_ylabel("mean SINR (dB)")
            ax_r.set_xlabel("track")
            ax_r.set_ylabel("final RMSE")
            ax_s.legend()
            fig.suptitle(f"{scenario}, {objective} objective")
            fig.tight_layout()
            path = out_dir / f"{scenario}_{objective}.svg"
            fig.savefig(path, format="svg", metadata={"Date": None})
            plt.close(fig)
            written.append(path)
    return written
