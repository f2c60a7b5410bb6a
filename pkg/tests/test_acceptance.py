"""Acceptance criteria, one test per criterion.

Each test appends a ``criterion N: PASS|FAIL (...)`` line that the terminal
summary prints, whether or not its assertion holds.
"""

from __future__ import annotations

import itertools
import math
import time
from pathlib import Path

import numpy as np
import pytest
import scipy.linalg

from radarlz.active_lz import LearnerConfig, UniversalLearner
from radarlz.context_tree import ContextTree, SymbolAlphabet, kt_block_log_probability, sequential_kt_log_probability
from radarlz.harness import ExperimentConfig, run_trials
from radarlz.markov_env import BandHopper, FiniteMDP
from radarlz.radar_scene import gen_zadoff_chu
from radarlz.tracking import TrackEstimate, cv_process_noise, kalman_gain, kalman_predict, kalman_update, transition_matrix

DATA = Path(__file__).parent / "data"


def report(lines: list[str], number: int, ok: bool, detail: str) -> None:
    lines.append(f"criterion {number}: {'PASS' if ok else 'FAIL'} ({detail})")


# -- criterion 1: CTW equals the brute-force tree-source mixture --------------

# bounded-depth-2 binary tree sources as sets of leaf contexts (most recent
# symbol first) with their CTW prior weights
TREE_SOURCES = [
    ([()], 1 / 2),
    ([(0,), (1,)], 1 / 8),
    ([(0, 0), (0, 1), (1,)], 1 / 8),
    ([(0,), (1, 0), (1, 1)], 1 / 8),
    ([(0, 0), (0, 1), (1, 0), (1, 1)], 1 / 8),
]


def brute_force_mixture(seq: tuple[int, ...]) -> float:
    history = (0, 0) + seq  # zero padding before the sequence
    total = 0.0
    for leaves, prior in TREE_SOURCES:
        counts = {leaf: [0, 0] for leaf in leaves}
        for t, x in enumerate(seq):
            recent = (history[t + 1], history[t])
            leaf = next(leaf for leaf in leaves if recent[: len(leaf)] == leaf)
            counts[leaf][x] += 1
        total += prior * math.exp(sum(kt_block_log_probability(c, 2) for c in counts.values()))
    return total


def test_criterion_1_ctw_bruteforce(acceptance_report):
    start = time.perf_counter()
    worst = 0.0
    for seq in itertools.product((0, 1), repeat=10):
        tree = ContextTree(SymbolAlphabet(2, 1), max_depth=2)
        history = [0, 0]
        for x in seq:
            tree.update_suffix([(history[-1], 0), (history[-2], 0)], 0, x)
            history.append(x)
        ctw = math.exp(tree.root.log_weighted[0])
        worst = max(worst, abs(ctw - brute_force_mixture(seq)))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-12 and elapsed < 10
    report(acceptance_report, 1, ok, f"max abs error {worst:.2e} over 1024 sequences, {elapsed:.1f} s")
    assert ok


# -- criterion 2: KT redundancy bound ------------------------------------------

def test_criterion_2_kt_redundancy(acceptance_report):
    k = 4096
    worst = -math.inf
    for p in (0.1, 0.3, 0.5, 0.7, 0.9):
        for seed in range(20):
            seq = (np.random.default_rng(seed).random(k) < p).astype(int).tolist()
            ones = sum(seq)
            h = 0.0
            for n in (ones, k - ones):
                if n:
                    h -= n / k * math.log2(n / k)
            code_length = -sequential_kt_log_probability(seq, 2) / math.log(2)
            worst = max(worst, code_length - (k * h + 0.5 * math.log2(k)))
    ok = worst <= 2.0
    report(acceptance_report, 2, ok, f"largest excess over K*H + 0.5*log2 K is {worst:.3f} bits (limit 2)")
    assert ok


# -- criterion 3: optimality on a small MDP --------------------------------------

MDP = (
    [[[0.9, 0.1], [0.2, 0.8]], [[0.7, 0.3], [0.1, 0.9]]],
    [[1.0, 0.6], [0.8, 1.2]],
)


def learner_average_on_mdp(env: FiniteMDP, seed: int, steps: int) -> float:
    draws = np.random.default_rng(seed).random(steps).tolist()
    learner = UniversalLearner(SymbolAlphabet(2, 2), LearnerConfig(seed=seed))
    s = env.reset(0)
    for u in draws:
        a = learner.select_waveform(s)
        cost, s_next = env.step(a, u)
        learner.observe_and_update(s, a, cost, s_next)
        s = s_next
    return learner.costs.average


def test_criterion_3_mdp_optimality(acceptance_report):
    env = FiniteMDP(*MDP)
    lam, _ = env.optimal_average_cost()
    start = time.perf_counter()
    gaps = [learner_average_on_mdp(env, seed, 200_000) / lam - 1 for seed in range(10)]
    elapsed = time.perf_counter() - start
    hits = sum(g <= 0.05 for g in gaps)
    ok = hits == 10 and elapsed < 60
    report(acceptance_report, 3, ok,
           f"lambda*={lam:.4f}, {hits}/10 seeds within 5%, worst gap {max(gaps):.2%}, {elapsed:.1f} s")
    assert ok


# -- criterion 4: order matching ---------------------------------------------------

def test_criterion_4_order_matching(acceptance_report):
    env = BandHopper(bands=3)
    lam1, _ = env.best_memoryless_policy()
    lam_star = env.optimal_average_cost()
    finals = []
    for seed in range(10):
        env = BandHopper(bands=3)
        y = env.reset(np.random.default_rng(seed))
        learner = UniversalLearner(SymbolAlphabet(3, 3), LearnerConfig(seed=seed))
        for _ in range(50_000):
            w = learner.select_waveform(y)
            cost, y_next = env.step(w)
            learner.observe_and_update(y, w, cost, y_next)
            y = y_next
        finals.append(learner.costs.average)
    wins = sum(f < lam1 for f in finals)
    gap_ok = lam1 >= 1.2 * lam_star
    ok = gap_ok and wins >= 8
    report(acceptance_report, 4, ok,
           f"best order-1 cost {lam1:.4f} vs lambda* {lam_star:.4f}; learner beats it on {wins}/10 seeds, "
           f"averages {min(finals):.3f} to {max(finals):.3f}")
    assert ok


# -- criteria 5, 6, 7, 9: the scaled experiment ----------------------------------

SEEDS = list(range(10))
TRACKS, CPIS = 20, 200


@pytest.fixture(scope="module")
def experiment():
    """Every scenario x objective x policy, 10 seeds, 20 tracks of 200 CPIs."""
    start = time.perf_counter()
    records = {}
    for scenario in ("stochastic_order3", "adaptive_order2"):
        for objective in ("tracking", "entropy"):
            for policy in ("universal", "ts", "random"):
                cfg = ExperimentConfig(scenario=scenario, objective=objective, policy=policy,
                                       tracks=TRACKS, cpis_per_track=CPIS, seeds=SEEDS)
                by_trial: dict[int, list] = {}
                for rec in run_trials(cfg):
                    by_trial.setdefault(rec.trial, []).append(rec)
                records[scenario, objective, policy] = by_trial
    return records, time.perf_counter() - start


def late_collision(by_trial) -> list[float]:
    """Per-seed collision rate over the final 50 CPIs of the final 5 tracks."""
    return [
        float(np.mean([r.collision for r in recs if r.track >= TRACKS - 5 and r.cpi >= CPIS - 50]))
        for _, recs in sorted(by_trial.items())
    ]


def late_sinr(by_trial) -> list[float]:
    """Per-seed mean SINR over the final 5 tracks."""
    return [float(np.mean([r.sinr_db for r in recs if r.track >= TRACKS - 5]))
            for _, recs in sorted(by_trial.items())]


def final_rmse(by_trial) -> list[float]:
    """Per-seed RMSE at the end of the final track."""
    return [recs[-1].rmse for _, recs in sorted(by_trial.items())]


def test_criterion_5_adaptive_emitter(experiment, acceptance_report):
    records, _ = experiment
    parts, ok = [], True
    for objective in ("tracking", "entropy"):
        uni = np.mean(late_collision(records["adaptive_order2", objective, "universal"]))
        rnd = np.mean(late_collision(records["adaptive_order2", objective, "random"]))
        ts = np.mean(late_collision(records["adaptive_order2", objective, "ts"]))
        checks = (uni < 0.10, abs(rnd - 0.25) <= 0.05, ts >= 0.15)
        ok &= all(checks)
        marks = ["ok" if c else "MISS" for c in checks]
        parts.append(f"{objective}: universal {uni:.3f} {marks[0]}, random {rnd:.3f} {marks[1]}, "
                     f"ts {ts:.3f} {marks[2]}")
    report(acceptance_report, 5, ok, "; ".join(parts))
    assert ok


def test_universal_beats_random_per_seed(experiment):
    records, _ = experiment
    for objective in ("tracking", "entropy"):
        uni = records["adaptive_order2", objective, "universal"]
        rnd = records["adaptive_order2", objective, "random"]
        for seed in SEEDS:
            u = np.mean([r.collision for r in uni[seed] if r.track == TRACKS - 1])
            r_ = np.mean([r.collision for r in rnd[seed] if r.track == TRACKS - 1])
            assert u < r_


def test_criterion_6_stochastic_ordering(experiment, acceptance_report):
    records, _ = experiment
    parts, ok = [], True
    for objective in ("tracking", "entropy"):
        uni = records["stochastic_order3", objective, "universal"]
        rnd = records["stochastic_order3", objective, "random"]
        ds = np.mean(late_sinr(uni)) - np.mean(late_sinr(rnd))
        ru, rr = np.mean(final_rmse(uni)), np.mean(final_rmse(rnd))
        ok &= ds >= 2.0 and ru <= rr
        parts.append(f"{objective}: SINR gain {ds:+.2f} dB, final RMSE {ru:.3f} vs {rr:.3f}")
    report(acceptance_report, 6, ok, "; ".join(parts))
    assert ok


def test_criterion_7_objective_comparison(experiment, acceptance_report):
    records, _ = experiment
    tracking = np.mean(late_sinr(records["stochastic_order3", "tracking", "universal"]))
    entropy = np.mean(late_sinr(records["stochastic_order3", "entropy", "universal"]))
    ok = tracking >= entropy - 1.0
    report(acceptance_report, 7, ok,
           f"universal late SINR {tracking:.2f} dB (tracking) vs {entropy:.2f} dB (entropy)")
    assert ok


def test_criterion_9_runtime(experiment, acceptance_report):
    _, elapsed = experiment
    ok = elapsed < 300
    report(acceptance_report, 9, ok, f"12 configurations x 10 seeds x 20x200 CPIs in {elapsed:.1f} s")
    assert ok


# -- criterion 8: unit and property checks --------------------------------------

def test_criterion_8_unit_properties(acceptance_report, tmp_path):
    failures = []

    # normalization of every predictive in a learner's tree
    learner = UniversalLearner(SymbolAlphabet(4, 2), LearnerConfig(seed=0))
    rng = np.random.default_rng(0)
    y = 0
    for _ in range(5000):
        w = learner.select_waveform(y)
        y_next = int(rng.integers(4)) if w else (y + 1) % 4
        learner.observe_and_update(y, w, float(w), y_next)
        y = y_next
    worst_norm = max(
        abs(math.fsum(node.predictive(a, 4)) - 1.0)
        for _, node in learner.tree.iter_nodes() for a in range(2)
    )
    if worst_norm > 1e-12:
        failures.append(f"normalization {worst_norm:.1e}")

    # Zadoff-Chu modulus and periodic autocorrelation
    x = gen_zadoff_chu(64, 1)
    modulus = float(np.abs(np.abs(x) - 1).max())
    autocorr = max(abs(np.vdot(x, np.roll(x, lag))) for lag in range(1, 64))
    if modulus > 1e-9 or autocorr > 1e-9:
        failures.append(f"zadoff-chu {modulus:.1e}/{autocorr:.1e}")

    # steady-state Kalman gain against the discrete algebraic Riccati equation
    dt = 0.063488
    q, r = cv_process_noise(dt, 0.1), np.diag([9.0, 1.0])
    est = TrackEstimate([0.0, 0.0], 100 * np.eye(2))
    for _ in range(500):
        est = kalman_update(kalman_predict(est, dt, q), [0.0, 0.0], r)
    gain = kalman_gain(kalman_predict(est, dt, q).covariance, r)
    p_inf = scipy.linalg.solve_discrete_are(transition_matrix(dt).T, np.eye(2), q, r)
    riccati = float(np.abs(gain - p_inf @ np.linalg.inv(p_inf + r)).max())
    if riccati > 1e-9:
        failures.append(f"riccati {riccati:.1e}")

    # covariance stays positive definite
    est = TrackEstimate([0.0, 0.0], np.eye(2))
    min_eig = math.inf
    for _ in range(10_000):
        a, b = rng.standard_normal((2, 2, 2))
        est = kalman_predict(est, dt, 0.01 * (a @ a.T + 0.1 * np.eye(2)))
        est = kalman_update(est, rng.standard_normal(2), b @ b.T + 0.1 * np.eye(2))
        min_eig = min(min_eig, float(np.linalg.eigvalsh(est.covariance).min()))
    if min_eig <= 0:
        failures.append("covariance lost positive definiteness")

    # end-to-end CSV determinism against the golden micro-run
    cfg = ExperimentConfig(policy="universal", tracks=2, cpis_per_track=5, seeds=[0, 1])
    records = run_trials(cfg)
    lines = [",".join(rec.row()) for rec in records]
    golden = (DATA / "golden_cpi_stochastic_tracking.csv").read_text().splitlines()[1:]
    if lines != golden:
        failures.append("golden CSV mismatch")

    ok = not failures
    detail = (f"normalization {worst_norm:.1e}, ZC autocorrelation {autocorr:.1e}, "
              f"Riccati gain error {riccati:.1e}, min covariance eigenvalue {min_eig:.2e}, golden CSV "
              f"{'match' if lines == golden else 'MISMATCH'}")
    report(acceptance_report, 8, ok, detail if ok else detail + "; " + ", ".join(failures))
    assert ok
