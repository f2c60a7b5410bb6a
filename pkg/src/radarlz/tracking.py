"""Constant-velocity Kalman filter over (range, radial velocity)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class ParameterError(ValueError):
    """Noise matrix that is not symmetric positive definite."""


class InputError(ValueError):
    """Series of mismatched or zero length."""


@dataclass
class TrackEstimate:
    state: np.ndarray  # [range_m, velocity_mps]
    covariance: np.ndarray  # 2x2

    def __post_init__(self) -> None:
        self.state = np.asarray(self.state, dtype=float).reshape(2)
        self.covariance = np.asarray(self.covariance, dtype=float).reshape(2, 2)


def transition_matrix(dt: float) -> np.ndarray:
    return np.array([[1.0, dt], [0.0, 1.0]])


def cv_process_noise(dt: float, accel_psd: float) -> np.ndarray:
    """Discrete white-noise-acceleration Q for a constant-velocity model."""
    return accel_psd * np.array([[dt**3 / 3.0, dt**2 / 2.0], [dt**2 / 2.0, dt]])


def _check_pd(matrix: np.ndarray, name: str) -> np.ndarray:
    matrix = np.asarray(matrix, dtype=float)
    if matrix.shape != (2, 2) or not np.allclose(matrix, matrix.T, atol=1e-12):
        raise ParameterError(f"{name} must be a symmetric 2x2 matrix")
    try:
        np.linalg.cholesky(matrix)
    except np.linalg.LinAlgError as exc:
        raise ParameterError(f"{name} is not positive definite") from exc
    return matrix


def kalman_predict(est: TrackEstimate, cpi_duration: float, process_noise: np.ndarray) -> TrackEstimate:
    f = transition_matrix(cpi_duration)
    p = f @ est.covariance @ f.T + np.asarray(process_noise, dtype=float)
    return TrackEstimate(f @ est.state, 0.5 * (p + p.T))


def kalman_gain(covariance: np.ndarray, meas_noise: np.ndarray) -> np.ndarray:
    """Gain for H = I: P (P + R)^-1."""
    s = covariance + meas_noise
    return np.linalg.solve(s.T, covariance.T).T


def kalman_update(est: TrackEstimate, measurement: np.ndarray, meas_noise: np.ndarray) -> TrackEstimate:
    """Measurement update with H = I and the Joseph-form covariance."""
    r = _check_pd(meas_noise, "measurement noise")
    z = np.asarray(measurement, dtype=float).reshape(2)
    k = kalman_gain(est.covariance, r)
    state = est.state + k @ (z - est.state)
    a = np.eye(2) - k
    p = a @ est.covariance @ a.T + k @ r @ k.T
    return TrackEstimate(state, 0.5 * (p + p.T))


def track_rmse(truth_series: np.ndarray, estimate_series: np.ndarray) -> float:
    """Root mean squared Euclidean error between state series."""
    truth = np.asarray(truth_series, dtype=float)
    est = np.asarray(estimate_series, dtype=float)
    if truth.shape != est.shape or truth.shape[0] == 0:
        raise InputError("series must be nonempty with equal shapes")
    err = (truth - est).reshape(truth.shape[0], -1)
    return float(np.sqrt(np.mean(np.sum(err * err, axis=1))))
