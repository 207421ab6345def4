"""Kalman filter with intermittent observations at the follower.

The follower tracks the leader's (shifted) state from measurements that
arrive only when a transmission happens, gated by the binary indicator
``gamma``. The prediction covers the leader's unknown input through an
assumed input covariance. Measurements pass through the complex channel,
so the update runs in complex arithmetic; the state estimate and the
covariance are mapped back to the reals afterwards.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import NumericalError
from .plant import SystemModel

_IMAG_TOL = 1e-8


@dataclass(frozen=True)
class EstimatorState:
    """Estimate ``x_hat``, error covariance ``sigma`` and the assumed
    covariance of the tracked agent's input."""

    x_hat: np.ndarray
    sigma: np.ndarray
    q_u: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "x_hat", np.asarray(self.x_hat, dtype=float))
        object.__setattr__(self, "sigma", np.asarray(self.sigma, dtype=float))
        object.__setattr__(self, "q_u", np.asarray(self.q_u, dtype=float))
        skew = np.linalg.norm(self.sigma - self.sigma.T)
        if skew > 1e-10 * max(1.0, np.linalg.norm(self.sigma)):
            raise ValueError("covariance must be symmetric")


def predict(est: EstimatorState, model: SystemModel) -> EstimatorState:
    """Time update: ``x' = A x_hat``, ``S' = A S A' + W + B Q_u B'``."""
    x_hat = model.a @ est.x_hat
    sigma = model.a @ est.sigma @ model.a.T + model.w + model.b @ est.q_u @ model.b.T
    sigma = 0.5 * (sigma + sigma.T)
    return replace(est, x_hat=x_hat, sigma=sigma)


def update(
    est: EstimatorState,
    gamma: int,
    h: np.ndarray,
    f: np.ndarray,
    y: np.ndarray,
    sigma_z: float,
) -> EstimatorState:
    """Measurement update gated by ``gamma``.

    For ``gamma = 0`` the state passes through unchanged. For ``gamma = 1``
    the optimal gain against the effective map ``H F`` and noise variance
    ``sigma_z**2`` per receive antenna is applied. The update runs in
    complex arithmetic; the estimate is the real part afterwards, and the
    covariance is Hermitian-symmetrized and checked to be real up to
    numerical noise (the product structure of the precoders used here keeps
    it real).
    """
    if gamma not in (0, 1):
        raise ValueError("gamma must be 0 or 1")
    if gamma == 0:
        return est
    if sigma_z <= 0:
        raise ValueError("noise standard deviation must be positive")
    t = np.asarray(h) @ np.asarray(f)
    n_rx = t.shape[0]
    sigma = est.sigma.astype(complex)
    innovation_cov = t @ sigma @ t.conj().T + (sigma_z**2) * np.eye(n_rx)
    gain = np.linalg.solve(innovation_cov, t @ sigma).conj().T
    x_new = est.x_hat.astype(complex) + gain @ (np.asarray(y) - t @ est.x_hat)
    sigma_new = (np.eye(est.sigma.shape[0], dtype=complex) - gain @ t) @ sigma
    sigma_new = 0.5 * (sigma_new + sigma_new.conj().T)
    imag_peak = float(np.max(np.abs(sigma_new.imag))) if sigma_new.size else 0.0
    scale = max(1.0, float(np.linalg.norm(est.sigma)))
    if imag_peak > _IMAG_TOL * scale:
        raise NumericalError(
            f"covariance update left an imaginary residue of {imag_peak:.3g}; "
            "the precoder structure should keep the covariance real"
        )
    sigma_real = 0.5 * (sigma_new.real + sigma_new.real.T)
    return replace(est, x_hat=x_new.real, sigma=sigma_real)
