"""Formation controller: LQR gain synthesis and the deviation feedback law.

The follower holds a constant offset to the leader: its control deviation
is ``e = x_F - C x_L - s_offset`` where the diagonal 0/1 matrix ``C``
selects which leader coordinates the follower adapts to. The follower
applies the proportional law ``u_F = -K e_hat`` with a time-invariant LQR
gain.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numerics
from .errors import ConvergenceError
from .plant import SystemModel


@dataclass(frozen=True)
class ControllerConfig:
    """LQR weights, coordinate selection and desired offset."""

    q: np.ndarray
    r: np.ndarray
    c: np.ndarray
    s_offset: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "q", np.asarray(self.q, dtype=float))
        object.__setattr__(self, "r", np.asarray(self.r, dtype=float))
        object.__setattr__(self, "c", np.asarray(self.c, dtype=float))
        object.__setattr__(self, "s_offset", np.asarray(self.s_offset, dtype=float))
        diag = np.diag(np.diag(self.c))
        if not np.array_equal(self.c, diag):
            raise ValueError("selection matrix must be diagonal")
        if not np.all(np.isin(np.diag(self.c), (0.0, 1.0))):
            raise ValueError("selection matrix entries must be 0 or 1")
        if not np.allclose(self.q, self.q.T, atol=1e-12):
            raise ValueError("Q must be symmetric")
        if not np.allclose(self.r, self.r.T, atol=1e-12):
            raise ValueError("R must be symmetric")


@dataclass(frozen=True)
class ControllerGain:
    """Feedback gain with the closed-loop spectral radius it achieves."""

    k: np.ndarray
    spectral_radius: float


def lqr_gain(model: SystemModel, cfg: ControllerConfig) -> ControllerGain:
    """Synthesize ``K = (B'SB + R)^-1 B'SA`` from the Riccati solution.

    Raises when the Riccati solve fails or the closed loop is not strictly
    stable.
    """
    s = numerics.solve_dare(model.a, model.b, cfg.q, cfg.r)
    bs = model.b.T @ s
    k = np.linalg.solve(bs @ model.b + cfg.r, bs @ model.a)
    radius = float(np.max(np.abs(np.linalg.eigvals(model.a - model.b @ k))))
    if radius >= 1.0:
        raise ConvergenceError(f"closed loop is unstable (spectral radius {radius:.6g})")
    return ControllerGain(k=k, spectral_radius=radius)


def deviation(x_f: np.ndarray, x_l: np.ndarray, cfg: ControllerConfig) -> np.ndarray:
    """True control deviation ``x_F - C x_L - s_offset``."""
    return np.asarray(x_f, dtype=float) - cfg.c @ np.asarray(x_l, dtype=float) - cfg.s_offset


def estimated_deviation(
    x_f: np.ndarray, x_hat_l: np.ndarray, cfg: ControllerConfig
) -> np.ndarray:
    """Deviation as seen by the follower, using its leader-state estimate."""
    return (
        np.asarray(x_f, dtype=float)
        - cfg.c @ np.asarray(x_hat_l, dtype=float)
        - cfg.s_offset
    )


def follower_input(e_hat: np.ndarray, gain: ControllerGain) -> np.ndarray:
    """Proportional formation input ``-K e_hat``."""
    return -gain.k @ np.asarray(e_hat, dtype=float)


def error_dynamics_step(
    e_hat: np.ndarray,
    x_hat_l: np.ndarray,
    x_l: np.ndarray,
    u_l: np.ndarray,
    w_f: np.ndarray,
    w_l: np.ndarray,
    model: SystemModel,
    gain: ControllerGain,
    cfg: ControllerConfig,
) -> np.ndarray:
    """One step of the deviation recursion, by exact substitution of the
    plant updates and the feedback law into the deviation definition:

        e' = (A - BK) e_hat + A C x_hat_L - C A x_L + (A - I) s_offset
             - C B u_L + w_F - C w_L

    Matches the directly simulated deviation to roundoff; used as the
    regression oracle for the closed loop.
    """
    a, b, c = model.a, model.b, cfg.c
    a_cl = a - b @ gain.k
    return (
        a_cl @ np.asarray(e_hat, dtype=float)
        + a @ (c @ np.asarray(x_hat_l, dtype=float))
        - c @ (a @ np.asarray(x_l, dtype=float))
        + (a - np.eye(model.n)) @ cfg.s_offset
        - c @ (b @ np.asarray(u_l, dtype=float))
        + np.asarray(w_f, dtype=float)
        - c @ np.asarray(w_l, dtype=float)
    )
