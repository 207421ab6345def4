"""Control-aware precoder design via expected Lyapunov drift.

The quadratic form ``L(e) = e' P e`` of the control deviation defines a
drift whose expectation over one slot decomposes into terms that are fixed
by the closed loop and noise statistics, plus terms linear in the
posterior estimation covariance. Only the posterior covariance depends on
the precoder, so minimizing the drift over the precoder reduces to
minimizing ``tr(N * sigma_post)`` with a fixed indefinite matrix ``N``;
bounding that by ``lam_max * tr(sigma_post)`` (largest eigenvalue of the
symmetrized ``N``) yields a water-filling solution in closed form:

* decompose the channel (SVD, singular values descending) and the prior
  covariance (symmetric eigendecomposition, eigenvalues descending),
* pair the i-th strongest channel mode with the i-th largest uncertainty
  direction,
* allocate ``y_i = [sqrt(lam_max * sz2 / mu) * pi_i - sz2 / lam_i]_+``
  against a per-mode floor that rises as the uncertainty shrinks, with the
  multiplier ``mu`` chosen by bisection so the power budget is met with
  equality.

The periodic baseline uses the channel-capacity water-filling allocation
on the same channel modes, ignoring the control state entirely.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numerics
from .channel import LinkConfig
from .control import ControllerConfig, ControllerGain
from .plant import SystemModel

EIGENVALUE_FLOOR = 1e-12
_RANK_RTOL = 1e-12


@dataclass(frozen=True)
class LyapunovConfig:
    """Weight of the deviation Lyapunov function and the trigger threshold."""

    p: np.ndarray
    l_max: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "p", np.asarray(self.p, dtype=float))
        if not np.allclose(self.p, self.p.T, atol=1e-12):
            raise ValueError("Lyapunov weight must be symmetric")
        if self.l_max < 0:
            raise ValueError("threshold must be nonnegative")


@dataclass(frozen=True)
class PrecoderDecision:
    """Per-slot outcome: precoder (zero when silent), transmit flag and
    diagnostics (expected Lyapunov value, expected drift under the decision,
    water-filling multiplier)."""

    f: np.ndarray
    gamma: int
    expected_l: float
    expected_drift: float
    mu: float


def drift_cost_matrix(
    model: SystemModel, ctrl: ControllerConfig, lyap: LyapunovConfig
) -> np.ndarray:
    """Symmetric matrix ``N`` such that the covariance-dependent part of the
    expected drift is ``tr(N * sigma_post)``."""
    p_sym = lyap.p + lyap.p.T
    ca = ctrl.c @ model.a
    return 0.5 * (ca.T @ p_sym @ ca - ctrl.c.T @ p_sym @ ctrl.c)


@dataclass(frozen=True)
class DriftTerms:
    """Episode-constant pieces of the expected one-slot drift.

    Bundles everything the per-slot drift evaluation needs so the loop only
    touches the deviation estimate and the covariance.
    """

    p: np.ndarray
    quad: np.ndarray  # (A-BK)' P (A-BK)
    cross: np.ndarray  # (A-BK)' (P+P') (A-I) s_offset
    const: float  # offset, plant-noise and input-covariance terms
    cov_gain: np.ndarray  # A'C'PCA
    cov_now: np.ndarray  # C'PC
    cost_matrix: np.ndarray
    lam_max: float


def drift_terms(
    leader: SystemModel,
    follower: SystemModel,
    gain: ControllerGain,
    ctrl: ControllerConfig,
    lyap: LyapunovConfig,
    q_u: np.ndarray,
) -> DriftTerms:
    """Precompute the constant drift terms for one episode."""
    a, b, c, p = leader.a, leader.b, ctrl.c, lyap.p
    a_cl = a - b @ gain.k
    drift_gap = (a - np.eye(leader.n)) @ ctrl.s_offset
    cov_gain = a.T @ c.T @ p @ c @ a
    cov_now = c.T @ p @ c
    cpcb = c @ b
    const = (
        float(drift_gap @ p @ drift_gap)
        + float(np.trace(p @ (follower.w + leader.w)))
        + float(np.trace(cpcb.T @ p @ cpcb @ np.asarray(q_u, dtype=float)))
    )
    cost = drift_cost_matrix(leader, ctrl, lyap)
    lam_max = float(np.linalg.eigvalsh(cost)[-1])
    return DriftTerms(
        p=p,
        quad=a_cl.T @ p @ a_cl,
        cross=a_cl.T @ (p + p.T) @ drift_gap,
        const=const,
        cov_gain=cov_gain,
        cov_now=cov_now,
        cost_matrix=cost,
        lam_max=lam_max,
    )


def expected_drift(
    terms: DriftTerms, e_hat: np.ndarray, sigma_post: np.ndarray
) -> float:
    """Expected one-slot change of the Lyapunov value, for a given deviation
    estimate and posterior covariance.

    The leader input is modeled as zero mean with the assumed covariance,
    independent of everything else; the estimation error is zero mean with
    covariance ``sigma_post``.
    """
    e = np.asarray(e_hat, dtype=float)
    return (
        float(e @ terms.quad @ e)
        + float(e @ terms.cross)
        + terms.const
        + float(np.sum(terms.cov_gain * sigma_post))
        - float(e @ terms.p @ e)
        - float(np.sum(terms.cov_now * sigma_post))
    )


def transmit_drift(
    terms: DriftTerms,
    e_hat: np.ndarray,
    sigma_prior: np.ndarray,
    sigma_post: np.ndarray,
) -> float:
    """Expected drift across a slot whose update happens mid-slot.

    The current deviation is still distributed under the prior covariance
    (the decision precedes the measurement), while the next one carries the
    posterior; with ``sigma_post = sigma_prior`` this reduces to
    :func:`expected_drift` of a silent slot. Always at most the silent
    drift, since the posterior never exceeds the prior.
    """
    e = np.asarray(e_hat, dtype=float)
    return (
        float(e @ terms.quad @ e)
        + float(e @ terms.cross)
        + terms.const
        + float(np.sum(terms.cov_gain * sigma_post))
        - float(e @ terms.p @ e)
        - float(np.sum(terms.cov_now * sigma_prior))
    )


def posterior_cov(
    sigma_prior: np.ndarray, h: np.ndarray, f: np.ndarray, sigma_z: float
) -> np.ndarray:
    """Posterior covariance after one observation through ``H F`` with noise
    variance ``sigma_z**2``, in information form:

        sigma_post = (sigma_prior^-1 + F^H H^H H F / sigma_z^2)^-1

    Near-singular priors are regularized by flooring their eigenvalues at
    ``EIGENVALUE_FLOOR``. The result is the real part of the Hermitian
    posterior (the trace and all quadratic forms with real vectors are
    unaffected).
    """
    if sigma_z <= 0:
        raise ValueError("noise standard deviation must be positive")
    eig = numerics.eigh_sorted(sigma_prior)
    values = np.maximum(eig.values, EIGENVALUE_FLOOR)
    prior_inv = (eig.basis / values) @ eig.basis.T
    t = np.asarray(h) @ np.asarray(f)
    info = prior_inv.astype(complex) + t.conj().T @ t / (sigma_z**2)
    post = np.linalg.inv(info)
    post = 0.5 * (post + post.conj().T)
    return 0.5 * (post.real + post.real.T)


def lyapunov_precoder(
    sigma_prior: np.ndarray,
    h: np.ndarray,
    lam_max: float,
    link: LinkConfig,
) -> tuple[np.ndarray, float]:
    """Drift-minimizing precoder and its water-filling multiplier.

    Returns a zero precoder with ``mu = 0`` when transmission cannot reduce
    the drift bound: nonpositive ``lam_max``, a zero channel, or a prior
    covariance with no usable uncertainty above the regularization floor.
    Otherwise the returned precoder meets the power budget with equality to
    the water-filling tolerance.
    """
    n = np.asarray(sigma_prior).shape[0]
    f_zero = np.zeros((link.n_leader, n), dtype=complex)
    if lam_max <= 0:
        return f_zero, 0.0
    svd = numerics.svd_sorted(h)
    eig = numerics.eigh_sorted(sigma_prior)
    rank = min(link.n_leader, link.n_follower, n)
    if svd.singulars[0] <= 0:
        return f_zero, 0.0
    usable_channel = int(np.sum(svd.singulars[:rank] > _RANK_RTOL * svd.singulars[0]))
    usable_prior = int(np.sum(eig.values[:rank] > EIGENVALUE_FLOOR))
    modes = min(rank, usable_channel, usable_prior)
    if modes == 0:
        return f_zero, 0.0

    pi = svd.singulars[:modes]
    lam = eig.values[:modes]
    sz2 = link.sigma_z**2
    floor = sz2 / lam

    def allocate(mu: float) -> np.ndarray:
        level = np.sqrt(lam_max * sz2 / mu)
        return np.maximum(level * pi - floor, 0.0) / pi**2

    mu = numerics.waterfill(allocate, link.power_budget)
    mode_power = allocate(mu)
    scale = np.sqrt(mode_power)
    f = (svd.right[:, :modes] * scale) @ eig.basis[:, :modes].T
    return f.astype(complex), mu


def capacity_precoder(h: np.ndarray, link: LinkConfig, n_state: int) -> np.ndarray:
    """Capacity water-filling precoder for the periodic baseline.

    Pours the power budget over the channel's singular-value modes against
    the capacity floors ``sigma_z**2 / pi_i**2`` and drives the right
    singular vectors with the resulting per-mode powers
    ``g_i = (w - sigma_z**2 / pi_i**2)_+``, so that ``F = V diag(sqrt(g))``
    (padded to the state dimension) meets the budget
    ``tr(F^H F) = sum(g)`` exactly. Ignores the estimation state entirely.
    """
    svd = numerics.svd_sorted(h)
    rank = min(link.n_leader, link.n_follower, n_state)
    if svd.singulars[0] <= 0:
        raise ValueError("channel matrix is zero")
    modes = int(np.sum(svd.singulars[:rank] > _RANK_RTOL * svd.singulars[0]))
    pi = svd.singulars[:modes]
    floors = link.sigma_z**2 / pi**2

    def allocate(level: float) -> np.ndarray:
        return np.maximum(level - floors, 0.0)

    level = numerics.waterfill(allocate, link.power_budget)
    mode_power = allocate(level)
    f = np.zeros((link.n_leader, n_state), dtype=complex)
    f[:, :modes] = svd.right[:, :modes] * np.sqrt(mode_power)
    return f
