"""Event-triggering policy for requesting a state update.

Two conditions gate a transmission. First, the expected Lyapunov value of
the deviation must exceed the threshold; below it the system is considered
healthy and stays silent. Second, transmitting must actually matter: under
the default two-sided rule the expected drift without communication must
be nonnegative (the loop is not already contracting on its own) and the
expected drift of a transmitting slot must be nonpositive (communication
reverses the rise). The alternative rule checks only the latter. The
transmitting-slot drift conditions the current deviation on the prior
covariance and the next one on the posterior, so it never exceeds the
silent drift and the two conditions are not redundant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import LinkConfig
from .control import ControllerConfig
from .precoding import (
    DriftTerms,
    LyapunovConfig,
    PrecoderDecision,
    expected_drift,
    lyapunov_precoder,
    posterior_cov,
    transmit_drift,
)

RULES = ("two_sided", "transmit_drift_only")


@dataclass(frozen=True)
class TriggerDecision:
    """Outcome of the policy with its diagnostic drift values.

    ``drift_transmit`` is NaN when the policy short-circuited before the
    optimal precoder was evaluated.
    """

    fire: int
    expected_l: float
    drift_silent: float
    drift_transmit: float


def expected_lyapunov(
    e_hat: np.ndarray,
    sigma: np.ndarray,
    lyap: LyapunovConfig,
    ctrl: ControllerConfig,
) -> float:
    """Expected Lyapunov value of the true deviation given the estimate and
    the (a-priori) estimation covariance."""
    e = np.asarray(e_hat, dtype=float)
    cpc = ctrl.c.T @ lyap.p @ ctrl.c
    return float(e @ lyap.p @ e) + float(np.sum(cpc * sigma))


def decide(
    e_hat: np.ndarray,
    sigma_prior: np.ndarray,
    h: np.ndarray,
    terms: DriftTerms,
    link: LinkConfig,
    lyap: LyapunovConfig,
    rule: str = "two_sided",
) -> tuple[TriggerDecision, PrecoderDecision]:
    """Evaluate the triggering policy for one slot.

    Pure function of its inputs; expects the a-priori covariance (the
    decision precedes any update this slot).
    """
    if rule not in RULES:
        raise ValueError(f"unknown trigger rule {rule!r}")
    e = np.asarray(e_hat, dtype=float)
    expected_l = float(e @ terms.p @ e) + float(np.sum(terms.cov_now * sigma_prior))
    drift_silent = expected_drift(terms, e, sigma_prior)
    n = sigma_prior.shape[0]

    def silent(drift_transmit: float = math.nan) -> tuple[TriggerDecision, PrecoderDecision]:
        decision = TriggerDecision(0, expected_l, drift_silent, drift_transmit)
        precoder = PrecoderDecision(
            f=np.zeros((link.n_leader, n), dtype=complex),
            gamma=0,
            expected_l=expected_l,
            expected_drift=drift_silent,
            mu=0.0,
        )
        return decision, precoder

    if expected_l <= lyap.l_max:
        return silent()
    if rule == "two_sided" and drift_silent < 0:
        return silent()
    f, mu = lyapunov_precoder(sigma_prior, h, terms.lam_max, link)
    if not np.any(f):
        return silent()
    sigma_post = posterior_cov(sigma_prior, h, f, link.sigma_z)
    drift_transmit = transmit_drift(terms, e, sigma_prior, sigma_post)
    if drift_transmit > 0:
        return silent(drift_transmit)
    decision = TriggerDecision(1, expected_l, drift_silent, drift_transmit)
    precoder = PrecoderDecision(
        f=f, gamma=1, expected_l=expected_l, expected_drift=drift_transmit, mu=mu
    )
    return decision, precoder
