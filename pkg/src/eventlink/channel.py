"""Block-fading MIMO link between leader and follower.

The channel is redrawn i.i.d. each slot (constant within a slot), with
unit-variance circularly-symmetric complex Gaussian entries. Transmission
sends the precoded real state vector through the channel and adds complex
Gaussian noise of total variance ``sigma_z**2`` per receive antenna.

SNR convention: the configured SNR is ``p_max / sigma_z**2`` with the
power budget ``p_max / q_bound`` fixed at 1, so sweeping the SNR sweeps
the noise variance only. With an isotropic precoder using the full budget
and a transmitted vector of squared norm ``q_bound``, the expected total
received signal power equals ``p_max``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PowerBudgetError

POWER_TOL = 1e-9


@dataclass(frozen=True)
class LinkConfig:
    """Antenna counts, noise level and power bookkeeping of the link."""

    n_leader: int
    n_follower: int
    sigma_z: float
    p_max: float
    q_bound: float

    def __post_init__(self) -> None:
        if self.n_leader <= 0 or self.n_follower <= 0:
            raise ValueError("antenna counts must be positive")
        if self.sigma_z <= 0 or self.p_max <= 0 or self.q_bound <= 0:
            raise ValueError("sigma_z, p_max and q_bound must be positive")

    @property
    def power_budget(self) -> float:
        """Precoder power budget ``tr(F^H F) <= p_max / q_bound``."""
        return self.p_max / self.q_bound


def sample_channel(link: LinkConfig, rng: np.random.Generator) -> np.ndarray:
    """Fresh i.i.d. CN(0, 1) channel matrix for one slot."""
    shape = (link.n_follower, link.n_leader)
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def transmit(
    link: LinkConfig,
    h: np.ndarray,
    f: np.ndarray,
    x: np.ndarray,
    rng: np.random.Generator,
) -> np.ndarray:
    """Received signal ``y = H F x + z`` with ``z ~ CN(0, sigma_z^2 I)``.

    The precoder power is asserted against the budget; a violation is a bug
    in the caller and raises loudly.
    """
    f = np.asarray(f)
    power = float(np.real(np.trace(f.conj().T @ f)))
    if power > link.power_budget + POWER_TOL:
        raise PowerBudgetError(
            f"precoder power {power:.12g} exceeds budget {link.power_budget:.12g}"
        )
    n_rx = link.n_follower
    noise = (
        link.sigma_z
        * (rng.standard_normal(n_rx) + 1j * rng.standard_normal(n_rx))
        / np.sqrt(2.0)
    )
    return np.asarray(h) @ (f @ np.asarray(x, dtype=float)) + noise
