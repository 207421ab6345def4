"""Episode orchestration, Monte Carlo ensembles, sweeps and CSV export.

Per-slot sequence: sample the channel, run the filter prediction, form
the leader's input and its shifted (nominal-subtracted) state, evaluate
the trigger (event scheme) or the periodic schedule (baseline), transmit
and update the filter if firing, then apply the follower feedback and
step both plants. All randomness flows through per-realization generators
derived from the master seed, so every result is reproducible and
independent of execution order.

Seed derivation: realization ``r`` uses
``master_seed XOR sha256(str(r))[:8]``; the per-purpose streams (plant
noise, channel, receiver noise, initial conditions) are spawned from that
value. Stable across versions.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import channel, control, estimation, plant, precoding, trigger
from .config import SimConfig
from .errors import NumericalError

log = logging.getLogger(__name__)

TRACE_COLUMNS = (
    ["slot"]
    + [f"x_L[{i}]" for i in range(8)]
    + [f"x_F[{i}]" for i in range(8)]
    + [f"xhat[{i}]" for i in range(8)]
    + ["e_P_e", "u_norm2", "gamma", "tr_sigma", "expected_L", "drift_silent", "tx_power"]
)

SWEEP_COLUMNS = [
    "axis",
    "value",
    "scheme",
    "period",
    "realizations",
    "mean_ePe",
    "se_ePe",
    "mean_u2",
    "se_u2",
    "mean_interval",
    "se_interval",
    "mean_transmissions",
]


def realization_seed(master_seed: int, index: int) -> int:
    """Per-realization seed: master XOR the first 8 bytes of sha256(index)."""
    digest = hashlib.sha256(str(index).encode("ascii")).digest()
    return (master_seed ^ int.from_bytes(digest[:8], "big")) & (2**63 - 1)


@dataclass(frozen=True)
class SimSetup:
    """Episode-constant objects derived from a config."""

    leader: plant.SystemModel
    follower: plant.SystemModel
    ctrl: control.ControllerConfig
    gain: control.ControllerGain
    leader_gain: control.ControllerGain
    lyap: precoding.LyapunovConfig
    link: channel.LinkConfig
    scenario: plant.TrajectoryScenario
    terms: precoding.DriftTerms
    q_u: np.ndarray


def build_setup(cfg: SimConfig) -> SimSetup:
    """Build models, gains and drift terms once per study."""
    n = len(cfg.c_diag)
    leader = plant.build_uav_model(cfg.ts, cfg.gravity, cfg.w_leader * np.eye(n))
    follower = plant.build_uav_model(cfg.ts, cfg.gravity, cfg.w_follower * np.eye(n))
    ctrl = cfg.controller()
    gain = control.lqr_gain(follower, ctrl)
    leader_ctrl = replace(ctrl, c=np.eye(n), s_offset=np.zeros(n))
    leader_gain = control.lqr_gain(leader, leader_ctrl)
    lyap = cfg.lyapunov()
    link = cfg.link()
    q_u = cfg.q_u * np.eye(leader.m)
    terms = precoding.drift_terms(leader, follower, gain, ctrl, lyap, q_u)
    return SimSetup(
        leader=leader,
        follower=follower,
        ctrl=ctrl,
        gain=gain,
        leader_gain=leader_gain,
        lyap=lyap,
        link=link,
        scenario=cfg.scenario,
        terms=terms,
        q_u=q_u,
    )


@dataclass
class EpisodeTrace:
    """Per-slot record of one episode; column layout in TRACE_COLUMNS."""

    x_leader: np.ndarray
    x_follower: np.ndarray
    x_hat: np.ndarray
    e_p_e: np.ndarray
    u_norm2: np.ndarray
    gamma: np.ndarray
    tr_sigma: np.ndarray
    expected_l: np.ndarray
    drift_silent: np.ndarray
    tx_power: np.ndarray

    def __len__(self) -> int:
        return len(self.e_p_e)

    def rows(self):
        for k in range(len(self)):
            yield (
                [k]
                + list(self.x_leader[k])
                + list(self.x_follower[k])
                + list(self.x_hat[k])
                + [
                    self.e_p_e[k],
                    self.u_norm2[k],
                    int(self.gamma[k]),
                    self.tr_sigma[k],
                    self.expected_l[k],
                    self.drift_silent[k],
                    self.tx_power[k],
                ]
            )


@dataclass(frozen=True)
class EpisodeMetrics:
    """Windowed (post-warmup) metrics of one episode."""

    mean_e_p_e: float
    mean_u2: float
    mean_interval: float
    transmissions: int


@dataclass(frozen=True)
class MetricsSummary:
    """Ensemble means with standard errors."""

    mean_e_p_e: float
    se_e_p_e: float
    mean_u2: float
    se_u2: float
    mean_interval: float
    se_interval: float
    mean_transmissions: float
    realizations: int
    period: int | None = None


def episode_metrics(trace: EpisodeTrace, warmup: int) -> EpisodeMetrics:
    """Metrics over the post-warmup window.

    The transmission interval is the mean gap between transmission slots;
    with fewer than two transmissions in the window it falls back to the
    window length.
    """
    window = slice(warmup, len(trace))
    tx_slots = np.flatnonzero(trace.gamma[window])
    if len(tx_slots) >= 2:
        interval = float(np.mean(np.diff(tx_slots)))
    else:
        interval = float(len(trace) - warmup)
    return EpisodeMetrics(
        mean_e_p_e=float(np.mean(trace.e_p_e[window])),
        mean_u2=float(np.mean(trace.u_norm2[window])),
        mean_interval=interval,
        transmissions=int(np.sum(trace.gamma[window])),
    )


def run_episode(
    cfg: SimConfig,
    seed: int,
    *,
    setup: SimSetup | None = None,
    scheme: str | None = None,
    period: int | None = None,
) -> EpisodeTrace:
    """Simulate one episode; bit-reproducible for a fixed seed.

    ``scheme`` defaults to the config; the periodic scheme transmits every
    ``period`` slots (defaulting to the config's baseline period) using the
    capacity water-filling precoder.
    """
    setup = setup or build_setup(cfg)
    scheme = scheme or cfg.scheme
    if scheme == "periodic" and period is None:
        period = cfg.baseline_period
    streams = np.random.SeedSequence(seed).spawn(4)
    rng_plant = np.random.default_rng(streams[0])
    rng_channel = np.random.default_rng(streams[1])
    rng_noise = np.random.default_rng(streams[2])
    rng_init = np.random.default_rng(streams[3])

    n = setup.leader.n
    steps = cfg.episode_length
    ctrl, gain, link, lyap = setup.ctrl, setup.gain, setup.link, setup.lyap
    c_diag_p = np.diag(lyap.p)

    x_l = np.zeros(n)
    x_f = ctrl.s_offset.copy()
    pos_idx = (0, 4)
    for i in pos_idx:
        x_f[i] += cfg.init_pos_std * rng_init.standard_normal()
    est = estimation.EstimatorState(
        x_hat=np.zeros(n), sigma=cfg.sigma0 * np.eye(n), q_u=setup.q_u
    )

    trace = EpisodeTrace(
        x_leader=np.zeros((steps, n)),
        x_follower=np.zeros((steps, n)),
        x_hat=np.zeros((steps, n)),
        e_p_e=np.zeros(steps),
        u_norm2=np.zeros(steps),
        gamma=np.zeros(steps, dtype=int),
        tr_sigma=np.zeros(steps),
        expected_l=np.zeros(steps),
        drift_silent=np.zeros(steps),
        tx_power=np.zeros(steps),
    )

    for k in range(steps):
        h = channel.sample_channel(link, rng_channel)
        est = estimation.predict(est, setup.leader)
        u_l = plant.leader_input(setup.scenario, setup.leader, setup.leader_gain.k, k, x_l)
        nominal = plant.nominal_state(setup.scenario, cfg.ts, k)
        x_shift = x_l - nominal
        e_hat_prior = control.estimated_deviation(x_f, est.x_hat + nominal, ctrl)

        decision, precoder = trigger.decide(
            e_hat_prior, est.sigma, h, setup.terms, link, lyap, cfg.trigger_rule
        )
        if scheme == "event":
            gamma, f = precoder.gamma, precoder.f
        elif scheme == "periodic":
            gamma = 1 if k % period == 0 else 0
            f = precoding.capacity_precoder(h, link, n) if gamma else None
        else:
            raise ValueError(f"unknown scheme {scheme!r}")

        if gamma:
            shift_norm2 = float(x_shift @ x_shift)
            if shift_norm2 > link.q_bound:
                log.warning(
                    "transmitted state norm^2 %.3f exceeds bound %.3f at slot %d",
                    shift_norm2,
                    link.q_bound,
                    k,
                )
            y = channel.transmit(link, h, f, x_shift, rng_noise)
            est = estimation.update(est, 1, h, f, y, link.sigma_z)

        x_hat_full = est.x_hat + nominal
        e_hat = control.estimated_deviation(x_f, x_hat_full, ctrl)
        u_f = control.follower_input(e_hat, gain)
        e_true = control.deviation(x_f, x_l, ctrl)

        trace.x_leader[k] = x_l
        trace.x_follower[k] = x_f
        trace.x_hat[k] = x_hat_full
        trace.e_p_e[k] = float(e_true @ (c_diag_p * e_true))
        trace.u_norm2[k] = float(u_f @ u_f)
        trace.gamma[k] = gamma
        trace.tr_sigma[k] = float(np.trace(est.sigma))
        trace.expected_l[k] = decision.expected_l
        trace.drift_silent[k] = decision.drift_silent
        if gamma:
            trace.tx_power[k] = float(np.real(np.sum(f.conj() * f)))

        if not (
            np.all(np.isfinite(x_l))
            and np.all(np.isfinite(x_f))
            and np.all(np.isfinite(est.x_hat))
            and np.all(np.isfinite(u_f))
        ):
            raise NumericalError(f"non-finite state detected at slot {k}")

        x_l = plant.step(setup.leader, x_l, u_l, rng_plant)
        x_f = plant.step(setup.follower, x_f, u_f, rng_plant)

    return trace


def _summarize(per_episode: list[EpisodeMetrics], period: int | None) -> MetricsSummary:
    def mean_se(values: np.ndarray) -> tuple[float, float]:
        mean = float(np.mean(values))
        se = float(np.std(values, ddof=1) / np.sqrt(len(values))) if len(values) > 1 else 0.0
        return mean, se

    epe = np.array([m.mean_e_p_e for m in per_episode])
    u2 = np.array([m.mean_u2 for m in per_episode])
    ivl = np.array([m.mean_interval for m in per_episode])
    mean_epe, se_epe = mean_se(epe)
    mean_u2, se_u2 = mean_se(u2)
    mean_ivl, se_ivl = mean_se(ivl)
    return MetricsSummary(
        mean_e_p_e=mean_epe,
        se_e_p_e=se_epe,
        mean_u2=mean_u2,
        se_u2=se_u2,
        mean_interval=mean_ivl,
        se_interval=se_ivl,
        mean_transmissions=float(np.mean([m.transmissions for m in per_episode])),
        realizations=len(per_episode),
        period=period,
    )


def run_ensemble(
    cfg: SimConfig,
    *,
    scheme: str | None = None,
    period: int | None = None,
    setup: SimSetup | None = None,
    realizations: int | None = None,
) -> tuple[MetricsSummary, list[EpisodeMetrics]]:
    """Average metrics over independently seeded realizations."""
    setup = setup or build_setup(cfg)
    n_real = realizations or cfg.realizations
    per_episode = []
    for r in range(n_real):
        seed = realization_seed(cfg.seed, r)
        try:
            t = run_episode(cfg, seed, setup=setup, scheme=scheme, period=period)
        except NumericalError as exc:
            raise NumericalError(f"realization {r}: {exc}") from exc
        per_episode.append(episode_metrics(t, cfg.warmup))
    resolved_period = period if (scheme or cfg.scheme) == "periodic" else None
    return _summarize(per_episode, resolved_period), per_episode


def match_period(mean_interval: float) -> int:
    """Baseline period matched to an average interval: nearest integer, >= 1."""
    return max(1, int(math.floor(mean_interval + 0.5)))


def run_matched_baseline(
    cfg: SimConfig,
    event_summary: MetricsSummary,
    *,
    setup: SimSetup | None = None,
) -> MetricsSummary:
    """Periodic baseline with the period matched to the event scheme's
    average transmission interval."""
    period = match_period(event_summary.mean_interval)
    summary, _ = run_ensemble(cfg, scheme="periodic", period=period, setup=setup)
    return summary


@dataclass(frozen=True)
class SweepRow:
    """One (axis value, scheme) cell of a sweep table."""

    axis: str
    value: float
    scheme: str
    summary: MetricsSummary


def sweep(cfg: SimConfig, axis: str, values) -> list[SweepRow]:
    """Run the event scheme and its interval-matched baseline per value.

    ``axis`` is ``"snr"`` (value = SNR in dB) or ``"threshold"`` (value =
    Lyapunov threshold).
    """
    if axis not in ("snr", "threshold"):
        raise ValueError("axis must be 'snr' or 'threshold'")
    values = list(values)
    if not values:
        raise ValueError("sweep needs at least one value")
    rows: list[SweepRow] = []
    for value in values:
        if axis == "snr":
            cfg_v = replace(cfg, snr_db=float(value))
        else:
            cfg_v = replace(cfg, l_max=float(value))
        setup = build_setup(cfg_v)
        event_summary, _ = run_ensemble(cfg_v, scheme="event", setup=setup)
        baseline_summary = run_matched_baseline(cfg_v, event_summary, setup=setup)
        rows.append(SweepRow(axis, float(value), "event", event_summary))
        rows.append(SweepRow(axis, float(value), "periodic", baseline_summary))
    return rows


# -- file output ------------------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_trace_csv(trace: EpisodeTrace, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_COLUMNS)
        for row in trace.rows():
            writer.writerow([_fmt(v) for v in row])


def write_sweep_csv(rows: list[SweepRow], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(SWEEP_COLUMNS)
        for row in rows:
            s = row.summary
            writer.writerow(
                [
                    row.axis,
                    _fmt(row.value),
                    row.scheme,
                    "" if s.period is None else s.period,
                    s.realizations,
                    _fmt(s.mean_e_p_e),
                    _fmt(s.se_e_p_e),
                    _fmt(s.mean_u2),
                    _fmt(s.se_u2),
                    _fmt(s.mean_interval),
                    _fmt(s.se_interval),
                    _fmt(s.mean_transmissions),
                ]
            )


def write_sidecar(cfg: SimConfig, path: str | Path, **extra) -> None:
    """JSON sidecar with the fully resolved config and version string."""
    from . import __version__

    payload = {"version": __version__, "config": cfg.to_dict()}
    payload.update(extra)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
