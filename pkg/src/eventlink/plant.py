"""Discrete-time agent dynamics and the leader's trajectory scenario.

Both agents share the same linearized planar-quadrotor model: state
``[s_x, vx, theta, dtheta, s_y, vy, phi, dphi]`` (positions in meters,
velocities in m/s, Euler angles in rad), two abstract inputs, one per
horizontal axis. The continuous-time model is block-diagonal with two
identical 4x4 chains ``input -> angular accel -> angle -> accel -> speed
-> position`` and is discretized exactly (the chain is nilpotent).

The leader flies a pre-agreed straight path at cruise speed, with an
unannounced lateral excursion ("obstacle avoidance") partway through; the
excursion is the part the follower cannot predict. ``nominal_state`` is
the pre-agreed part of that reference, which both agents use to shift the
transmitted state so its norm stays small.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import numerics


@dataclass
class SystemModel:
    """Discrete-time model ``x' = A x + B u + w`` with ``w ~ N(0, W)``."""

    a: np.ndarray
    b: np.ndarray
    w: np.ndarray
    ts: float | None = None
    _noise_factor: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self.a = np.asarray(self.a, dtype=float)
        self.b = np.asarray(self.b, dtype=float)
        self.w = np.asarray(self.w, dtype=float)
        n = self.a.shape[0]
        if self.a.shape != (n, n) or self.b.shape[0] != n or self.w.shape != (n, n):
            raise ValueError("inconsistent model dimensions")
        if not np.allclose(self.w, self.w.T, atol=1e-12):
            raise ValueError("plant-noise covariance must be symmetric")
        eig = numerics.eigh_sorted(self.w)
        self._noise_factor = eig.basis * np.sqrt(eig.values)

    @property
    def n(self) -> int:
        return self.a.shape[0]

    @property
    def m(self) -> int:
        return self.b.shape[1]

    def sample_noise(self, rng: np.random.Generator) -> np.ndarray:
        return self._noise_factor @ rng.standard_normal(self.n)


def planar_quadrotor_blocks(gravity: float) -> tuple[np.ndarray, np.ndarray]:
    """Continuous-time (A, B) blocks of the linearized planar quadrotor."""
    chain = np.array(
        [
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, gravity, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [0.0, 0.0, 0.0, 0.0],
        ]
    )
    a = np.zeros((8, 8))
    a[:4, :4] = chain
    a[4:, 4:] = chain
    b = np.zeros((8, 2))
    b[3, 0] = 1.0
    b[7, 1] = 1.0
    return a, b


def build_uav_model(ts: float, gravity: float, w: np.ndarray) -> SystemModel:
    """Discretized 8-state / 2-input UAV model with noise covariance ``w``."""
    a_cont, b_cont = planar_quadrotor_blocks(gravity)
    a, b = numerics.discretize(a_cont, b_cont, ts)
    return SystemModel(a=a, b=b, w=np.asarray(w, dtype=float), ts=ts)


def step(
    model: SystemModel, x: np.ndarray, u: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    """One plant step ``A x + B u + w``; deterministic under a fixed rng."""
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    if x.shape != (model.n,) or u.shape != (model.m,):
        raise ValueError("state/input dimensions do not match the model")
    return model.a @ x + model.b @ u + model.sample_noise(rng)


@dataclass
class TrajectoryScenario:
    """Leader flight profile: ramp up to cruise speed along s_x, then a
    single smooth lateral excursion toward the follower and back.

    Durations are in slots; the excursion is a raised-cosine bump of
    ``maneuver_amplitude`` meters in s_y. ``input_cap`` bounds the norm of
    the leader's feedback input.
    """

    accel_duration: int = 50
    cruise_speed: float = 1.0
    maneuver_start: int = 200
    maneuver_amplitude: float = 1.5
    maneuver_duration: int = 150
    input_cap: float = 2.0

    def __post_init__(self) -> None:
        if self.accel_duration < 0 or self.maneuver_duration < 0:
            raise ValueError("durations must be nonnegative")
        if self.maneuver_start < self.accel_duration:
            raise ValueError("maneuver must start after the acceleration phase")
        if self.input_cap <= 0:
            raise ValueError("input cap must be positive")


def _ramp_speed(scenario: TrajectoryScenario, k: int) -> float:
    if scenario.accel_duration <= 0:
        return scenario.cruise_speed
    frac = min((k + 1) / scenario.accel_duration, 1.0)
    return scenario.cruise_speed * frac


def _ramp_position(scenario: TrajectoryScenario, ts: float, k: int) -> float:
    # left-Riemann integral of the ramp speed, so that the position
    # component of the profile is an exact trajectory of the discrete model
    ka = scenario.accel_duration
    v = scenario.cruise_speed
    if ka <= 0:
        return ts * v * k
    j = min(k, ka)
    pos = ts * v * (j * (j + 1) / 2.0) / ka
    if k > ka:
        pos += ts * v * (k - ka)
    return pos


def nominal_state(scenario: TrajectoryScenario, ts: float, k: int) -> np.ndarray:
    """Pre-agreed straight-line profile: what both agents expect the leader
    to fly, and what the leader subtracts from its transmitted state."""
    x = np.zeros(8)
    x[0] = _ramp_position(scenario, ts, k)
    x[1] = _ramp_speed(scenario, k)
    return x


def reference_state(
    scenario: TrajectoryScenario, ts: float, k: int, include_maneuver: bool = True
) -> np.ndarray:
    """Leader tracking reference; the nominal profile plus the lateral bump."""
    x = nominal_state(scenario, ts, k)
    if not include_maneuver or scenario.maneuver_duration <= 0:
        return x
    t = k - scenario.maneuver_start
    if 0 <= t <= scenario.maneuver_duration:
        phase = np.pi * t / scenario.maneuver_duration
        amp = scenario.maneuver_amplitude
        x[4] = amp * np.sin(phase) ** 2
        x[5] = amp * np.pi / (scenario.maneuver_duration * ts) * np.sin(2.0 * phase)
    return x


def leader_input(
    scenario: TrajectoryScenario,
    model: SystemModel,
    gain: np.ndarray,
    k: int,
    x: np.ndarray,
) -> np.ndarray:
    """Leader feedback input: state-feedback tracking of the reference,
    norm-capped so the input power stays bounded."""
    ts = model.ts
    if ts is None:
        raise ValueError("model must carry its sample time for trajectory tracking")
    err = np.asarray(x, dtype=float) - reference_state(scenario, ts, k)
    u = -np.asarray(gain) @ err
    norm = float(np.linalg.norm(u))
    if norm > scenario.input_cap:
        u = u * (scenario.input_cap / norm)
    return u
