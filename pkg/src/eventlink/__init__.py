"""Event-triggered, control-aware MIMO precoding simulator for
leader-follower formation control over a fading link."""

__version__ = "0.1.0"

from .channel import LinkConfig, sample_channel, transmit
from .config import SimConfig
from .control import (
    ControllerConfig,
    ControllerGain,
    deviation,
    estimated_deviation,
    follower_input,
    lqr_gain,
)
from .errors import (
    ConfigError,
    ConvergenceError,
    EventlinkError,
    NumericalError,
    PowerBudgetError,
)
from .estimation import EstimatorState, predict, update
from .harness import (
    EpisodeTrace,
    MetricsSummary,
    SimSetup,
    build_setup,
    run_ensemble,
    run_episode,
    run_matched_baseline,
    sweep,
)
from .plant import SystemModel, TrajectoryScenario, build_uav_model, step
from .precoding import (
    DriftTerms,
    LyapunovConfig,
    PrecoderDecision,
    capacity_precoder,
    drift_terms,
    expected_drift,
    lyapunov_precoder,
    posterior_cov,
)
from .trigger import TriggerDecision, decide, expected_lyapunov

__all__ = [
    "__version__",
    "ConfigError",
    "ControllerConfig",
    "ControllerGain",
    "ConvergenceError",
    "DriftTerms",
    "EpisodeTrace",
    "EstimatorState",
    "EventlinkError",
    "LinkConfig",
    "LyapunovConfig",
    "MetricsSummary",
    "NumericalError",
    "PowerBudgetError",
    "PrecoderDecision",
    "SimConfig",
    "SimSetup",
    "SystemModel",
    "TrajectoryScenario",
    "TriggerDecision",
    "build_setup",
    "build_uav_model",
    "capacity_precoder",
    "decide",
    "deviation",
    "drift_terms",
    "estimated_deviation",
    "expected_drift",
    "expected_lyapunov",
    "follower_input",
    "lqr_gain",
    "lyapunov_precoder",
    "posterior_cov",
    "predict",
    "run_ensemble",
    "run_episode",
    "run_matched_baseline",
    "sample_channel",
    "step",
    "sweep",
    "transmit",
    "update",
]
