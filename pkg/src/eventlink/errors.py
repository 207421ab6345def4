"""Exception types shared across the package."""


class EventlinkError(Exception):
    """Base class for all errors raised by eventlink."""


class ConfigError(EventlinkError):
    """A configuration file or parameter set is invalid."""


class NumericalError(EventlinkError):
    """A numerical routine produced an unusable result (NaN, blow-up, ...)."""


class ConvergenceError(NumericalError):
    """An iterative routine failed to converge within its budget."""


class PowerBudgetError(EventlinkError):
    """A precoder exceeded the transmit-power budget; upstream bug."""
