"""Exception types raised across the simulator."""


class ConfigurationError(ValueError):
    """Invalid or inconsistent network/campaign parameters."""


class StatisticsError(RuntimeError):
    """Channel statistics or Monte Carlo moments are unusable."""


class NumericalError(RuntimeError):
    """A factorization that should succeed by construction failed."""


class ProtocolError(RuntimeError):
    """Messages exchanged between APs are missing or inconsistent."""
