"""Uplink cell-free massive MIMO with master-assisted distributed combining."""

__version__ = "0.1.0"

from .config import NetworkConfig, load_config  # noqa: E402
from .errors import ConfigurationError, NumericalError, ProtocolError, StatisticsError  # noqa: E402

__all__ = [
    "NetworkConfig",
    "load_config",
    "ConfigurationError",
    "NumericalError",
    "ProtocolError",
    "StatisticsError",
]
