"""Degrees-of-freedom regions and blind alignment schemes for two-user MIMO channels."""

from .core import (
    CSIT,
    CaseLabel,
    Channel,
    ConfigurationError,
    DomainError,
    Result,
    Scenario,
    Side,
    SystemConfig,
    classify,
    reduce_min_antennas,
)
from .regions import DofPoint, DofRegion, HalfPlane, build_region, scenario

__version__ = "0.1.0"
