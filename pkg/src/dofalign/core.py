"""Configuration records, scenario classification and antenna reductions.

A two-user MIMO system is described by its four antenna counts
``(M1, N1, M2, N2)``.  Which DoF result governs a given system depends on
whether the transmitters know the channel and, without CSIT, on how many
antenna modes the reconfigurable transmitter can switch among.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

MAX_ANTENNAS = 64


class ConfigurationError(ValueError):
    """Raised for invalid antenna counts or mode counts."""


class DomainError(ValueError):
    """Raised when an operation is called outside its domain of validity."""


class Channel(str, Enum):
    ZIC = "zic"
    FIC = "fic"


class CSIT(str, Enum):
    PRESENT = "present"
    ABSENT = "absent"


class Result(str, Enum):
    THM1_ZIC_CSIT = "Thm1-ZIC-CSIT"
    FIC_CSIT = "FIC-CSIT"
    THM2_C1 = "Thm2-C1"
    THM2_C2 = "Thm2-C2"
    THM3_C1 = "Thm3-C1"
    THM3_C2 = "Thm3-C2"
    THM3_C3 = "Thm3-C3"
    THM4_LIMITED_MODES = "Thm4-LimitedModes"
    IID_NO_SWITCHING = "IID-NoSwitching"


class Side(str, Enum):
    TX1 = "Tx1"
    TX2 = "Tx2"
    NONE = "None"


@dataclass(frozen=True)
class SystemConfig:
    """Antenna counts of a two-user system.

    Parameters
    ----------
    m1, n1 : int
        Transmit and receive antennas of user 1.
    m2, n2 : int
        Transmit and receive antennas of user 2.
    """

    m1: int
    n1: int
    m2: int
    n2: int

    def __post_init__(self) -> None:
        for name in ("m1", "n1", "m2", "n2"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigurationError(f"{name} must be an integer, got {value!r}")
            if not 1 <= value <= MAX_ANTENNAS:
                raise ConfigurationError(
                    f"{name}={value} outside the supported range 1..{MAX_ANTENNAS}"
                )

    @classmethod
    def parse(cls, text: str) -> "SystemConfig":
        """Parse ``"M1,N1,M2,N2"``."""
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 4:
            raise ConfigurationError(f"expected four comma-separated counts, got {text!r}")
        try:
            values = [int(p) for p in parts]
        except ValueError as exc:
            raise ConfigurationError(f"non-integer antenna count in {text!r}") from exc
        return cls(*values)

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.m1, self.n1, self.m2, self.n2)

    def swapped(self) -> "SystemConfig":
        """The same system with the two user indices exchanged."""
        return SystemConfig(self.m2, self.n2, self.m1, self.n1)

    def __str__(self) -> str:
        return "({},{},{},{})".format(*self.as_tuple())


@dataclass(frozen=True)
class Scenario:
    channel: Channel
    csit: CSIT
    modes: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "channel", Channel(self.channel))
        object.__setattr__(self, "csit", CSIT(self.csit))
        if self.modes is not None and (isinstance(self.modes, bool) or self.modes < 1):
            raise ConfigurationError(f"number of modes must be positive, got {self.modes!r}")

    def with_modes(self, k: int | None) -> "Scenario":
        return replace(self, modes=k)


@dataclass(frozen=True)
class CaseLabel:
    result: Result
    side: Side

    def __str__(self) -> str:
        return f"{self.result.value} [{self.side.value}]"


def needs_switching(config: SystemConfig) -> bool:
    """True for ``M1 < N1 < min(M2, N2)``, where mode switching at Tx1 helps."""
    return config.m1 < config.n1 < min(config.m2, config.n2)


def needs_switching_tx2(config: SystemConfig) -> bool:
    return needs_switching(config.swapped())


def reconfigurable_side(config: SystemConfig, scenario: Scenario) -> Side:
    # only the FIC shape M2 < N2 < min(M1, N1) puts the switching transmitter at Tx2
    if scenario.channel is Channel.FIC and needs_switching_tx2(config):
        return Side.TX2
    return Side.TX1


def effective_modes(config: SystemConfig, scenario: Scenario) -> int:
    """Number of modes at the reconfigurable side, defaulting to its antenna count."""
    side = reconfigurable_side(config, scenario)
    antennas = config.m2 if side is Side.TX2 else config.m1
    k = antennas if scenario.modes is None else scenario.modes
    if k < antennas:
        raise ConfigurationError(
            f"K={k} modes is fewer than the {antennas} transmit antennas at {side.value}"
        )
    return k


def classify(config: SystemConfig, scenario: Scenario) -> CaseLabel:
    """Return the result that governs the DoF region of ``config`` under ``scenario``.

    Raises
    ------
    ConfigurationError
        If the scenario requests fewer modes than transmit antennas at the
        reconfigurable transmitter.
    """
    if scenario.csit is CSIT.PRESENT:
        if scenario.channel is Channel.ZIC:
            return CaseLabel(Result.THM1_ZIC_CSIT, Side.NONE)
        return CaseLabel(Result.FIC_CSIT, Side.NONE)

    side = reconfigurable_side(config, scenario)
    k = effective_modes(config, scenario)
    zic = scenario.channel is Channel.ZIC

    if side is Side.TX2:
        m, n = config.m2, config.n2
    else:
        m, n = config.m1, config.n1
    special = needs_switching_tx2(config) if side is Side.TX2 else needs_switching(config)

    if not special:
        return CaseLabel(Result.THM2_C2 if zic else Result.THM3_C3, Side.NONE)
    if k >= n:
        if side is Side.TX2:
            return CaseLabel(Result.THM3_C2, Side.TX2)
        return CaseLabel(Result.THM2_C1 if zic else Result.THM3_C1, Side.TX1)
    if k == m:
        return CaseLabel(Result.IID_NO_SWITCHING, side)
    return CaseLabel(Result.THM4_LIMITED_MODES, side)


def reduce_min_antennas(config: SystemConfig) -> SystemConfig:
    """Replace user 2's antenna counts by ``min(M2, N2)`` on both ends."""
    m = min(config.m2, config.n2)
    return SystemConfig(config.m1, config.n1, m, m)
