from __future__ import annotations

from enum import Enum
from typing import Tuple

from eprsim.errors import ConfigError, UnknownDetectorError


class FunctionType(str, Enum):
    """Hidden Deutsch function of one arm."""

    BALANCED = "balanced"
    CONSTANT = "constant"

    @classmethod
    def parse(cls, value: str | FunctionType) -> FunctionType:
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ConfigError(f"Unknown function type '{value}', expected 'balanced' or 'constant'")


class Basis(str, Enum):
    Z = "z"
    X = "x"

    @classmethod
    def parse(cls, value: str | Basis) -> Basis:
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ConfigError(f"Unknown measurement basis '{value}', expected 'z' or 'x'")

    @property
    def index(self) -> int:
        return 0 if self is Basis.Z else 1


class DetectorId(str, Enum):
    D1 = "D1"
    D2 = "D2"
    D3 = "D3"
    D4 = "D4"
    # second output port of the single-photon schematic
    D2_PRIME = "D2'"

    @classmethod
    def parse(cls, value: str | DetectorId) -> DetectorId:
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().upper())
        except ValueError:
            raise UnknownDetectorError(f"Unknown detector '{value}'")


class Arm(str, Enum):
    A = "A"
    B = "B"

    @classmethod
    def parse(cls, value: str | Arm) -> Arm:
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().upper())
        except ValueError:
            raise ConfigError(f"Unknown arm '{value}', expected 'A' or 'B'")

    @property
    def index(self) -> int:
        return 0 if self is Arm.A else 1

    @property
    def detectors(self) -> Tuple[DetectorId, DetectorId]:
        """(partner-photon detector, circuit-photon detector)."""
        if self is Arm.A:
            return DetectorId.D1, DetectorId.D2
        return DetectorId.D3, DetectorId.D4
