# app/core/errors.py

from enum import IntEnum


class ExitCode(IntEnum):
    OK = 0
    CONFIG_ERROR = 1
    RUNTIME_ERROR = 2
    ORACLE_CAP_EXCEEDED = 3


class FemtonetError(Exception):
    """Base class for every error raised by the simulator."""


class DomainError(FemtonetError, ValueError):
    """An operation was called outside its domain (d <= 0, beta = 0, bad index, ...)."""


class ConfigError(FemtonetError):
    def __init__(self, message: str, key: str | None = None):
        self.key = key
        super().__init__(f"{key}: {message}" if key else message)


class OracleCapExceeded(FemtonetError):
    def __init__(self, n_power: int, m: int, cap: int):
        self.n_power = n_power
        self.m = m
        self.cap = cap
        super().__init__(
            f"exhaustive search over {n_power}^{m} joint actions exceeds the enumeration cap of {cap}"
        )
