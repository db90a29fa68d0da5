"""Exception hierarchy shared across the package."""


class MedDispatchError(Exception):
    """Base class for all package errors."""


class NetworkError(MedDispatchError):
    """Invalid network file or violated network invariant."""


class DataError(MedDispatchError):
    """Missing or malformed input data (congestion, wind, requests)."""


class ConfigError(MedDispatchError):
    """Inconsistent scenario, fleet or demand configuration."""


class ScheduleError(MedDispatchError):
    """A timeline commit that would violate schedule invariants."""


class LogicError(MedDispatchError):
    """Internal misuse, e.g. rolling back an unknown token."""
