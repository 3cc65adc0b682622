"""Exception hierarchy shared across the package."""


class FmosimError(Exception):
    """Base class for all package errors."""


class PhysicsError(FmosimError):
    """A physically invalid input or an undefined numeric operation."""


class ConfigError(FmosimError):
    """A malformed or inconsistent configuration document."""
