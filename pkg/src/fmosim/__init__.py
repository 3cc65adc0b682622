"""Photonic-lattice simulator of environment-assisted energy transport
in a seven-site light-harvesting network with an absorbing sink."""

__version__ = "1.0.0"

from .errors import ConfigError, FmosimError, PhysicsError

__all__ = ["ConfigError", "FmosimError", "PhysicsError", "__version__"]
