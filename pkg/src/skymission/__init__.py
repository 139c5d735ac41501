"""Mission-description language toolchain for autonomous quadrotor missions."""

__version__ = "0.1.0"
