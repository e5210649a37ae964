"""Truncated coherent-state resolution of the identity: numerics and diagnostics."""

__version__ = "0.1.0"
