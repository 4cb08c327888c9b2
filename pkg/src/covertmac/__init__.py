"""Covert communication over a classical-quantum multiple-access channel with a helper."""

__version__ = "0.1.0"
