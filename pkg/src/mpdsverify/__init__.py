"""Verification toolkit for multi-pushdown systems under context and phase bounds."""

__version__ = "0.1.0"
