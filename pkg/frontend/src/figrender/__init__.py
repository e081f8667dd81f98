"""Batch figure rendering for kickedspin CSV/JSON outputs."""

__version__ = "0.1.0"
