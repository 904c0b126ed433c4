"""Shared exception base for the package."""


class JamcompError(Exception):
    """Base class for all errors raised by jamcomp."""
