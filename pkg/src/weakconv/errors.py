"""Shared exception types.

Every user-facing failure falls into one of three buckets: the input is
outside an operation's documented domain, the input is too large for the
desk-scale implementation, or the requested combination is not supported.
The CLI maps these onto distinct exit codes.
"""

from __future__ import annotations


class DomainError(ValueError):
    """Input violates a documented precondition (bad weights, wrong space, ...)."""


class CapacityError(RuntimeError):
    """Input exceeds a documented size limit for the dense algorithms."""


class UnsupportedError(RuntimeError):
    """Operation is not defined for this combination of arguments."""
