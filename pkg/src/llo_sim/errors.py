"""Exception hierarchy shared across the package.

Exit-code mapping used by the CLI: configuration / precondition problems
(:class:`ConfigError` and subclasses) map to exit code 2, numerical failures
at run time (:class:`NumericalDomainError` and subclasses) to exit code 1.
"""

from __future__ import annotations


class LLOSimError(Exception):
    """Base class for all package errors."""


class ConfigError(LLOSimError):
    """Invalid configuration: unknown key, malformed file, unphysical value."""


class DomainError(ConfigError):
    """A numeric argument violates an operation's precondition."""


class ScheduleError(ConfigError):
    """Pulse-train bookkeeping is inconsistent (lengths, ordering, kinds)."""


class NumericalDomainError(LLOSimError):
    """A numerical computation left its valid domain (e.g. an unphysical
    symplectic eigenvalue)."""


class EstimationError(NumericalDomainError):
    """A statistical estimate is undefined or ill-conditioned on the given
    data (zero-vector phase, vanishing mean quadrature, empty group)."""
