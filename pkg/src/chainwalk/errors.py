"""Exception types shared across the package.

Each class maps to one CLI exit code (see ``chainwalk.cli``).
"""


class ChainwalkError(Exception):
    """Base class for all package errors."""


class DomainError(ChainwalkError, ValueError):
    """An argument lies outside its documented domain."""


class EmptyError(DomainError):
    """An operation needs a non-empty collection."""


class ConfigurationError(DomainError):
    """A structural configuration is unusable (bad allocator load, unknown key)."""


class InfeasibleError(ChainwalkError):
    """A parameter combination violates a feasibility constraint."""


class GuaranteeUnavailableError(InfeasibleError):
    """The success guarantee of a routine does not apply at these parameters."""


class CapacityError(ChainwalkError):
    """A dense representation or table would exceed its configured capacity."""


class IntegrityError(ChainwalkError):
    """Stored data failed a consistency check."""
