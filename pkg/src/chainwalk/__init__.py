"""Quantum-walk collision search: simulation, data structures and cost planning."""

__version__ = "0.1.0"

from . import amplify, chain, combinat, planner, radixstore, walksim  # noqa: E402
from .errors import (  # noqa: E402
    CapacityError,
    ChainwalkError,
    ConfigurationError,
    DomainError,
    EmptyError,
    GuaranteeUnavailableError,
    InfeasibleError,
    IntegrityError,
)

__all__ = [
    "amplify", "chain", "combinat", "planner", "radixstore", "walksim",
    "CapacityError", "ChainwalkError", "ConfigurationError", "DomainError", "EmptyError",
    "GuaranteeUnavailableError", "InfeasibleError", "IntegrityError",
]
