"""Cost-exponent calculators."""

from .exponents import (
    ExponentReport,
    bht_exponent,
    collision_branch,
    collision_exponent,
    limited_birthday,
    r_collision,
    tradeoff_exponent,
)
from .sieve import UNIT_D, SieveReport, optimize_sieve, sieve_derived, sieve_total

__all__ = [
    "ExponentReport",
    "SieveReport",
    "UNIT_D",
    "bht_exponent",
    "collision_branch",
    "collision_exponent",
    "limited_birthday",
    "optimize_sieve",
    "r_collision",
    "sieve_derived",
    "sieve_total",
    "tradeoff_exponent",
]
