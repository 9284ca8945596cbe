"""Exponent model for a lattice sieve whose inner search reuses walk states.

Exponents are in base N, where N = (1/sin(pi/3))^d is the list size; one
unit of that exponent equals ``UNIT_D`` per dimension in base 2.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from ..errors import DomainError

UNIT_D = -math.log2(math.sin(math.pi / 3))
_S60 = math.sin(math.pi / 3)


@dataclass
class SieveReport:
    c: float
    c1: float
    alpha: float
    theta_star: float
    beta: float
    zeta: float
    rho0: float
    eps_exp: float
    delta_exp: float
    s_exp: float
    fas1_exp: float = math.nan
    nbrep_exp: float = math.nan
    total_exp_N: float = math.nan
    total_exp_d: float = math.nan
    formula: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


def _logN_sin(x: float) -> float:
    """log_N of sin(x)^d."""
    return math.log2(math.sin(x)) / UNIT_D


def sieve_derived(c: float, c1: float) -> SieveReport:
    if not 0 < c1 < c < 1:
        raise DomainError("need 0 < c1 < c < 1")
    sin_a = _S60 ** (1 - c)
    if sin_a < 0.5:
        raise DomainError("bucket angle too small for the pair angle to exist")
    alpha = math.asin(sin_a)
    theta = 2 * math.asin(1 / (2 * sin_a))
    zeta = 2 * c + _logN_sin(theta)
    beta = math.asin(_S60**c1)
    w = 1 - 2 * math.cos(beta) ** 2 / (1 + math.cos(theta))
    if w <= 0:
        raise DomainError("filter angle leaves no cap intersection")
    rho0 = -c1 - 0.5 * math.log2(w) / UNIT_D
    eps = 2 * c1 - rho0 + _logN_sin(theta)
    return SieveReport(c, c1, alpha, theta, beta, zeta, rho0, eps, -c1, c1)


def sieve_total(c: float, c1: float, formula: str = "new") -> SieveReport:
    r = sieve_derived(c, c1)
    # U = C = N^0, S = N^{c1}, delta = N^{-c1}
    inner = max(-r.delta_exp / 2 + 0.0, 0.0)
    if formula == "new":
        fas1 = r.rho0 + max(r.s_exp, r.zeta - r.rho0 - r.eps_exp / 2 + inner)
    elif formula == "old":
        # at least one walk runs even when fewer than one repetition is due
        fas1 = r.rho0 + max(0.0, r.zeta - r.rho0) + max(r.s_exp, -r.eps_exp / 2 + inner)
    else:
        raise DomainError(f"unknown formula {formula!r}")
    nbrep = max(0.0, c - r.zeta)
    total = nbrep + max(1.0, 1 - c + fas1)
    r.fas1_exp, r.nbrep_exp, r.total_exp_N = fas1, nbrep, total
    r.total_exp_d = total * UNIT_D
    r.formula = formula
    return r


_FLAT = 1e-9


def _score(c: float, c1: float, formula: str) -> float:
    try:
        return sieve_total(c, c1, formula).total_exp_N
    except DomainError:
        return math.inf


def optimize_sieve(formula: str = "new", step: float = 0.005, fine: float = 1e-4,
                   seeds: int = 8) -> tuple[float, float, SieveReport]:
    """Grid search then coordinate refinement; returns (c, c1, report)."""
    grid = []
    count = int(round(1 / step))
    for i in range(1, count):
        for j in range(1, i):
            c, c1 = i * step, j * step
            grid.append((_score(c, c1, formula), c, c1))
    grid.sort()
    best = (math.inf, 0.0, 0.0)
    # refine the few best grid cells: the landscape has flat valleys
    for s, c, c1 in grid[:seeds]:
        h = step
        while h >= fine * (1 - 1e-9):
            improved = True
            while improved:
                improved = False
                for dc, dc1 in ((h, 0), (-h, 0), (0, h), (0, -h), (h, h), (-h, -h)):
                    nc, nc1 = c + dc, c1 + dc1
                    if 0 < nc1 < nc < 1:
                        v = _score(nc, nc1, formula)
                        if v < s - 1e-15:
                            s, c, c1, improved = v, nc, nc1, True
            h /= 2
        if s < best[0]:
            best = (s, c, c1)
    # Optima can form a flat valley; among equal times keep the smallest
    # memory exponent c.
    s, c, c1 = best
    h = step
    while h >= fine * (1 - 1e-9):
        moved = True
        while moved:
            moved = False
            for dc, dc1 in ((-h, -h), (-h, 0), (-h, h)):
                nc, nc1 = c + dc, c1 + dc1
                if 0 < nc1 < nc < 1 and _score(nc, nc1, formula) <= s + _FLAT:
                    c, c1, moved = nc, nc1, True
                    break
        h /= 2
    return c, c1, sieve_total(c, c1, formula)
