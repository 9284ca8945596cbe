"""Log2 cost exponents for collision search and related problems.

Every function works in max-plus arithmetic: a sum of terms costs the
largest exponent, and polynomial factors are dropped.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import DomainError, InfeasibleError

# Relative tolerance for the boundary comparisons (inputs are usually
# floats such as 2k/3 that land exactly on a threshold).
_TOL = 1e-12


@dataclass
class ExponentReport:
    exponent: float
    regime: str
    memory_exponent: float
    constraints_satisfied: list[tuple[str, bool]] = field(default_factory=list)
    normalized: bool = False
    extra: dict = field(default_factory=dict)

    @property
    def feasible(self) -> bool:
        return all(ok for _, ok in self.constraints_satisfied)


def _le(a: float, b: float) -> bool:
    return a <= b + _TOL * max(1.0, abs(a), abs(b))


def _require(cons: list[tuple[str, bool]]) -> None:
    # The collision-count bound k <= 2n - m is reported, not enforced: a
    # random function only has about 2^(2n-m) collisions, so past it the
    # exponent is a formula value with no instance behind it.
    for name, ok in cons:
        if not ok:
            raise DomainError(f"constraint violated: {name}")


def _collision_terms(k: float, m: float, n: float) -> tuple[float, float]:
    return 2 * k / 3 + m / 3, k + min(m - n, m / 4)


def collision_exponent(k: float, m: float, n: float, normalized: bool = False) -> ExponentReport:
    """Cost of 2^k collisions for f: {0,1}^n -> {0,1}^m.

    With ``normalized=True`` pass k/n, m/n and n=1; the result is then in
    units of n as well.
    """
    cons = [("n <= m", _le(n, m)), ("m <= 2n", _le(m, 2 * n)),
            ("0 <= k", _le(0, k)), ("k <= 2n - m", _le(k, 2 * n - m))]
    _require(cons[:3])
    if _le(k, 3 * n - 2 * m):
        regime, time, mem = "bht", 2 * k / 3 + m / 3, 2 * k / 3 + m / 3
    elif _le(k, m / 4):
        regime, time, mem = "ours", 2 * k / 3 + m / 3, 2 * k / 3 + m / 3
    elif _le(m, 4 * n / 3):
        regime, time, mem = "bht-extended", k + m - n, 2 * n - m
    else:
        regime, time, mem = "ours-extended", k + m / 4, m / 2
    return ExponentReport(max(_collision_terms(k, m, n)), regime, mem, cons, normalized,
                          {"formula_time": time})


def collision_branch(k: float, m: float, n: float) -> int:
    """0 when the 2k/3 + m/3 term is the larger one (ties included), else 1."""
    a, b = _collision_terms(k, m, n)
    return 0 if a >= b else 1


def bht_exponent(k: float, m: float, n: float) -> ExponentReport:
    cons = [("n <= m", _le(n, m)), ("m <= 2n", _le(m, 2 * n)),
            ("0 <= k", _le(0, k)), ("k <= 2n - m", _le(k, 2 * n - m))]
    _require(cons[:3])
    if _le(k, 3 * n - 2 * m):
        e = 2 * k / 3 + m / 3
        return ExponentReport(e, "bht", e, cons)
    return ExponentReport(k + m - n, "bht-repeated", 2 * n - m, cons)


def tradeoff_exponent(k: float, ell: float, m: float, n: float) -> ExponentReport:
    """Time for 2^k collisions with 2^ell memory."""
    upper = min(2 * k / 3 + m / 3, max(2 * n - m, m / 2))
    cons = [
        ("k <= ell", _le(k, ell)),
        ("ell <= 2k/3 + m/3", _le(ell, 2 * k / 3 + m / 3)),
        ("ell <= max(2n - m, m/2)", _le(ell, max(2 * n - m, m / 2))),
    ]
    for name, ok in cons:
        if not ok:
            raise InfeasibleError(f"constraint violated: {name}")
    mech = "walk" if _le(ell, m / 2) else "bht"
    return ExponentReport(k + m / 2 - ell / 2, mech, ell, cons, extra={"ell_max": upper})


def r_collision(r: int, k: float, m: float, n: float) -> ExponentReport:
    """Cost of 2^k r-collisions; infeasibility is reported, not raised."""
    if r < 2:
        raise DomainError("r must be at least 2")
    den = 2**r - 1
    e = k * 2 ** (r - 1) / den + m * (2 ** (r - 1) - 1) / den
    lhs = k / den + m * (1 - 1 / den)
    cons = [("k/(2^r-1) + m(1 - 1/(2^r-1)) <= n", _le(lhs, n))]
    return ExponentReport(e, f"{r}-collision", e, cons, extra={"constraint_lhs": lhs})


def _lb_case(n: float, a: float, b: float, k: float) -> tuple[float, str]:
    """Quantum exponent with input difference dimension a and output dimension b."""
    t = 2 * a - n + b
    single = max(2 * k / 3 + (n - b) / 3, k + min(n - b - a, (n - b) / 4))
    sparse = k + (n - b) / 2 - a / 3
    multi = max(k + 2 * (n - a - b) / 3, k + min(n - b - a, (n - b) / 4))
    options = []
    if k < t or abs(k - t) <= _TOL:
        options.append((single, "single-structure"))
    if t < 0 or abs(t) <= _TOL:
        options.append((sparse, "sparse"))
    if 0 <= t + _TOL and t <= k + _TOL:
        options.append((multi, "multi-structure"))
    return min(options)


def limited_birthday(n: float, din: float, dout: float, k: float = 0.0) -> ExponentReport:
    if not (0 <= din <= n and 0 <= dout <= n):
        raise DomainError("difference dimensions must lie in [0, n]")
    if k < 0:
        raise DomainError("k must be non-negative")
    q1 = _lb_case(n, din, dout, k)
    q2 = _lb_case(n, dout, din, k)
    best = min(q1, q2)
    delta = max(din, dout)
    classical = max((k + n + 1 - delta) / 2, k + n + 1 - din - dout)
    return ExponentReport(best[0], best[1], 0.0, [],
                          extra={"classical_exponent": classical,
                                 "roles_swapped": q2 < q1})
