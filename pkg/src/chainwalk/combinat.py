"""Subset-graph combinatorics over a domain with excluded points.

Vertices are R-subsets of the effective domain ``[0, N) minus excluded``.
Two vertices are adjacent when they differ in exactly one element. An edge
leaving a vertex is named by a coin ``(j, z)`` (both 1-based): drop the j-th
smallest member of the vertex, then add the z-th smallest point of the
effective domain that is not in the vertex.

Vertices are ranked colexicographically over *positions* in the effective
domain, so rank 0 is always the R smallest non-excluded points.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError

Vertex = tuple[int, ...]
Coin = tuple[int, int]


@dataclass(frozen=True)
class DomainSpec:
    size: int
    excluded: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        if self.size < 0:
            raise DomainError("domain size must be non-negative")
        object.__setattr__(self, "excluded", frozenset(int(e) for e in self.excluded))
        for e in self.excluded:
            if not 0 <= e < self.size:
                raise DomainError(f"excluded point {e} outside [0, {self.size})")

    @property
    def effective_size(self) -> int:
        return self.size - len(self.excluded)

    @property
    def sorted_excluded(self) -> tuple[int, ...]:
        return _sorted_tuple(self.excluded)

    def effective_points(self) -> np.ndarray:
        mask = np.ones(self.size, dtype=bool)
        if self.excluded:
            mask[list(self.excluded)] = False
        return np.flatnonzero(mask)

    def with_excluded(self, extra: Iterable[int]) -> "DomainSpec":
        return DomainSpec(self.size, self.excluded | frozenset(extra))


@lru_cache(maxsize=256)
def _sorted_tuple(items: frozenset[int]) -> tuple[int, ...]:
    return tuple(sorted(items))


def degree(N_eff: int, R: int) -> int:
    if not 0 < R < N_eff:
        raise DomainError(f"need 0 < R < N_eff, got R={R}, N_eff={N_eff}")
    return R * (N_eff - R)


def spectral_gap(N_eff: int, R: int) -> Fraction:
    """Gap of the random-walk transition matrix, N_eff / (R (N_eff - R))."""
    if not 0 < R < N_eff:
        raise DomainError(f"need 0 < R < N_eff, got R={R}, N_eff={N_eff}")
    return Fraction(N_eff, R * (N_eff - R))


def check_vertex(S: Sequence[int], spec: DomainSpec) -> Vertex:
    v = tuple(int(s) for s in S)
    if any(b <= a for a, b in zip(v, v[1:])):
        raise DomainError("vertex must be strictly increasing")
    for s in v:
        if not 0 <= s < spec.size or s in spec.excluded:
            raise DomainError(f"vertex element {s} not in the effective domain")
    return v


def _merge_blocked(S: Vertex, spec: DomainSpec) -> list[int]:
    if not spec.excluded:
        return list(S)
    return sorted(S + spec.sorted_excluded)


def _nth_free(blocked: Sequence[int], i: int) -> int:
    """The i-th (0-based) integer not in the sorted list ``blocked``."""
    # blocked[k] - k is non-decreasing; count how many blocked points sit below
    # the answer by bisecting on that shifted sequence.
    lo, hi = 0, len(blocked)
    while lo < hi:
        mid = (lo + hi) // 2
        if blocked[mid] - mid <= i:
            lo = mid + 1
        else:
            hi = mid
    return i + lo


def _free_rank(blocked: Sequence[int], v: int) -> int:
    """0-based position of ``v`` among integers not in ``blocked``."""
    return v - bisect_left(blocked, v)


def _check_coin(c: Coin, R: int, free: int) -> None:
    j, z = c
    if not (1 <= j <= R and 1 <= z <= free):
        raise DomainError(f"coin {c} outside [1,{R}] x [1,{free}]")


def apply_coin(S: Sequence[int], c: Coin, spec: DomainSpec) -> Vertex:
    """Neighbour of ``S`` reached through coin ``c``."""
    S = check_vertex(S, spec)
    R = len(S)
    _check_coin(c, R, spec.effective_size - R)
    j, z = c
    blocked = _merge_blocked(S, spec)
    y = _nth_free(blocked, z - 1)
    if y >= spec.size:
        raise DomainError(f"coin {c} points past the domain")
    out = list(S[: j - 1] + S[j:])
    out.insert(bisect_right(out, y), y)
    return tuple(out)


def reverse_coin(S: Sequence[int], c: Coin, spec: DomainSpec) -> Coin:
    """Coin at the neighbour that leads back to ``S``."""
    S = tuple(S)
    j, z = c
    _check_coin(c, len(S), spec.effective_size - len(S))
    x = S[j - 1]
    T = apply_coin(S, c, spec)
    blocked = _merge_blocked(T, spec)
    y = _nth_free(_merge_blocked(S, spec), z - 1)
    return (bisect_left(T, y) + 1, _free_rank(blocked, x) + 1)


def coin_to_pair(S: Sequence[int], c: Coin, spec: DomainSpec) -> tuple[int, int]:
    """Coin as the explicit (removed, inserted) element pair."""
    S = tuple(S)
    _check_coin(c, len(S), spec.effective_size - len(S))
    return S[c[0] - 1], _nth_free(_merge_blocked(S, spec), c[1] - 1)


def pair_to_coin(S: Sequence[int], x: int, y: int, spec: DomainSpec) -> Coin:
    S = tuple(S)
    i = bisect_left(S, x)
    if i == len(S) or S[i] != x:
        raise DomainError(f"{x} is not in the vertex")
    if y in spec.excluded or not 0 <= y < spec.size or y in S:
        raise DomainError(f"{y} is not a free point of the vertex")
    return (i + 1, _free_rank(_merge_blocked(S, spec), y) + 1)


def neighbors(S: Sequence[int], spec: DomainSpec) -> list[Vertex]:
    R = len(S)
    d = degree(spec.effective_size, R)
    free = spec.effective_size - R
    return [apply_coin(S, (1 + i // free, 1 + i % free), spec) for i in range(d)]


def coin_index(c: Coin, R: int, N_eff: int) -> int:
    """Row-major flat index of a coin, 0-based."""
    return (c[0] - 1) * (N_eff - R) + (c[1] - 1)


def coin_from_index(i: int, R: int, N_eff: int) -> Coin:
    free = N_eff - R
    return (1 + i // free, 1 + i % free)


def _positions(S: Sequence[int], spec: DomainSpec) -> list[int]:
    ex = spec.sorted_excluded
    return [s - bisect_left(ex, s) for s in S]


def rank(S: Sequence[int], spec: DomainSpec) -> int:
    """Colexicographic rank of vertex ``S``."""
    S = check_vertex(S, spec)
    return sum(comb(p, i + 1) for i, p in enumerate(_positions(S, spec)))


def unrank(r: int, R: int, spec: DomainSpec) -> Vertex:
    total = comb(spec.effective_size, R)
    if not 0 <= r < total:
        raise DomainError(f"rank {r} outside [0, {total})")
    pos = []
    for i in range(R, 0, -1):
        # largest p with C(p, i) <= r
        lo, hi = i - 1, spec.effective_size - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if comb(mid, i) <= r:
                lo = mid
            else:
                hi = mid - 1
        pos.append(lo)
        r -= comb(lo, i)
    pts = spec.effective_points()
    return tuple(int(pts[p]) for p in reversed(pos))


def binomial_table(n: int, k: int) -> np.ndarray:
    """``table[p, i] = C(p, i)`` as int64 for p < n + 1, i < k + 1."""
    t = np.zeros((n + 1, k + 1), dtype=np.int64)
    for p in range(n + 1):
        for i in range(min(p, k) + 1):
            t[p, i] = comb(p, i)
    return t


def all_vertices(spec: DomainSpec, R: int) -> np.ndarray:
    """Every vertex as a row of an int array, ordered by rank."""
    from itertools import combinations

    N_eff = spec.effective_size
    if not 0 <= R <= N_eff:
        raise DomainError(f"need 0 <= R <= N_eff, got R={R}")
    count = comb(N_eff, R)
    if R == 0:
        return np.zeros((1, 0), dtype=np.int64)
    pos = np.fromiter(
        (p for c in combinations(range(N_eff), R) for p in c),
        dtype=np.int64,
        count=count * R,
    ).reshape(count, R)
    order = np.argsort(colex_ranks(pos, N_eff), kind="stable")
    return spec.effective_points()[pos[order]]


def colex_ranks(positions: np.ndarray, N_eff: int) -> np.ndarray:
    """Vectorised rank of sorted position rows."""
    R = positions.shape[1]
    tab = binomial_table(N_eff, R)
    out = np.zeros(positions.shape[0], dtype=np.int64)
    for i in range(R):
        out += tab[positions[:, i], i + 1]
    return out
