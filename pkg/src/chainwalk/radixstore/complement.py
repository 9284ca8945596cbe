"""Rank and select over the complement of one or two stored sets.

Elements are compared by numeric value. All indices are 0-based: index ``i``
names the (i+1)-th smallest qualifying element.
"""

from __future__ import annotations

from ..errors import DomainError
from .tree import RadixTree


def _first(t: RadixTree):
    return t.leftmost(0) if t.size else None


def count_in_interval_not_tree(u: int, v: int, t: RadixTree) -> int:
    """Size of ``[u, v)`` minus the stored set."""
    u, v = _num(u), _num(v)
    if u > v:
        raise DomainError("interval start exceeds its end")
    if t.size == 0 or u == v:
        return v - u
    return _count_subtree(u, v, 0, t)


def _count_subtree(u: int, v: int, a: int, t: RadixTree) -> int:
    lo, hi = t.leftmost(a), t.rightmost(a)
    if u <= lo and hi < v:
        return v - u - t.leaves[a]
    if v <= lo or hi < u:
        return v - u
    z = t.leftmost(t.a_r[a])
    if v <= z:
        return _count_subtree(u, v, t.a_l[a], t)
    if z <= u:
        return _count_subtree(u, v, t.a_r[a], t)
    return _count_subtree(u, z, t.a_l[a], t) + _count_subtree(z, v, t.a_r[a], t)


def _num(x) -> int:
    return int(x, 2) if isinstance(x, str) else int(x)


def _nth_not_in_subtree(i: int, a: int, t: RadixTree) -> int:
    # i-th element >= leftmost(a) that is not a leaf of subtree a
    while not t.is_leaf(a):
        x = t.leftmost(a)
        y = t.leftmost(t.a_r[a])
        gap = y - x - t.leaves[t.a_l[a]]
        if i >= gap:
            i -= gap
            a = t.a_r[a]
        else:
            a = t.a_l[a]
    return t.key[a] + i + 1


def find_nth_not_in_tree(i: int, t: RadixTree) -> int:
    total = (1 << t.n) - t.size
    if not 0 <= i < total:
        raise DomainError(f"index {i} outside [0, {total})")
    if t.size == 0:
        return i
    x = t.leftmost(0)
    if i < x:
        return i
    return _nth_not_in_subtree(i - x, 0, t)


def find_nth_not_in_two_trees(i: int, t: RadixTree, t2: RadixTree) -> int:
    """i-th smallest element in neither set; the sets must be disjoint."""
    if t.n != t2.n:
        raise DomainError("trees use different bit lengths")
    small, big = (t, t2) if t.size <= t2.size else (t2, t)
    if any(big.lookup(x) for x in small.elements()):
        raise DomainError("trees share an element")
    total = (1 << t.n) - t.size - t2.size
    if not 0 <= i < total:
        raise DomainError(f"index {i} outside [0, {total})")
    if t.size == 0:
        return find_nth_not_in_tree(i, t2)
    x = t.leftmost(0)
    before = count_in_interval_not_tree(0, x, t2)
    if i < before:
        return find_nth_not_in_tree(i, t2)
    i -= before
    a = 0
    while not t.is_leaf(a):
        x = t.leftmost(a)
        y = t.leftmost(t.a_r[a])
        gap = count_in_interval_not_tree(x, y, t2) - t.leaves[t.a_l[a]]
        if i >= gap:
            i -= gap
            a = t.a_r[a]
        else:
            a = t.a_l[a]
    x = t.key[a]
    return find_nth_not_in_tree(i + count_in_interval_not_tree(0, x, t2) + 1, t2)
