"""Classical swap-update and check over a pair of radix trees.

``T_S`` holds the vertex (a set of inputs); ``T_F`` holds ``f(x) || x`` for
every ``x`` in the vertex, so equal images share a subtree and the solution
counter at the root tells whether the vertex is marked.
"""

from __future__ import annotations

from typing import Iterable

import numpy as np

from ..errors import DomainError, IntegrityError
from .complement import find_nth_not_in_two_trees
from .tree import RadixTree


def pack(f, x: int) -> int:
    return (int(f.table[x]) << f.n) | x


def build_pair(S: Iterable[int], f, C, rng: np.random.Generator, max_size: int | None = None,
               allocator: str = "heap-tree") -> tuple[RadixTree, RadixTree]:
    S = list(S)
    size = max_size or max(1, len(S))
    t_s = RadixTree(f.n, max_size=size, allocator=allocator)
    t_f = RadixTree(f.n + f.m, max_size=size, allocator=allocator,
                    image_bits=f.m, tracked_images=C.images)
    for x in S:
        t_s.insert(x, rng)
        t_f.insert(pack(f, x), rng)
    return t_s, t_f


def preimage_tree(C, n: int, rng: np.random.Generator) -> RadixTree:
    pre = sorted(C.preimages)
    t = RadixTree(n, max_size=max(1, len(pre)))
    for x in pre:
        t.insert(x, rng)
    return t


def swup_classical(t_s: RadixTree, t_f: RadixTree, coin: tuple[int, int], C, f,
                   rng: np.random.Generator, t_pre: RadixTree | None = None) -> tuple[int, int]:
    """Move along ``coin`` in place; returns the coin leading back.

    The coin is 1-based: drop the j-th smallest member, add the z-th smallest
    input outside both the vertex and the recorded preimages.
    """
    j, z = coin
    if t_pre is None:
        t_pre = preimage_tree(C, f.n, rng)
    free = (1 << f.n) - t_s.size - t_pre.size
    if not (1 <= j <= t_s.size and 1 <= z <= free):
        raise DomainError(f"coin {coin} out of range")
    x = t_s.nth_element(j - 1)
    y = find_nth_not_in_two_trees(z - 1, t_s, t_pre)
    if not t_f.lookup(pack(f, x)):
        raise IntegrityError("image tree is missing an element of the vertex")
    t_s.delete(x)
    t_f.delete(pack(f, x))
    t_s.insert(y, rng)
    t_f.insert(pack(f, y), rng)
    j_back = t_s.rank(y) + 1
    z_back = x - t_s.rank(x) - t_pre.rank(x) + 1
    return j_back, z_back


def check_invariant(t_f: RadixTree) -> int:
    """Solutions in the stored vertex; zero means unmarked."""
    if t_f.image_bits is None:
        raise DomainError("solution counter not configured")
    return t_f.sols[0] if t_f.size else 0
