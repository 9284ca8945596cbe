"""Radix tree over fixed-width bit strings stored in a flat cell array.

Layout rules:

* The root always lives in cell 0; every other node sits in a cell chosen
  uniformly among the free ones, so the physical layout of a set does not
  depend on the order in which it was built.
* A set of size s occupies exactly ``2s - 1`` cells.
* Edge labels below the root start with 0 on the left and 1 on the right.
  The root has no incoming edge, so its two labels also carry the prefix
  shared by every element and diverge right after it.
* Leaves keep their element in ``key``; concatenating the labels on the
  path from the root gives the same string.

Every node caches its leaf count, the number of leaves passing a predicate,
and (when ``image_bits`` is set) the number of solutions in its subtree. A
solution is a group of two or more leaves sharing their top ``image_bits``
bits, or any single leaf whose top bits are in ``tracked_images``.
"""

from __future__ import annotations

import json
from typing import Callable, Iterable, Optional

import numpy as np

from ..errors import CapacityError, DomainError, EmptyError, IntegrityError
from .alloc import Allocator, capacity_for, make_allocator

NIL = -1


def to_bits(x: int, n: int) -> str:
    return format(x, f"0{n}b") if n else ""


def _lcp(a: str, b: str) -> str:
    i = 0
    while i < len(a) and i < len(b) and a[i] == b[i]:
        i += 1
    return a[:i]


class RadixTree:
    def __init__(
        self,
        n: int,
        capacity: Optional[int] = None,
        allocator: str = "heap-tree",
        predicate: Optional[Callable[[int], bool]] = None,
        image_bits: Optional[int] = None,
        tracked_images: Iterable[int] = (),
        max_size: Optional[int] = None,
    ):
        if n < 0:
            raise DomainError("bit length must be non-negative")
        if capacity is None:
            capacity = capacity_for(max_size or max(1, 1 << min(n, 10)))
        self.n = n
        self.predicate = predicate
        self.image_bits = image_bits
        self.tracked = frozenset(tracked_images)
        self.alloc: Allocator = make_allocator(allocator, capacity)
        M = capacity
        self.leaves = [0] * M
        self.pred = [0] * M
        self.sols = [0] * M
        self.a_l = [NIL] * M
        self.a_r = [NIL] * M
        self.lab_l = [""] * M
        self.lab_r = [""] * M
        self.key = [NIL] * M
        self.size = 0

    # -- basic accessors ----------------------------------------------------

    @property
    def capacity(self) -> int:
        return self.alloc.capacity

    @property
    def allocator_kind(self) -> str:
        return self.alloc.kind

    def is_leaf(self, a: int) -> bool:
        return self.a_l[a] == NIL

    def occupied_count(self) -> int:
        return self.capacity - self.alloc.free_count

    def _check_elem(self, x: int) -> int:
        x = int(x, 2) if isinstance(x, str) else int(x)
        if not 0 <= x < 1 << self.n:
            raise DomainError(f"element {x} does not fit in {self.n} bits")
        return x

    def _child(self, a: int, side: int) -> int:
        return self.a_l[a] if side == 0 else self.a_r[a]

    def _label(self, a: int, side: int) -> str:
        return self.lab_l[a] if side == 0 else self.lab_r[a]

    def _set_child(self, a: int, side: int, child: int, label: str) -> None:
        if side == 0:
            self.a_l[a], self.lab_l[a] = child, label
        else:
            self.a_r[a], self.lab_r[a] = child, label

    def _clear(self, a: int) -> None:
        self.leaves[a] = self.pred[a] = self.sols[a] = 0
        self.a_l[a] = self.a_r[a] = self.key[a] = NIL
        self.lab_l[a] = self.lab_r[a] = ""

    def _write_leaf(self, a: int, x: int) -> None:
        self._clear(a)
        self.key[a] = x

    def _copy_cell(self, src: int, dst: int) -> None:
        for arr in (self.leaves, self.pred, self.sols, self.a_l, self.a_r, self.lab_l, self.lab_r, self.key):
            arr[dst] = arr[src]

    # -- invariants ---------------------------------------------------------

    def _group_value(self, leaves: int, image: int) -> int:
        if image in self.tracked:
            return leaves
        return 1 if leaves >= 2 else 0

    def _refresh(self, a: int, prefix: str) -> None:
        """Recompute node ``a``'s counters from its children; ``prefix`` is its path string."""
        if self.is_leaf(a):
            x = self.key[a]
            self.leaves[a] = 1
            self.pred[a] = int(bool(self.predicate(x))) if self.predicate else 0
            if self.image_bits is not None:
                self.sols[a] = self._group_value(1, x >> (self.n - self.image_bits))
            return
        l, r = self.a_l[a], self.a_r[a]
        self.leaves[a] = self.leaves[l] + self.leaves[r]
        self.pred[a] = self.pred[l] + self.pred[r]
        if self.image_bits is not None:
            split = prefix + _lcp(self.lab_l[a], self.lab_r[a])
            if len(split) >= self.image_bits:
                image = int(split[: self.image_bits], 2) if self.image_bits else 0
                self.sols[a] = self._group_value(self.leaves[a], image)
            else:
                self.sols[a] = self.sols[l] + self.sols[r]

    def _refresh_path(self, path: list[tuple[int, str]]) -> None:
        for a, prefix in reversed(path):
            self._refresh(a, prefix)

    def set_tracked_images(self, images: Iterable[int]) -> None:
        """Change the tracked image set and recompute every counter."""
        self.tracked = frozenset(images)
        self.recompute_all()

    def recompute_all(self) -> None:
        if self.size == 0:
            return

        def rec(a: int, prefix: str) -> None:
            if not self.is_leaf(a):
                rec(self.a_l[a], prefix + self.lab_l[a])
                rec(self.a_r[a], prefix + self.lab_r[a])
            self._refresh(a, prefix)

        rec(0, "")

    # -- queries ------------------------------------------------------------

    def _descend(self, x: str) -> tuple[list[tuple[int, str]], str]:
        """Follow labels that prefix ``x``; returns the visited path and the matched prefix."""
        a, y = 0, ""
        path = [(0, "")]
        while not self.is_leaf(a):
            if x.startswith(y + self.lab_l[a]):
                y += self.lab_l[a]
                a = self.a_l[a]
            elif x.startswith(y + self.lab_r[a]):
                y += self.lab_r[a]
                a = self.a_r[a]
            else:
                break
            path.append((a, y))
        return path, y

    def lookup(self, x) -> bool:
        x = self._check_elem(x)
        if self.size == 0:
            return False
        path, _ = self._descend(to_bits(x, self.n))
        a = path[-1][0]
        return self.is_leaf(a) and self.key[a] == x

    def __contains__(self, x) -> bool:
        return self.lookup(x)

    def __len__(self) -> int:
        return self.size

    def elements(self) -> list[int]:
        out: list[int] = []
        if self.size == 0:
            return out
        stack = [0]
        while stack:
            a = stack.pop()
            if self.is_leaf(a):
                out.append(self.key[a])
            else:
                stack.append(self.a_r[a])
                stack.append(self.a_l[a])
        return out

    def leftmost(self, a: int) -> int:
        while not self.is_leaf(a):
            a = self.a_l[a]
        return self.key[a]

    def rightmost(self, a: int) -> int:
        while not self.is_leaf(a):
            a = self.a_r[a]
        return self.key[a]

    def nth_element(self, j: int) -> int:
        """0-based j-th smallest element."""
        if not 0 <= j < self.size:
            raise DomainError(f"index {j} outside [0, {self.size})")
        a = 0
        while not self.is_leaf(a):
            left = self.leaves[self.a_l[a]]
            if j < left:
                a = self.a_l[a]
            else:
                j -= left
                a = self.a_r[a]
        return self.key[a]

    def rank(self, x) -> int:
        """Number of stored elements smaller than ``x``."""
        x = self._check_elem(x)
        if self.size == 0:
            return 0
        bits = to_bits(x, self.n)
        a, y, below = 0, "", 0
        while not self.is_leaf(a):
            nxt = None
            for child, lab in ((self.a_l[a], self.lab_l[a]), (self.a_r[a], self.lab_r[a])):
                cp = y + lab
                head = bits[: len(cp)]
                if head > cp:
                    below += self.leaves[child]
                elif head == cp:
                    nxt = (child, cp)
            if nxt is None:
                return below
            a, y = nxt
        return below + (1 if self.key[a] < x else 0)

    def qlookup_sample(self, rng: np.random.Generator, which: str = "pred"):
        """Uniform draw among leaves passing the predicate, or among solutions.

        ``which='pred'`` returns an element; ``which='sols'`` returns the
        solution as a sorted tuple of elements.
        """
        counts = {"pred": self.pred, "sols": self.sols}.get(which)
        if counts is None:
            raise DomainError(f"unknown counter {which!r}")
        if which == "sols" and self.image_bits is None:
            raise DomainError("solution counter not configured")
        if self.size == 0 or counts[0] == 0:
            raise EmptyError("no element satisfies the property")
        a, y = 0, ""
        while not self.is_leaf(a):
            if which == "sols":
                split = y + _lcp(self.lab_l[a], self.lab_r[a])
                if len(split) >= self.image_bits:
                    return self._sample_group(a, split, rng)
            l, r = self.a_l[a], self.a_r[a]
            if rng.random() * counts[a] < counts[l]:
                y, a = y + self.lab_l[a], l
            else:
                y, a = y + self.lab_r[a], r
        return (self.key[a],) if which == "sols" else self.key[a]

    def _sample_group(self, a: int, split: str, rng: np.random.Generator) -> tuple[int, ...]:
        image = int(split[: self.image_bits], 2) if self.image_bits else 0
        if image in self.tracked:
            j = int(rng.integers(self.leaves[a]))
            while not self.is_leaf(a):
                left = self.leaves[self.a_l[a]]
                if j < left:
                    a = self.a_l[a]
                else:
                    j -= left
                    a = self.a_r[a]
            return (self.key[a],)
        return tuple(sorted(self._subtree_keys(a)))

    def _subtree_keys(self, a: int) -> list[int]:
        if self.is_leaf(a):
            return [self.key[a]]
        return self._subtree_keys(self.a_l[a]) + self._subtree_keys(self.a_r[a])

    # -- updates ------------------------------------------------------------

    def insert(self, x, rng: np.random.Generator) -> list[int]:
        """Add ``x``; returns the addresses drawn from the allocator."""
        x = self._check_elem(x)
        if self.lookup(x):
            raise DomainError(f"element {x} already present")
        bits = to_bits(x, self.n)
        if self.size == 0:
            if not self.alloc.is_free(0):
                raise IntegrityError("root cell busy in an empty tree")
            self.alloc.mark(0)
            self._write_leaf(0, x)
            self._refresh(0, "")
            self.size = 1
            return []
        if self.alloc.free_count < 2:
            raise CapacityError("need two free cells to insert")
        if self.is_leaf(0):
            j2, j3 = self.alloc.allocate(rng), self.alloc.allocate(rng)
            old = self.key[0]
            self._copy_cell(0, j2)
            self._write_leaf(j3, x)
            self._clear(0)
            a_bits = to_bits(old, self.n)
            pair = sorted([(a_bits, j2), (bits, j3)])
            self._set_child(0, 0, pair[0][1], pair[0][0])
            self._set_child(0, 1, pair[1][1], pair[1][0])
            self._refresh(j2, a_bits)
            self._refresh(j3, bits)
            self._refresh(0, "")
            self.size += 1
            return [j2, j3]
        path, y = self._descend(bits)
        j1 = path[-1][0]
        rem = bits[len(y):]
        p = _lcp(self.lab_l[j1], self.lab_r[j1])
        j2, j3 = self.alloc.allocate(rng), self.alloc.allocate(rng)
        self._write_leaf(j3, x)
        if not rem.startswith(p):
            # x diverges above the root's branching point: a new root is needed
            self._copy_cell(0, j2)
            self._clear(0)
            old_root_lab = p
            self.lab_l[j2] = self.lab_l[j2][len(p):]
            self.lab_r[j2] = self.lab_r[j2][len(p):]
            pair = sorted([(old_root_lab, j2), (bits, j3)])
            self._set_child(0, 0, pair[0][1], pair[0][0])
            self._set_child(0, 1, pair[1][1], pair[1][0])
            self._refresh(j3, bits)
            self._refresh(j2, p)
            self._refresh(0, "")
        else:
            side = 0 if rem[len(p)] == "0" else 1
            lab = self._label(j1, side)
            child = self._child(j1, side)
            z = _lcp(lab, rem)
            t, xr = lab[len(z):], rem[len(z):]
            self._clear(j2)
            pair = sorted([(t, child), (xr, j3)])
            self._set_child(j2, 0, pair[0][1], pair[0][0])
            self._set_child(j2, 1, pair[1][1], pair[1][0])
            self._set_child(j1, side, j2, z)
            self._refresh(j3, bits)
            self._refresh(j2, y + z)
            self._refresh_path(path)
        self.size += 1
        return [j2, j3]

    def delete(self, x) -> list[int]:
        """Remove ``x``; returns the freed addresses (the inverse of ``insert``)."""
        x = self._check_elem(x)
        if not self.lookup(x):
            raise DomainError(f"element {x} not present")
        bits = to_bits(x, self.n)
        path, _ = self._descend(bits)
        leaf = path[-1][0]
        if len(path) == 1:
            self._clear(0)
            self.alloc.release(0)
            self.size = 0
            return [0]
        parent, pprefix = path[-2]
        side = 0 if self.a_l[parent] == leaf else 1
        sib = self._child(parent, 1 - side)
        sib_lab = self._label(parent, 1 - side)
        if parent == 0:
            # the sibling becomes the root; its labels absorb the edge label
            self._copy_cell(sib, 0)
            if not self.is_leaf(0):
                self.lab_l[0] = sib_lab + self.lab_l[0]
                self.lab_r[0] = sib_lab + self.lab_r[0]
            self._refresh(0, "")
            freed = [sib, leaf]
        else:
            grand, gprefix = path[-3]
            gside = 0 if self.a_l[grand] == parent else 1
            glab = self._label(grand, gside)
            self._set_child(grand, gside, sib, glab + sib_lab)
            self._refresh_path(path[:-2])
            freed = [parent, leaf]
        for a in freed:
            self._clear(a)
            self.alloc.release(a)
        self.size -= 1
        return freed

    # -- structure ----------------------------------------------------------

    def canonical_form(self):
        """Address-free nested encoding of the logical tree."""
        if self.size == 0:
            return None

        def rec(a):
            if self.is_leaf(a):
                return ("leaf", self.key[a])
            return (self.lab_l[a], rec(self.a_l[a]), self.lab_r[a], rec(self.a_r[a]))

        return rec(0)

    def layout(self) -> tuple[int, ...]:
        """Addresses of all nodes in root-first, left-before-right order."""
        if self.size == 0:
            return ()
        out, stack = [], [0]
        while stack:
            a = stack.pop()
            out.append(a)
            if not self.is_leaf(a):
                stack.append(self.a_r[a])
                stack.append(self.a_l[a])
        return tuple(out)

    def check(self) -> None:
        """Raise ``IntegrityError`` if any structural rule or counter is off."""
        if self.size == 0:
            if self.occupied_count() != 0:
                raise IntegrityError("empty tree with occupied cells")
            return
        if self.occupied_count() != 2 * self.size - 1:
            raise IntegrityError("occupied cell count is not 2|S| - 1")
        seen = set()
        saved = (list(self.leaves), list(self.pred), list(self.sols))

        def rec(a: int, prefix: str, is_root: bool) -> None:
            if a in seen or self.alloc.is_free(a):
                raise IntegrityError(f"bad cell reference {a}")
            seen.add(a)
            if self.is_leaf(a):
                if self.a_r[a] != NIL or self.lab_l[a] or self.lab_r[a]:
                    raise IntegrityError("leaf with children or labels")
                if len(prefix) != self.n and not (is_root and self.size == 1):
                    raise IntegrityError("leaf depth differs from bit length")
                if self.size > 1 and to_bits(self.key[a], self.n) != prefix:
                    raise IntegrityError("path labels disagree with leaf element")
                return
            l_lab, r_lab = self.lab_l[a], self.lab_r[a]
            p = _lcp(l_lab, r_lab) if is_root else ""
            if len(l_lab) <= len(p) or len(r_lab) <= len(p):
                raise IntegrityError("labels do not diverge")
            if l_lab[len(p)] != "0" or r_lab[len(p)] != "1":
                raise IntegrityError("left label must branch on 0, right on 1")
            rec(self.a_l[a], prefix + l_lab, False)
            rec(self.a_r[a], prefix + r_lab, False)

        rec(0, "", True)
        if len(seen) != self.occupied_count():
            raise IntegrityError("unreachable occupied cells")
        self.recompute_all()
        if saved != (self.leaves, self.pred, self.sols):
            raise IntegrityError("cached counters differ from recomputation")

    # -- serialization ------------------------------------------------------

    def to_json(self) -> str:
        cells = []
        for a in range(self.capacity):
            if self.alloc.is_free(a):
                continue
            cells.append(
                {
                    "addr": a,
                    "inv": {"leaves": self.leaves[a], "pred": self.pred[a], "sols": self.sols[a]},
                    "a_l": None if self.a_l[a] == NIL else self.a_l[a],
                    "a_r": None if self.a_r[a] == NIL else self.a_r[a],
                    "lab_l": self.lab_l[a],
                    "lab_r": self.lab_r[a],
                    "key": None if self.key[a] == NIL else self.key[a],
                }
            )
        doc = {
            "schema_version": 1,
            "n": self.n,
            "capacity": self.capacity,
            "allocator": self.allocator_kind,
            "image_bits": self.image_bits,
            "tracked_images": sorted(self.tracked),
            "size": self.size,
            "cells": cells,
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(
        cls, text: str, predicate: Optional[Callable[[int], bool]] = None
    ) -> "RadixTree":
        doc = json.loads(text)
        t = cls(
            doc["n"],
            capacity=doc["capacity"],
            allocator=doc["allocator"],
            predicate=predicate,
            image_bits=doc["image_bits"],
            tracked_images=doc["tracked_images"],
        )
        for c in doc["cells"]:
            a = c["addr"]
            t.alloc.mark(a)
            t.leaves[a] = c["inv"]["leaves"]
            t.pred[a] = c["inv"]["pred"]
            t.sols[a] = c["inv"]["sols"]
            t.a_l[a] = NIL if c["a_l"] is None else c["a_l"]
            t.a_r[a] = NIL if c["a_r"] is None else c["a_r"]
            t.lab_l[a], t.lab_r[a] = c["lab_l"], c["lab_r"]
            t.key[a] = NIL if c["key"] is None else c["key"]
        t.size = doc["size"]
        return t


def build_tree(elements: Iterable, n: int, rng: np.random.Generator, **kwargs) -> RadixTree:
    elems = list(elements)
    kwargs.setdefault("max_size", max(1, len(elems)))
    t = RadixTree(n, **kwargs)
    for x in elems:
        t.insert(x, rng)
    return t
