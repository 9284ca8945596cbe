"""Cell allocators drawing uniformly from the free cells of a fixed memory."""

from __future__ import annotations

import math

import numpy as np

from ..errors import CapacityError, ConfigurationError, DomainError

MIN_FREE_FRACTION = 1.0 / 3.0


def capacity_for(max_size: int) -> int:
    """Memory size that keeps at least a third of the cells free for ``max_size`` elements."""
    if max_size < 1:
        raise DomainError("max_size must be positive")
    need = 2 * math.ceil(1.5 * (2 * max_size - 1))
    return 1 << (need - 1).bit_length()


class Allocator:
    kind = "abstract"

    def __init__(self, capacity: int):
        if capacity < 1:
            raise DomainError("capacity must be positive")
        self.capacity = capacity
        self.occupied = [False] * capacity
        self.free_count = capacity

    def is_free(self, addr: int) -> bool:
        return not self.occupied[addr]

    def mark(self, addr: int) -> None:
        if self.occupied[addr]:
            raise DomainError(f"cell {addr} already occupied")
        self.occupied[addr] = True
        self.free_count -= 1

    def release(self, addr: int) -> None:
        if not self.occupied[addr]:
            raise DomainError(f"cell {addr} already free")
        self.occupied[addr] = False
        self.free_count += 1

    def allocate(self, rng: np.random.Generator) -> int:
        if self.free_count == 0:
            raise CapacityError("no free cell")
        addr = self._draw(rng)
        self.mark(addr)
        return addr

    def _draw(self, rng: np.random.Generator) -> int:
        raise NotImplementedError


class RandomSearchAllocator(Allocator):
    """Rejection sampling over all addresses; needs a third of memory free."""

    kind = "random-search"

    def _draw(self, rng: np.random.Generator) -> int:
        if self.free_count < MIN_FREE_FRACTION * self.capacity:
            raise ConfigurationError(
                f"free fraction {self.free_count}/{self.capacity} below 1/3"
            )
        while True:
            a = int(rng.integers(self.capacity))
            if not self.occupied[a]:
                return a


class HeapAllocator(Allocator):
    """Exact uniform draw by descending a complete binary tree of free counts."""

    kind = "heap-tree"

    def __init__(self, capacity: int):
        super().__init__(capacity)
        self._leaves = 1 << max(0, (capacity - 1).bit_length())
        self._count = [0] * (2 * self._leaves)
        for a in range(capacity):
            self._count[self._leaves + a] = 1
        for i in range(self._leaves - 1, 0, -1):
            self._count[i] = self._count[2 * i] + self._count[2 * i + 1]

    def _update(self, addr: int, value: int) -> None:
        i = self._leaves + addr
        self._count[i] = value
        i //= 2
        while i:
            self._count[i] = self._count[2 * i] + self._count[2 * i + 1]
            i //= 2

    def mark(self, addr: int) -> None:
        super().mark(addr)
        self._update(addr, 0)

    def release(self, addr: int) -> None:
        super().release(addr)
        self._update(addr, 1)

    def _draw(self, rng: np.random.Generator) -> int:
        i = 1
        while i < self._leaves:
            left = self._count[2 * i]
            i = 2 * i if rng.random() * self._count[i] < left else 2 * i + 1
        return i - self._leaves


def make_allocator(kind: str, capacity: int) -> Allocator:
    if kind == "heap-tree":
        return HeapAllocator(capacity)
    if kind == "random-search":
        return RandomSearchAllocator(capacity)
    raise ConfigurationError(f"unknown allocator {kind!r}")
