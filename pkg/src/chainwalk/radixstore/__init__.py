"""History-independent radix trees and the complement rank/select routines."""

from .alloc import HeapAllocator, RandomSearchAllocator, capacity_for, make_allocator
from .complement import (
    count_in_interval_not_tree,
    find_nth_not_in_tree,
    find_nth_not_in_two_trees,
)
from .tree import RadixTree, build_tree, to_bits
from .walkops import build_pair, check_invariant, pack, preimage_tree, swup_classical

__all__ = [
    "HeapAllocator",
    "RadixTree",
    "RandomSearchAllocator",
    "build_pair",
    "build_tree",
    "capacity_for",
    "check_invariant",
    "count_in_interval_not_tree",
    "find_nth_not_in_tree",
    "find_nth_not_in_two_trees",
    "make_allocator",
    "pack",
    "preimage_tree",
    "swup_classical",
    "to_bits",
]
