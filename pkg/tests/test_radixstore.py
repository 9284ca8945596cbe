import itertools
import math

import numpy as np
import pytest
from scipy import stats

from chainwalk import chain
from chainwalk.acceptance import reference_form
from chainwalk.combinat import DomainSpec, apply_coin, reverse_coin
from chainwalk.errors import (
    CapacityError,
    ConfigurationError,
    DomainError,
    EmptyError,
    IntegrityError,
)
from chainwalk.radixstore import (
    HeapAllocator,
    RadixTree,
    RandomSearchAllocator,
    build_pair,
    build_tree,
    check_invariant,
    count_in_interval_not_tree,
    find_nth_not_in_tree,
    find_nth_not_in_two_trees,
    swup_classical,
)
from chainwalk.rng import make_rng, trial_rng

SAMPLE = [0b0000, 0b0010, 0b1001, 0b1011, 0b1111]


@pytest.fixture
def sample(rng):
    return build_tree(SAMPLE, 4, rng, max_size=8)


def test_lookup(sample):
    assert sample.lookup("1011")
    assert not sample.lookup("0111")
    assert not RadixTree(4).lookup(3)


def test_insert_examples(sample, rng):
    sample.insert("0111", rng)
    assert sample.lookup(0b0111) and sample.leaves[0] == 6
    sample.check()
    t = RadixTree(4)
    t.insert(9, rng)
    assert t.is_leaf(0) and t.key[0] == 9 and t.leaves[0] == 1
    with pytest.raises(DomainError):
        t.insert(9, rng)
    with pytest.raises(DomainError):
        t.delete(3)


def test_order_independence(rng):
    for _ in range(100):
        S = [int(x) for x in rng.choice(1 << 10, 20, replace=False)]
        forms = {build_tree(list(rng.permutation(S)), 10, rng).canonical_form() for _ in range(2)}
        assert len(forms) == 1
        assert forms.pop() == reference_form(S, 10)


def test_canonical_form_changes_and_round_trip(sample, rng):
    before = sample.canonical_form()
    sample.insert(5, rng)
    assert sample.canonical_form() != before
    sample.delete(5)
    assert sample.canonical_form() == before


def test_delete_restores_layout(rng):
    for trial in range(200):
        S = [int(x) for x in rng.choice(256, 12, replace=False)]
        t = build_tree(S, 8, rng, max_size=16)
        snap = t.to_json()
        x = int(rng.choice(np.setdiff1d(np.arange(256), S)))
        t.insert(x, rng)
        t.delete(x)
        assert t.to_json() == snap


def test_capacity_error(rng):
    t = RadixTree(4, capacity=3)
    t.insert(1, rng)
    t.insert(2, rng)
    with pytest.raises(CapacityError):
        t.insert(3, rng)


def test_heap_allocator_uniform():
    a = HeapAllocator(16)
    for addr in range(10):
        a.mark(addr)
    rng = make_rng(1)
    counts = np.zeros(16)
    for _ in range(6000):
        addr = a._draw(rng)
        counts[addr] += 1
    assert counts[:10].sum() == 0
    assert stats.chisquare(counts[10:]).pvalue > 0.001


def test_allocator_edges():
    assert HeapAllocator(1).allocate(make_rng(0)) == 0
    r = RandomSearchAllocator(6)
    for addr in range(5):
        r.mark(addr)
    with pytest.raises(ConfigurationError):
        r.allocate(make_rng(0))
    full = HeapAllocator(2)
    full.mark(0), full.mark(1)
    with pytest.raises(CapacityError):
        full.allocate(make_rng(0))


def test_qlookup_sample(rng):
    t = build_tree(SAMPLE, 4, rng, max_size=8, predicate=lambda x: x == 9)
    assert all(t.qlookup_sample(rng) == 9 for _ in range(20))
    t = build_tree(range(16), 4, rng, predicate=lambda x: x % 4 == 1)
    draws = [t.qlookup_sample(rng) for _ in range(4000)]
    for v in (1, 5, 9, 13):
        assert abs(draws.count(v) - 1000) <= 3 * math.sqrt(4000 * 0.25 * 0.75)
    none = build_tree(SAMPLE, 4, rng, max_size=8, predicate=lambda x: False)
    with pytest.raises(EmptyError):
        none.qlookup_sample(rng)


def test_nth_and_rank(sample):
    assert [sample.nth_element(j) for j in (0, 2, 4)] == [0, 9, 15]
    with pytest.raises(DomainError):
        sample.nth_element(5)
    assert [sample.rank(x) for x in range(16)] == [sum(e < x for e in SAMPLE) for x in range(16)]


def test_appendix_examples(sample, rng):
    assert find_nth_not_in_tree(0, sample) == 0b0001
    assert find_nth_not_in_tree(6, sample) == 0b1000
    assert find_nth_not_in_tree(10, sample) == 0b1110
    with pytest.raises(DomainError):
        find_nth_not_in_tree(11, sample)
    assert count_in_interval_not_tree(0b0000, 0b1000, sample) == 6
    assert count_in_interval_not_tree(0b1001, 0b1111, sample) == 4
    assert count_in_interval_not_tree(5, 5, sample) == 0
    with pytest.raises(DomainError):
        count_in_interval_not_tree(6, 5, sample)
    a = build_tree([0, 2], 4, rng)
    b = build_tree([9, 11], 4, rng)
    assert find_nth_not_in_two_trees(0, a, b) == 0b0001
    assert find_nth_not_in_two_trees(7, a, b) == 0b1010
    assert find_nth_not_in_two_trees(11, a, b) == 0b1111
    with pytest.raises(DomainError):
        find_nth_not_in_two_trees(0, a, build_tree([2, 3], 4, rng))


def test_appendix_against_brute_force(rng):
    for _ in range(300):
        n = int(rng.integers(1, 9))
        U = 1 << n
        S = rng.choice(U, int(rng.integers(0, U)), replace=False)
        t = build_tree([int(x) for x in S], n, rng)
        comp = np.setdiff1d(np.arange(U), S)
        assert [find_nth_not_in_tree(i, t) for i in range(len(comp))] == comp.tolist()
        u, v = sorted(int(x) for x in rng.integers(0, U + 1, 2))
        assert count_in_interval_not_tree(u, v, t) == int(((comp >= u) & (comp < v)).sum())


def test_swup_example(rng):
    f = chain.function_from_table([0, 1, 2, 3, 4, 5, 6, 7], 3)
    C = chain.CollisionTable()
    ts, tf = build_pair((1, 4, 5), f, C, rng)
    back = swup_classical(ts, tf, (2, 3), C, f, rng)
    assert ts.elements() == [1, 3, 5] and back == (2, 3)


def test_swup_matches_combinat(rng):
    for case in range(200):
        f = chain.random_function(4, 6, case)
        C = chain.CollisionTable()
        spec = chain.domain_for(f, C)
        R = int(rng.integers(1, 8))
        S = tuple(sorted(int(x) for x in rng.choice(16, R, replace=False)))
        coin = (int(rng.integers(1, R + 1)), int(rng.integers(1, 16 - R + 1)))
        ts, tf = build_pair(S, f, C, rng, max_size=8)
        back = swup_classical(ts, tf, coin, C, f, rng)
        assert tuple(ts.elements()) == apply_coin(S, coin, spec)
        assert back == reverse_coin(S, coin, spec)


def test_check_invariant_matches_brute_force(rng):
    f = chain.function_from_table([3, 3, 1, 2, 5, 6, 7, 0], 3)
    ts, tf = build_pair((0, 1, 2), f, chain.CollisionTable(), rng)
    assert check_invariant(tf) >= 1
    ts, tf = build_pair((2, 3, 4), f, chain.CollisionTable(), rng)
    assert check_invariant(tf) == 0
    for seed in range(200):
        g = chain.random_function(5, 6, seed)
        C = chain.CollisionTable()
        vals, cnt = np.unique(g.table, return_counts=True)
        for u in vals[cnt >= 2][: seed % 3]:
            C.add(int(u), np.flatnonzero(g.table == u).tolist())
        pts = chain.domain_for(g, C).effective_points()
        S = [int(x) for x in rng.choice(pts, 8, replace=False)]
        _, tf = build_pair(S, g, C, rng, max_size=8)
        assert check_invariant(tf) == len(chain.solutions_in_vertex(sorted(S), g, C))


def test_integrity_and_json(rng):
    t = build_tree(SAMPLE, 4, rng, max_size=8)
    clone = RadixTree.from_json(t.to_json())
    clone.check()
    assert clone.canonical_form() == t.canonical_form()
    clone.leaves[0] += 1
    with pytest.raises(IntegrityError):
        clone.check()


def test_random_operation_sequences(rng):
    for trial in range(50):
        t = RadixTree(6, max_size=20, allocator="random-search")
        members = set()
        for _ in range(60):
            x = int(rng.integers(64))
            if x in members:
                t.delete(x)
                members.remove(x)
            elif len(members) < 20:
                t.insert(x, rng)
                members.add(x)
            t.check()
            assert t.elements() == sorted(members)
            assert t.canonical_form() == reference_form(members, 6)
