import itertools
from fractions import Fraction
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chainwalk.combinat import (
    DomainSpec,
    all_vertices,
    apply_coin,
    coin_from_index,
    coin_index,
    coin_to_pair,
    degree,
    neighbors,
    pair_to_coin,
    rank,
    reverse_coin,
    spectral_gap,
    unrank,
)
from chainwalk.errors import DomainError


def test_degree_examples():
    assert degree(8, 2) == 12
    assert degree(16, 4) == 48
    with pytest.raises(DomainError):
        degree(5, 5)


def test_gap_examples():
    assert spectral_gap(8, 2) == Fraction(2, 3)
    assert spectral_gap(8, 3) == Fraction(8, 15)
    assert spectral_gap(16, 4) == Fraction(1, 3)


def test_apply_coin_examples():
    assert apply_coin((1, 3, 5), (2, 3), DomainSpec(8)) == (1, 4, 5)
    assert apply_coin((0,), (1, 1), DomainSpec(2)) == (1,)
    assert apply_coin((1, 3, 5), (1, 1), DomainSpec(8, frozenset({0}))) == (2, 3, 5)


def test_reverse_and_pairs():
    spec = DomainSpec(8)
    assert reverse_coin((1, 3, 5), (2, 3), spec) == (2, 3)
    assert reverse_coin((0,), (1, 1), DomainSpec(2)) == (1, 1)
    assert coin_to_pair((1, 3, 5), (2, 3), spec) == (3, 4)
    assert pair_to_coin((1, 3, 5), 3, 4, spec) == (2, 3)
    assert coin_to_pair((0,), (1, 1), DomainSpec(2)) == (0, 1)
    with pytest.raises(DomainError):
        pair_to_coin((1, 3, 5), 2, 4, spec)
    with pytest.raises(DomainError):
        pair_to_coin((1, 3, 5), 3, 5, spec)


def test_rank_examples():
    spec = DomainSpec(4)
    assert unrank(0, 2, spec) == (0, 1)
    assert rank((2, 3), spec) == 5
    ex = DomainSpec(6, frozenset({0, 2}))
    assert unrank(0, 2, ex) == (1, 3)
    with pytest.raises(DomainError):
        unrank(comb(4, 2), 2, spec)


def test_all_vertices_matches_enumeration():
    spec = DomainSpec(7, frozenset({2}))
    verts = all_vertices(spec, 3)
    pts = [p for p in range(7) if p != 2]
    brute = sorted(itertools.combinations(pts, 3), key=lambda s: rank(s, spec))
    assert [tuple(v) for v in verts] == brute
    assert [rank(tuple(v), spec) for v in verts] == list(range(len(brute)))


@settings(max_examples=200, deadline=None)
@given(st.integers(3, 12), st.data())
def test_coin_moves_are_edges(N, data):
    excl = data.draw(st.sets(st.integers(0, N - 1), max_size=N - 2))
    spec = DomainSpec(N, frozenset(excl))
    n_eff = spec.effective_size
    R = data.draw(st.integers(1, n_eff - 1))
    pts = list(spec.effective_points())
    S = tuple(sorted(data.draw(st.permutations(pts))[:R]))
    c = (data.draw(st.integers(1, R)), data.draw(st.integers(1, n_eff - R)))
    T = apply_coin(S, c, spec)
    assert len(set(S) & set(T)) == R - 1
    assert apply_coin(T, reverse_coin(S, c, spec), spec) == S
    assert reverse_coin(T, reverse_coin(S, c, spec), spec) == c
    assert unrank(rank(S, spec), R, spec) == S
    i = coin_index(c, R, n_eff)
    assert coin_from_index(i, R, n_eff) == c


def test_neighbors_count_and_distinct():
    spec = DomainSpec(6)
    nb = neighbors((0, 2), spec)
    assert len(nb) == degree(6, 2) == len(set(nb))


def test_excluded_membership_rejected():
    with pytest.raises(DomainError):
        apply_coin((0, 3), (1, 1), DomainSpec(6, frozenset({0})))
