import hashlib
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from anderson_corr.errors import ResourceLimit
from anderson_corr.walks import (LatticeWalk, NPathFamily, count_walks,
                                 enumerate_closed_walks, enumerate_npaths,
                                 visit_counts)


def test_walk_validation():
    LatticeWalk(((0, 0), (1, 0), (1, 1)))
    with pytest.raises(ValueError):
        LatticeWalk(((0, 0), (1, 1)))
    with pytest.raises(ValueError):
        LatticeWalk(())


def test_walk_properties():
    w = LatticeWalk(((0,), (1,), (0,)))
    assert w.length == 2
    assert w.start == (0,) and w.end == (0,)
    assert w.vertices == frozenset({(0,), (1,)})
    assert dict(w.visit_counts()) == {(0,): 2, (1,): 1}


def test_family_compatibility_validation():
    w1 = LatticeWalk(((0,),))
    w2 = LatticeWalk(((1,),))
    NPathFamily((w1, w2), ((1,), (-1,)))
    with pytest.raises(ValueError):
        NPathFamily((w1, w2), ((2,), (-1,)))


def test_closed_walk_counts_d1():
    for n in range(0, 11):
        got = sum(1 for _ in enumerate_closed_walks(1, n))
        want = math.comb(n, n // 2) if n % 2 == 0 else 0
        assert got == want
        assert got <= 2 ** n


def test_closed_walk_counts_d2():
    # closed square-lattice walks factor over diagonal coordinates:
    # the count at even length n is the squared central binomial
    for n in range(0, 7):
        got = sum(1 for _ in enumerate_closed_walks(2, n))
        want = math.comb(n, n // 2) ** 2 if n % 2 == 0 else 0
        assert got == want
        assert got <= 4 ** n


def test_spec_walk_examples():
    walks2 = list(enumerate_closed_walks(1, 2))
    assert {w.sites for w in walks2} == {((0,), (1,), (0,)), ((0,), (-1,), (0,))}
    assert sum(1 for _ in enumerate_closed_walks(2, 2)) == 4
    assert sum(1 for _ in enumerate_closed_walks(3, 1)) == 0
    assert count_walks(3, 2) == 6


def test_count_walks_fast_path_matches_enumeration():
    for n in range(0, 9):
        direct = sum(1 for _ in enumerate_closed_walks(1, n))
        assert count_walks(1, n) == direct
    assert count_walks(1, 4) == 6
    assert count_walks(2, 4) == 36


def test_enumeration_deterministic():
    def digest():
        h = hashlib.sha256()
        for fam in enumerate_npaths(2, ((0, 0), (0, 0)), 4):
            for w in fam.walks:
                h.update(repr(w.sites).encode())
        return h.hexdigest()

    assert digest() == digest()


def test_npaths_single_walk_reduces_to_closed():
    a = [f.walks[0].sites for f in enumerate_npaths(1, ((0,),), 4)]
    b = [w.sites for w in enumerate_closed_walks(1, 4)]
    assert a == b


def test_npaths_offset_pair_zero_length():
    fams = list(enumerate_npaths(1, ((1,), (-1,)), 0))
    assert len(fams) == 1
    fam = fams[0]
    assert fam.walks[0].sites == ((0,),)
    assert fam.walks[1].sites == ((1,),)
    assert fam.total_length == 0


def test_npaths_single_walk_with_displacement():
    # one walk pinned to end at -u
    assert len(list(enumerate_npaths(1, ((1,),), 0))) == 0  # parity
    fams = list(enumerate_npaths(1, ((1,),), 1))
    assert len(fams) == 1
    assert fams[0].walks[0].sites == ((0,), (-1,))


def test_npaths_parity_obstruction():
    # identity offsets: odd total length can never close
    assert list(enumerate_npaths(1, ((0,), (0,)), 3)) == []
    assert list(enumerate_npaths(2, ((0, 0),), 5)) == []


def test_npaths_counting_bound():
    for n in range(0, 7):
        count = sum(1 for _ in enumerate_npaths(1, ((0,), (0,)), n))
        assert count <= 2 ** n


def test_visit_counts_examples():
    fam = list(enumerate_npaths(1, ((0,),), 2))
    for f in fam:
        counts = visit_counts(f)
        assert counts[(0,)] == (2,)
        assert sum(sum(v) for v in counts.values()) == f.total_length + 1

    zero = list(enumerate_npaths(1, ((0,),), 0))[0]
    assert visit_counts(zero) == {(0,): (1,)}


def test_budget_enforced():
    with pytest.raises(ResourceLimit):
        list(enumerate_closed_walks(2, 8, budget=50))


@given(st.integers(min_value=0, max_value=5), st.integers(min_value=1, max_value=2))
@settings(max_examples=20, deadline=None)
def test_visit_conservation_property(n, d):
    offsets = ((0,) * d, (0,) * d)
    for fam in enumerate_npaths(d, offsets, n):
        counts = visit_counts(fam)
        assert sum(sum(v) for v in counts.values()) == fam.total_length + 2
