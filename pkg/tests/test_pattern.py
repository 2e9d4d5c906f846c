import json

import pytest
from hypothesis import given, settings, strategies as st

from collusion_pir.errors import BadParams, EmptySet, OutOfRangeIndex, TooLarge, UncoveredServer
from collusion_pir.pattern import (
    CollusionPattern,
    gen_cyclic_contiguous,
    gen_disjoint,
    gen_t_collusion,
    incidence_matrix,
    make_pattern,
    normalize,
    pattern_from_json,
)

IVC = [[0, 1, 2], [0, 3], [1, 3], [2, 3], [4]]


def test_make_pattern_keeps_given_sets():
    p = make_pattern(5, IVC)
    assert p.n_sets == 5
    assert [list(s) for s in p.sets] == IVC
    assert not p.dropped_nonmaximal


def test_make_pattern_drops_nonmaximal():
    p = make_pattern(3, [[0, 1], [0], [2]])
    assert p.sets == ((0, 1), (2,))
    assert p.dropped_nonmaximal


def test_make_pattern_dedupes_within_and_across_sets():
    assert make_pattern(2, [[1, 1, 0], [0, 1]]).sets == ((0, 1),)


@pytest.mark.parametrize(
    "n, sets, exc",
    [
        (2, [[0], [2]], OutOfRangeIndex),
        (2, [[0], []], EmptySet),
        (3, [[0], [1]], UncoveredServer),
        (0, [], BadParams),
    ],
)
def test_make_pattern_errors(n, sets, exc):
    with pytest.raises(exc):
        make_pattern(n, sets)


def test_enumeration_cap():
    with pytest.raises(TooLarge):
        make_pattern(21, [[i] for i in range(21)])
    assert make_pattern(21, [[i] for i in range(21)], enumeration_cap=None).n_servers == 21


def test_direct_construction_rejects_nonmaximal():
    with pytest.raises(BadParams):
        CollusionPattern(2, ((0,), (0, 1)))


def test_equality_ignores_set_order():
    assert make_pattern(3, [[2], [0, 1]]) == make_pattern(3, [[0, 1], [2]])


def test_normalize_merges_cooccurring_servers():
    p, merge = normalize(make_pattern(4, [[0, 1], [2, 3]]))
    assert p == make_pattern(2, [[0], [1]])
    assert merge == {0: 0, 1: 0, 2: 1, 3: 1}


@pytest.mark.parametrize("p", [make_pattern(5, IVC), make_pattern(2, [[0], [1]])])
def test_normalize_identity(p):
    q, merge = normalize(p)
    assert q == p
    assert merge == {i: i for i in range(p.n_servers)}


def test_gen_t_collusion():
    assert gen_t_collusion(4, 2).sets == ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))
    assert gen_t_collusion(3, 1) == make_pattern(3, [[0], [1], [2]])
    with pytest.raises(BadParams):
        gen_t_collusion(2, 3)


def test_gen_cyclic():
    assert gen_cyclic_contiguous(6, 2).sets == ((0, 1), (0, 5), (1, 2), (2, 3), (3, 4), (4, 5))
    assert gen_cyclic_contiguous(4, 1).n_sets == 4
    assert gen_cyclic_contiguous(3, 3).sets == ((0, 1, 2),)
    with pytest.raises(BadParams):
        gen_cyclic_contiguous(3, 0)


def test_gen_disjoint():
    full = gen_disjoint([3, 3], [1, 2], "full")
    assert full.sets == ((0,), (1,), (2,), (3, 4), (3, 5), (4, 5))
    cyc = gen_disjoint([4, 2], [2, 1], "cyclic")
    assert cyc.sets == ((0, 1), (0, 3), (1, 2), (2, 3), (4,), (5,))
    assert gen_disjoint([5], [2], "cyclic") == gen_cyclic_contiguous(5, 2)
    with pytest.raises(BadParams):
        gen_disjoint([2, 2], [1], "full")
    with pytest.raises(BadParams):
        gen_disjoint([2], [1], "other")


def test_incidence_matrix_ivc():
    b = incidence_matrix(make_pattern(5, IVC))
    assert b == (
        (1, 1, 0, 0, 0),
        (1, 0, 1, 0, 0),
        (1, 0, 0, 1, 0),
        (0, 1, 1, 1, 0),
        (0, 0, 0, 0, 1),
    )


def test_incidence_matrix_small():
    assert incidence_matrix(gen_t_collusion(3, 1)) == ((1, 0, 0), (0, 1, 0), (0, 0, 1))
    b = incidence_matrix(gen_cyclic_contiguous(4, 2))
    assert all(sum(row) == 2 for row in b)
    assert all(sum(col) == 2 for col in zip(*b))


def test_json_roundtrip():
    p = make_pattern(5, IVC)
    assert pattern_from_json(p.dumps()) == p
    assert json.loads(p.dumps()) == {"n": 5, "sets": IVC}
    with pytest.raises(BadParams):
        pattern_from_json({"n": 3})


@st.composite
def patterns(draw, max_n=7):
    n = draw(st.integers(1, max_n))
    sets = draw(st.lists(st.sets(st.integers(0, n - 1), min_size=1), min_size=1, max_size=6))
    sets = [sorted(s) for s in sets]
    covered = set().union(*map(set, sets))
    sets += [[i] for i in range(n) if i not in covered]
    return make_pattern(n, sets)


@settings(max_examples=150, deadline=None)
@given(patterns())
def test_make_pattern_idempotent(p):
    again = make_pattern(p.n_servers, [list(s) for s in p.sets])
    assert again == p and again.dumps() == p.dumps()
    assert not again.dropped_nonmaximal


@settings(max_examples=150, deadline=None)
@given(patterns())
def test_incidence_weights(p):
    b = incidence_matrix(p)
    for m, s in enumerate(p.sets):
        assert sum(b[n][m] for n in range(p.n_servers)) == len(s)
    assert all(sum(row) >= 1 for row in b)


@settings(max_examples=150, deadline=None)
@given(patterns())
def test_normalize_idempotent_and_commutes(p):
    q, merge = normalize(p)
    q2, merge2 = normalize(q)
    assert q2 == q and merge2 == {i: i for i in range(q.n_servers)}
    # merging rows of the incidence matrix and deduplicating columns gives q
    merged_sets = {tuple(sorted({merge[i] for i in s})) for s in p.sets}
    assert make_pattern(q.n_servers, merged_sets) == q
